"""Process runtime helpers: logging setup, timing and the trial worker pool."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
import logging
import time
from typing import Callable, Iterable, TypeVar

from deso import config

T = TypeVar("T")
R = TypeVar("R")


def configure_logging(level: str = config.LOG_LEVEL) -> None:
    if logging.getLogger().handlers:
        return
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    )


class Stopwatch:
    """Wall-clock lap timer."""

    def __init__(self):
        self._start = time.perf_counter()
        self._last = self._start

    def lap(self) -> float:
        now = time.perf_counter()
        elapsed = now - self._last
        self._last = now
        return elapsed

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self._start


def map_trials(fn: Callable[[T], R], items: Iterable[T], workers: int = config.MC_WORKERS) -> list[R]:
    """Apply `fn` to every item in order, fanning out to processes when workers > 1."""

    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


__all__ = ["Stopwatch", "configure_logging", "map_trials"]
