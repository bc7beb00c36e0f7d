"""Output path resolution and JSON helpers for experiment artifacts."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from deso.errors import DimensionError, InvalidInputError

logger = logging.getLogger(__name__)


def resolve_output_dir(out_dir: str | Path) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def resolve_sibling(path: str | Path, name: str) -> Path:
    """Return `name` next to `path`, or inside it when `path` is a directory."""

    path = Path(path)
    if path.is_dir():
        return path / name
    return path.with_name(name)


def resolve_relative(reference: str | Path, target: str | Path) -> Path:
    target = Path(target)
    if target.is_absolute():
        return target
    return Path(reference).resolve().parent / target


def matrix_to_json(matrix: np.ndarray | None) -> list[list[float]] | None:
    if matrix is None:
        return None
    return np.asarray(matrix, dtype=float).tolist()


def matrix_from_json(value: Any, label: str, *, column: bool = False, rows: int | None = None) -> np.ndarray:
    """Decode a row-major nested list; flat lists become columns when `column` is set."""

    try:
        array = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{label} is not a numeric array: {exc}") from exc
    if array.size == 0 and rows is not None:
        array = np.zeros((rows, 0))
    elif array.ndim == 1 and column:
        array = array.reshape(-1, 1)
    if array.ndim != 2:
        raise DimensionError(f"{label} must be a 2-D array, got {array.ndim}-D")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{label} has non-finite entries")
    return array


def write_json(path: str | Path, document: dict[str, Any]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def read_json(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    document = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(document, dict):
        raise InvalidInputError(f"{path} must hold a JSON object")
    return document


__all__ = [
    "matrix_from_json",
    "matrix_to_json",
    "read_json",
    "resolve_output_dir",
    "resolve_relative",
    "resolve_sibling",
    "write_json",
]
