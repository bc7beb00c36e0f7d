import logging

from deso.runtime import Stopwatch, configure_logging, map_trials


def _square(value):
    return value * value


def test_stopwatch_laps():
    clock = Stopwatch()
    first = clock.lap()
    second = clock.lap()
    assert first >= 0.0 and second >= 0.0
    assert clock.elapsed >= first + second


def test_map_trials_keeps_order():
    assert map_trials(_square, range(6)) == [0, 1, 4, 9, 16, 25]
    assert map_trials(_square, range(6), workers=2) == [0, 1, 4, 9, 16, 25]
    assert map_trials(_square, [], workers=2) == []


def test_configure_logging_keeps_existing_handlers():
    root = logging.getLogger()
    before = list(root.handlers)
    configure_logging("DEBUG")
    configure_logging("WARNING")
    assert len(root.handlers) == max(1, len(before))
