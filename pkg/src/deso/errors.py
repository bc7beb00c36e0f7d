"""Exception hierarchy for descriptor observers.

Infeasible syntheses are reported as values; only malformed input,
unusable data and broken numerical preconditions raise.
"""

from __future__ import annotations


class DesoError(Exception):
    """Base class for every error raised by the package."""


class InvalidInputError(DesoError, ValueError):
    """Malformed or non-finite matrix data."""


class DimensionError(DesoError, ValueError):
    """Matrix or sequence shapes that do not fit together."""


class SingularPencilError(DesoError):
    """The pencil (E, A) is singular for every value of lambda."""


class SequenceLengthError(DesoError, ValueError):
    """A signal is too short for the requested horizon."""


class MissingDataError(DesoError):
    """A required data channel (usually the unknown input) is absent."""


class ConfigError(DesoError, ValueError):
    """An experiment configuration or override cannot be used."""


class PersistentExcitationError(DesoError):
    """Data collection never produced a persistently exciting record."""


class NotSchurError(DesoError, ValueError):
    """Observer gains whose state matrix is not Schur stable."""


__all__ = [
    "ConfigError",
    "DesoError",
    "DimensionError",
    "InvalidInputError",
    "MissingDataError",
    "NotSchurError",
    "PersistentExcitationError",
    "SequenceLengthError",
    "SingularPencilError",
]
