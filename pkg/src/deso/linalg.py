"""Tolerance-aware dense linear-algebra kernels."""

from __future__ import annotations

from dataclasses import asdict, dataclass
import logging
from typing import Any, Mapping

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg as sla

from deso import config
from deso.errors import ConfigError, DimensionError, InvalidInputError, SingularPencilError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds standing in for exact rank and stability tests."""

    rank_tol: float = config.RANK_TOL
    residual_tol: float = config.RESIDUAL_TOL
    schur_margin: float = config.SCHUR_MARGIN

    def __post_init__(self) -> None:
        for name in ("rank_tol", "residual_tol", "schur_margin"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not np.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def schur_bound(self) -> float:
        return 1.0 - self.schur_margin

    @classmethod
    def from_overrides(cls, overrides: Mapping[str, Any] | None) -> Tolerances:
        """Build tolerances from a partial mapping of field overrides."""

        if not overrides:
            return cls()
        known = {"rank_tol", "residual_tol", "schur_margin"}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {', '.join(unknown)}")
        try:
            values = {key: float(value) for key, value in overrides.items()}
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"tolerances must be numbers: {exc}") from exc
        return cls(**values)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(value: ArrayLike, label: str = "matrix") -> np.ndarray:
    """Return a finite 2-D float array or raise."""

    try:
        array = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{label} is not numeric: {exc}") from exc
    if array.ndim != 2:
        raise DimensionError(f"{label} must be 2-D, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{label} has non-finite entries")
    return array


def _as_any_matrix(value: ArrayLike, label: str) -> np.ndarray:
    array = np.asarray(value)
    if array.ndim != 2:
        raise DimensionError(f"{label} must be 2-D, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{label} has non-finite entries")
    return array


def _require_square(matrix: np.ndarray, label: str) -> None:
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"{label} must be square, got shape {matrix.shape}")


def numerical_rank(matrix: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """Count singular values above rank_tol times the largest one."""

    matrix = _as_any_matrix(matrix, "matrix")
    if matrix.size == 0:
        return 0
    singular_values = sla.svd(matrix, compute_uv=False)
    cutoff = tol.rank_tol * singular_values[0]
    return int(np.count_nonzero(singular_values > cutoff))


def pseudoinverse(matrix: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    matrix = as_matrix(matrix)
    rows, cols = matrix.shape
    if matrix.size == 0 or not np.any(matrix):
        return np.zeros((cols, rows))
    return sla.pinv(matrix, atol=0.0, rtol=tol.rank_tol)


def null_space_basis(matrix: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Orthonormal basis of the right kernel; zero columns when it is trivial."""

    matrix = as_matrix(matrix)
    rows, cols = matrix.shape
    if rows == 0 or not np.any(matrix):
        return np.eye(cols)
    return sla.null_space(matrix, rcond=tol.rank_tol)


def spectral_radius(matrix: ArrayLike) -> float:
    matrix = _as_any_matrix(matrix, "matrix")
    _require_square(matrix, "matrix")
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(sla.eigvals(matrix))))


def is_schur(matrix: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return spectral_radius(matrix) < tol.schur_bound


def _pencil_scale(E: np.ndarray, A: np.ndarray) -> float:
    return max(float(np.linalg.norm(E)), float(np.linalg.norm(A)))


def _homogeneous_pairs(E: np.ndarray, A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pairs = sla.eigvals(A, E, homogeneous_eigvals=True)
    return pairs[0], pairs[1]


def is_regular_pencil(E: ArrayLike, A: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """True when det(lambda E - A) is not identically zero."""

    E = as_matrix(E, "E")
    A = as_matrix(A, "A")
    _require_square(E, "E")
    if E.shape != A.shape:
        raise DimensionError(f"E {E.shape} and A {A.shape} must have the same shape")
    n = E.shape[0]
    scale = _pencil_scale(E, A)
    if n == 0:
        return True
    if scale == 0.0:
        return False
    threshold = tol.rank_tol * scale
    alpha, beta = _homogeneous_pairs(E, A)
    if np.any((np.abs(alpha) < threshold) & (np.abs(beta) < threshold)):
        return False
    return numerical_rank(config.REGULARITY_PROBE * E - A, tol) == n


def finite_spectrum(E: ArrayLike, A: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES) -> list[complex]:
    """Finite generalized eigenvalues of the pencil (E, A)."""

    E = as_matrix(E, "E")
    A = as_matrix(A, "A")
    if not is_regular_pencil(E, A, tol):
        raise SingularPencilError("pencil (E, A) is singular")
    if E.size == 0:
        return []
    threshold = tol.rank_tol * _pencil_scale(E, A)
    alpha, beta = _homogeneous_pairs(E, A)
    finite = np.abs(beta) > threshold
    return [complex(value) for value in alpha[finite] / beta[finite]]


def circle_grid(points: int = config.CIRCLE_GRID_POINTS, radii=config.CIRCLE_GRID_RADII) -> np.ndarray:
    """Evenly spaced complex points on each circle of the given radii."""

    angles = 2.0 * np.pi * np.arange(points) / points
    return np.concatenate([radius * np.exp(1j * angles) for radius in radii])


def _probe_rng() -> np.random.Generator:
    return np.random.default_rng(config.PENCIL_PROBE_SEED)


def pencil_keeps_column_rank(
    leading: ArrayLike,
    constant: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
    min_modulus: float | None = None,
) -> bool:
    """Check rank(lambda * leading - constant) == columns for every finite |lambda| >= min_modulus.

    Rank can only drop at finite eigenvalues of a generic square projection
    W (lambda * leading - constant) of the pencil, so those are the only
    points evaluated.
    """

    leading = as_matrix(leading, "leading")
    constant = as_matrix(constant, "constant")
    if leading.shape != constant.shape:
        raise DimensionError(f"pencil blocks differ in shape: {leading.shape} vs {constant.shape}")
    rows, cols = leading.shape
    if cols == 0:
        return True
    if rows < cols:
        return False
    if min_modulus is None:
        min_modulus = tol.schur_bound

    rng = _probe_rng()
    probe = complex(*rng.uniform(0.3, 1.7, size=2))
    if numerical_rank(probe * leading - constant, tol) < cols:
        return False

    projection = rng.standard_normal((cols, rows))
    try:
        candidates = finite_spectrum(projection @ leading, projection @ constant, tol)
    except SingularPencilError:
        logger.debug("projected pencil is singular; falling back to the circle grid")
        candidates = list(circle_grid())
    for lam in candidates:
        if abs(lam) < min_modulus:
            continue
        if numerical_rank(lam * leading - constant, tol) < cols:
            return False
    return True


def _pair_detectable(M: np.ndarray, G: np.ndarray, tol: Tolerances) -> bool:
    n = M.shape[0]
    for lam in sla.eigvals(M):
        if abs(lam) < tol.schur_bound:
            continue
        if numerical_rank(np.vstack([lam * np.eye(n) - M, G]), tol) < n:
            return False
    return True


def stabilize_output_injection(
    M: ArrayLike,
    G: ArrayLike,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray | None:
    """Return K with M + K G Schur, or None when (M, G) is not detectable.

    The gain comes from the discrete Riccati equation of the dual pair
    (M^T, G^T) with identity weights.
    """

    M = as_matrix(M, "M")
    G = as_matrix(G, "G")
    _require_square(M, "M")
    n = M.shape[0]
    if G.shape[1] != n:
        raise DimensionError(f"G must have {n} columns, got shape {G.shape}")
    w = G.shape[0]
    if is_schur(M, tol):
        return np.zeros((n, w))
    if w == 0 or not _pair_detectable(M, G, tol):
        return None

    try:
        P = sla.solve_discrete_are(M.T, G.T, np.eye(n), np.eye(w))
        dual_gain = sla.solve(np.eye(w) + G @ P @ G.T, G @ P @ M.T, assume_a="sym")
    except (np.linalg.LinAlgError, ValueError) as exc:
        logger.debug("Riccati stabilization failed: %s", exc)
        return None

    K = -dual_gain.T
    if not is_schur(M + K @ G, tol):
        logger.debug("Riccati gain does not reach the Schur bound")
        return None
    return K


__all__ = [
    "DEFAULT_TOLERANCES",
    "Tolerances",
    "as_matrix",
    "circle_grid",
    "finite_spectrum",
    "is_regular_pencil",
    "is_schur",
    "null_space_basis",
    "numerical_rank",
    "pencil_keeps_column_rank",
    "pseudoinverse",
    "spectral_radius",
    "stabilize_output_injection",
]
