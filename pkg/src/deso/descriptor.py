"""Descriptor plants: regularity, Weierstrass form, structural tests and simulation."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg as sla

from deso.artifacts import matrix_from_json, matrix_to_json, read_json, write_json
from deso.errors import (
    DimensionError,
    InvalidInputError,
    MissingDataError,
    SequenceLengthError,
    SingularPencilError,
)
from deso.layout import split_state
from deso.linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    as_matrix,
    finite_spectrum,
    is_regular_pencil,
    numerical_rank,
    pencil_keeps_column_rank,
)

logger = logging.getLogger(__name__)


def _freeze(instance: Any, name: str, value: np.ndarray) -> None:
    value.setflags(write=False)
    object.__setattr__(instance, name, value)


@dataclass(frozen=True, eq=False)
class DescriptorSystem:
    """E x(k+1) = A x(k) + B u(k) + F eta(k), y(k) = C x(k)."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    F: np.ndarray | None = None

    def __post_init__(self) -> None:
        for name in ("E", "A", "B", "C"):
            _freeze(self, name, as_matrix(getattr(self, name), name).copy())
        n = self.E.shape[0]
        if n < 1 or self.E.shape != (n, n):
            raise DimensionError(f"E must be square with n >= 1, got {self.E.shape}")
        if self.A.shape != (n, n):
            raise DimensionError(f"A must be {n}x{n}, got {self.A.shape}")
        if self.B.shape[0] != n:
            raise DimensionError(f"B must have {n} rows, got {self.B.shape}")
        if self.C.shape[1] != n:
            raise DimensionError(f"C must have {n} columns, got {self.C.shape}")
        if self.F is not None:
            _freeze(self, "F", as_matrix(self.F, "F").copy())
            if self.F.shape[0] != n:
                raise DimensionError(f"F must have {n} rows, got {self.F.shape}")
            if numerical_rank(self.F) != self.F.shape[1]:
                raise InvalidInputError("F must have full column rank")

    @property
    def n(self) -> int:
        return self.E.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def q(self) -> int:
        return 0 if self.F is None else self.F.shape[1]

    def to_dict(self) -> dict[str, Any]:
        document = {name: matrix_to_json(getattr(self, name)) for name in ("E", "A", "B", "C")}
        if self.F is not None:
            document["F"] = matrix_to_json(self.F)
        return document

    @classmethod
    def from_dict(cls, document: dict[str, Any]) -> DescriptorSystem:
        missing = [name for name in ("E", "A", "B", "C") if name not in document]
        if missing:
            raise InvalidInputError(f"system is missing {', '.join(missing)}")
        F = document.get("F")
        return cls(
            E=matrix_from_json(document["E"], "E"),
            A=matrix_from_json(document["A"], "A"),
            B=matrix_from_json(document["B"], "B", column=True),
            C=matrix_from_json(document["C"], "C"),
            F=None if F is None else matrix_from_json(F, "F", column=True),
        )


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """x(k+1) = A0 x + B0 u + E0 d, y = C0 x + F0 d."""

    A0: np.ndarray
    B0: np.ndarray
    E0: np.ndarray
    C0: np.ndarray
    F0: np.ndarray

    def __post_init__(self) -> None:
        for name in ("A0", "B0", "E0", "C0", "F0"):
            _freeze(self, name, as_matrix(getattr(self, name), name).copy())
        n = self.A0.shape[0]
        if n < 1 or self.A0.shape != (n, n):
            raise DimensionError(f"A0 must be square with n >= 1, got {self.A0.shape}")
        if self.B0.shape[0] != n or self.E0.shape[0] != n:
            raise DimensionError(f"B0 and E0 must have {n} rows")
        if self.C0.shape[1] != n:
            raise DimensionError(f"C0 must have {n} columns, got {self.C0.shape}")
        if self.F0.shape != (self.C0.shape[0], self.E0.shape[1]):
            raise DimensionError(
                f"F0 must be {self.C0.shape[0]}x{self.E0.shape[1]}, got {self.F0.shape}"
            )
        if numerical_rank(np.vstack([self.E0, self.F0])) != self.r:
            raise InvalidInputError("[E0; F0] must have full column rank")

    @property
    def n(self) -> int:
        return self.A0.shape[0]

    @property
    def m(self) -> int:
        return self.B0.shape[1]

    @property
    def p(self) -> int:
        return self.C0.shape[0]

    @property
    def r(self) -> int:
        return self.E0.shape[1]

    def to_dict(self) -> dict[str, Any]:
        return {name: matrix_to_json(getattr(self, name)) for name in ("A0", "B0", "E0", "C0", "F0")}

    @classmethod
    def from_dict(cls, document: dict[str, Any]) -> LtiSystem:
        missing = [name for name in ("A0", "B0", "C0") if name not in document]
        if missing:
            raise InvalidInputError(f"system is missing {', '.join(missing)}")
        A0 = matrix_from_json(document["A0"], "A0")
        C0 = matrix_from_json(document["C0"], "C0")
        return cls(
            A0=A0,
            B0=matrix_from_json(document["B0"], "B0", column=True),
            E0=matrix_from_json(document.get("E0", []), "E0", column=True, rows=A0.shape[0]),
            C0=C0,
            F0=matrix_from_json(document.get("F0", []), "F0", rows=C0.shape[0]),
        )


def system_from_dict(document: dict[str, Any]) -> DescriptorSystem | LtiSystem:
    if "A0" in document:
        return LtiSystem.from_dict(document)
    return DescriptorSystem.from_dict(document)


def load_system(path: str | Path) -> DescriptorSystem | LtiSystem:
    return system_from_dict(read_json(path))


def save_system(system: DescriptorSystem | LtiSystem, path: str | Path) -> Path:
    return write_json(path, system.to_dict())


@dataclass(frozen=True, eq=False)
class WeierstrassForm:
    """S E P = diag(I, R), S A P = diag(A1, I), S B = [B1; B2], C P = [C1, C2]."""

    S: np.ndarray
    P: np.ndarray
    A1: np.ndarray
    R: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    n1: int
    n2: int
    s: int
    F1: np.ndarray | None = None
    F2: np.ndarray | None = None
    P_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "P_inv", np.linalg.inv(self.P))

    @property
    def P1(self) -> np.ndarray:
        return self.P[:, : self.n1]

    @property
    def P2(self) -> np.ndarray:
        return self.P[:, self.n1 :]

    def input_blocks(self, include_unknown: bool) -> tuple[np.ndarray, np.ndarray]:
        """Slow and fast input matrices, widened by [F1; F2] when requested."""

        if not include_unknown or self.F1 is None:
            return self.B1, self.B2
        return np.hstack([self.B1, self.F1]), np.hstack([self.B2, self.F2])

    def slow_states(self, x: np.ndarray) -> np.ndarray:
        """z1 for each row of a state trajectory."""

        slow, _ = split_state(np.atleast_2d(x) @ self.P_inv.T, self.n1)
        return slow

    def fast_powers(self) -> list[np.ndarray]:
        """[R^0, ..., R^(s-1)]."""

        powers = []
        current = np.eye(self.n2)
        for _ in range(self.s):
            powers.append(current)
            current = current @ self.R
        return powers


@dataclass(frozen=True, eq=False)
class Trajectory:
    x: np.ndarray
    y: np.ndarray

    @property
    def steps(self) -> int:
        return self.x.shape[0] - 1


def check_regularity(sys: DescriptorSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return is_regular_pencil(sys.E, sys.A, tol)


def _nilpotency_index(R: np.ndarray, tol: Tolerances) -> int:
    n2 = R.shape[0]
    if n2 == 0:
        return 0
    power = R.copy()
    for s in range(1, n2 + 1):
        if np.linalg.norm(power) < tol.residual_tol:
            return s
        power = power @ R
    return n2


def weierstrass(sys: DescriptorSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> WeierstrassForm:
    """Reordered QZ decomposition followed by a coupled Sylvester decoupling."""

    if not check_regularity(sys, tol):
        raise SingularPencilError("pencil (E, A) is singular")
    E, A = sys.E, sys.A
    n = sys.n
    threshold = tol.rank_tol * max(np.linalg.norm(E), np.linalg.norm(A))

    def finite(alpha, beta):
        return np.abs(beta) > threshold

    AA, EE, alpha, beta, Q, Z = sla.ordqz(A, E, sort=finite, output="real")
    n1 = int(np.count_nonzero(finite(alpha, beta)))
    n2 = n - n1

    A11, A12, A22 = AA[:n1, :n1], AA[:n1, n1:], AA[n1:, n1:]
    E11, E12, E22 = EE[:n1, :n1], EE[:n1, n1:], EE[n1:, n1:]

    # A11 X + Y A22 = -A12 and E11 X + Y E22 = -E12, vectorized column-major.
    X = np.zeros((n1, n2))
    Y = np.zeros((n1, n2))
    if n1 and n2:
        eye1, eye2 = np.eye(n1), np.eye(n2)
        lhs = np.block(
            [
                [np.kron(eye2, A11), np.kron(A22.T, eye1)],
                [np.kron(eye2, E11), np.kron(E22.T, eye1)],
            ]
        )
        rhs = -np.concatenate([A12.reshape(-1, order="F"), E12.reshape(-1, order="F")])
        solution = sla.solve(lhs, rhs)
        X = solution[: n1 * n2].reshape((n1, n2), order="F")
        Y = solution[n1 * n2 :].reshape((n1, n2), order="F")

    left = np.block([[np.eye(n1), Y], [np.zeros((n2, n1)), np.eye(n2)]])
    right = np.block([[np.eye(n1), X], [np.zeros((n2, n1)), np.eye(n2)]])
    E11_inv = np.linalg.inv(E11) if n1 else np.zeros((0, 0))
    A22_inv = np.linalg.inv(A22) if n2 else np.zeros((0, 0))
    S = sla.block_diag(E11_inv, A22_inv) @ left @ Q.T
    P = Z @ right

    A1 = E11_inv @ A11
    # Diagonal of A22^-1 E22 is rounding noise on the infinite eigenvalues.
    R = np.triu(A22_inv @ E22, k=1)
    SB = S @ sys.B
    C1, C2 = split_state(sys.C @ P, n1)
    F1 = F2 = None
    if sys.F is not None:
        SF = S @ sys.F
        F1, F2 = SF[:n1], SF[n1:]

    form = WeierstrassForm(
        S=S,
        P=P,
        A1=A1,
        R=R,
        B1=SB[:n1],
        B2=SB[n1:],
        C1=C1,
        C2=C2,
        n1=n1,
        n2=n2,
        s=_nilpotency_index(R, tol),
        F1=F1,
        F2=F2,
    )
    logger.debug("Weierstrass form: n1=%d n2=%d s=%d", n1, n2, form.s)
    return form


def _as_signal(values: ArrayLike, width: int, label: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim == 1 and width == 1:
        array = array.reshape(-1, 1)
    if array.ndim != 2 or array.shape[1] != width:
        raise DimensionError(f"{label} must have shape (length, {width}), got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{label} has non-finite entries")
    return array


def simulate(
    sys: DescriptorSystem,
    wf: WeierstrassForm,
    z1_init: ArrayLike,
    u: ArrayLike,
    eta: ArrayLike | None = None,
    steps: int | None = None,
) -> Trajectory:
    """Consistent trajectory x(0..L) from z1(0) and inputs u(0..L+s-1).

    The fast part is anticipative: z2(k) = -sum_{j<s} R^j B2 u(k+j).
    """

    u = _as_signal(u, sys.m, "u")
    if eta is not None:
        if sys.F is None:
            raise InvalidInputError("eta given for a system without F")
        eta = _as_signal(eta, sys.q, "eta")
    elif sys.F is not None:
        eta = np.zeros((u.shape[0], sys.q))

    s = wf.s
    L = u.shape[0] - s if steps is None else int(steps)
    if L < 0 or u.shape[0] < L + s:
        raise SequenceLengthError(f"u needs at least {max(L, 0) + s} samples, got {u.shape[0]}")
    if eta is not None and eta.shape[0] < L + s:
        raise SequenceLengthError(f"eta needs at least {L + s} samples, got {eta.shape[0]}")

    u_tilde = u[: L + s] if eta is None else np.hstack([u[: L + s], eta[: L + s]])
    slow_input, fast_input = wf.input_blocks(include_unknown=eta is not None)

    z1 = np.empty((L + 1, wf.n1))
    z1[0] = np.asarray(z1_init, dtype=float).reshape(wf.n1)
    for k in range(L):
        z1[k + 1] = wf.A1 @ z1[k] + slow_input @ u_tilde[k]

    z2 = np.zeros((L + 1, wf.n2))
    for j, power in enumerate(wf.fast_powers()):
        z2 -= u_tilde[j : j + L + 1] @ (power @ fast_input).T

    x = np.hstack([z1, z2]) @ wf.P.T
    return Trajectory(x=x, y=x @ sys.C.T)


def simulate_lti(
    lti: LtiSystem,
    x0: ArrayLike,
    u: ArrayLike,
    d: ArrayLike,
    steps: int | None = None,
) -> Trajectory:
    u = _as_signal(u, lti.m, "u")
    d = _as_signal(d, lti.r, "d") if lti.r else np.zeros((u.shape[0] + 1, 0))
    L = min(u.shape[0], d.shape[0] - 1) if steps is None else int(steps)
    if L < 0 or u.shape[0] < L or d.shape[0] < L + 1:
        raise SequenceLengthError(f"{L} steps need {L} inputs and {L + 1} disturbance samples")

    x = np.empty((L + 1, lti.n))
    x[0] = np.asarray(x0, dtype=float).reshape(lti.n)
    for k in range(L):
        x[k + 1] = lti.A0 @ x[k] + lti.B0 @ u[k] + lti.E0 @ d[k]
    y = x @ lti.C0.T + d[: L + 1] @ lti.F0.T
    return Trajectory(x=x, y=y)


def _rank_at(E: np.ndarray, A: np.ndarray, C: np.ndarray, lam: complex, tol: Tolerances) -> int:
    return numerical_rank(np.vstack([lam * E - A, C]), tol)


def pbh_detectable(sys: DescriptorSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """rank [lambda E - A; C] = n at every finite eigenvalue with |lambda| >= 1 - margin."""

    for lam in finite_spectrum(sys.E, sys.A, tol):
        if abs(lam) >= tol.schur_bound and _rank_at(sys.E, sys.A, sys.C, lam, tol) < sys.n:
            return False
    return True


def observable(sys: DescriptorSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Finite modes all observable and the fast subsystem observable."""

    for lam in finite_spectrum(sys.E, sys.A, tol):
        if _rank_at(sys.E, sys.A, sys.C, lam, tol) < sys.n:
            return False
    return dual_normalizability(sys, tol)


def dual_normalizability(sys: DescriptorSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return numerical_rank(np.vstack([sys.E, sys.C]), tol) == sys.n


def fast_subsystem_observable(wf: WeierstrassForm, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """rank [R; C2] = n2, the Weierstrass-side reading of dual normalizability."""

    if wf.n2 == 0:
        return True
    return numerical_rank(np.vstack([wf.R, wf.C2]), tol) == wf.n2


def _require_unknown_input(sys: DescriptorSystem) -> np.ndarray:
    if sys.F is None:
        raise MissingDataError("system has no unknown-input matrix F")
    return sys.F


def matching_condition(sys: DescriptorSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """rank [E F; C 0] = n + q."""

    F = _require_unknown_input(sys)
    stacked = np.block([[sys.E, F], [sys.C, np.zeros((sys.p, sys.q))]])
    return numerical_rank(stacked, tol) == sys.n + sys.q


def uio_detectable(sys: DescriptorSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """rank [lambda E - A, -F; C, 0] = n + q for every |lambda| >= 1."""

    F = _require_unknown_input(sys)
    leading = np.block([[sys.E, np.zeros_like(F)], [np.zeros((sys.p, sys.n + sys.q))]])
    constant = np.block([[sys.A, F], [-sys.C, np.zeros((sys.p, sys.q))]])
    return pencil_keeps_column_rank(leading, constant, tol)


def _controllability_rank(A: np.ndarray, B: np.ndarray, depth: int, tol: Tolerances) -> int:
    blocks = []
    current = B
    for _ in range(depth):
        blocks.append(current)
        current = A @ current
    if not blocks:
        return 0
    return numerical_rank(np.hstack(blocks), tol)


def r_controllable(
    wf: WeierstrassForm,
    tol: Tolerances = DEFAULT_TOLERANCES,
    include_unknown: bool = False,
) -> bool:
    """Kalman rank test on the slow subsystem (A1, B1)."""

    if wf.n1 == 0:
        return True
    slow_input, _ = wf.input_blocks(include_unknown)
    return _controllability_rank(wf.A1, slow_input, wf.n1, tol) == wf.n1


def fast_reachable(
    wf: WeierstrassForm,
    tol: Tolerances = DEFAULT_TOLERANCES,
    include_unknown: bool = False,
) -> bool:
    """rank [B2, R B2, ..., R^(s-1) B2] = n2, or the [B2, F2] variant."""

    if wf.n2 == 0:
        return True
    _, fast_input = wf.input_blocks(include_unknown)
    return _controllability_rank(wf.R, fast_input, wf.s, tol) == wf.n2


def c_controllable(
    wf: WeierstrassForm,
    tol: Tolerances = DEFAULT_TOLERANCES,
    include_unknown: bool = False,
) -> bool:
    """R-controllability plus a reachable fast subsystem."""

    return r_controllable(wf, tol, include_unknown) and fast_reachable(wf, tol, include_unknown)


def strong_detectability(lti: LtiSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """rank [lambda I - A0, -E0; C0, F0] = n + r for every |lambda| >= 1."""

    n, r, p = lti.n, lti.r, lti.p
    leading = np.block([[np.eye(n), np.zeros((n, r))], [np.zeros((p, n + r))]])
    constant = np.block([[lti.A0, lti.E0], [-lti.C0, -lti.F0]])
    return pencil_keeps_column_rank(leading, constant, tol)


def augment_for_eso(lti: LtiSystem) -> DescriptorSystem:
    """Descriptor system whose state is [x; d]."""

    n, r, m = lti.n, lti.r, lti.m
    E = sla.block_diag(np.eye(n), np.zeros((r, r)))
    A = np.block([[lti.A0, lti.E0], [np.zeros((r, n + r))]])
    B = np.vstack([lti.B0, np.zeros((r, m))])
    C = np.hstack([lti.C0, lti.F0])
    return DescriptorSystem(E=E, A=A, B=B, C=C)


__all__ = [
    "DescriptorSystem",
    "LtiSystem",
    "Trajectory",
    "WeierstrassForm",
    "augment_for_eso",
    "c_controllable",
    "check_regularity",
    "dual_normalizability",
    "fast_reachable",
    "fast_subsystem_observable",
    "load_system",
    "matching_condition",
    "observable",
    "pbh_detectable",
    "r_controllable",
    "save_system",
    "simulate",
    "simulate_lti",
    "strong_detectability",
    "system_from_dict",
    "uio_detectable",
    "weierstrass",
]
