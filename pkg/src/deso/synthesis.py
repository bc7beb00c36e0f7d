"""Observer synthesis from the data equation Xf = Sigma [Xp; Up; Yp; Yf]."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from pathlib import Path
from typing import Any

import numpy as np

from deso.artifacts import matrix_from_json, matrix_to_json, read_json, write_json
from deso.data import (
    DataMatrices,
    DataRecord,
    build_data_matrices,
    corollary1_test,
    corollary2_test,
    stacked_rank,
)
from deso.descriptor import LtiSystem, augment_for_eso, dual_normalizability, strong_detectability
from deso.errors import DimensionError, InvalidInputError, MissingDataError, NotSchurError
from deso.layout import StackLayout
from deso.linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    circle_grid,
    is_schur,
    null_space_basis,
    numerical_rank,
    pseudoinverse,
    spectral_radius,
    stabilize_output_injection,
)

logger = logging.getLogger(__name__)

OBSERVER_KINDS = ("standard", "uio", "eso")


@dataclass(frozen=True, eq=False)
class DataEquation:
    D: np.ndarray
    Xf: np.ndarray
    D_pinv: np.ndarray
    projector: np.ndarray
    kernel_basis: np.ndarray
    layout: StackLayout


@dataclass(frozen=True, eq=False)
class ObserverFamily:
    """Sigma(K1) = Sigma0 + K1 (I - D D^+), whose Xp block is M + K1 G."""

    equation: DataEquation
    sigma0: np.ndarray
    M: np.ndarray
    G: np.ndarray

    def sigma(self, K1: np.ndarray) -> np.ndarray:
        return self.sigma0 + K1 @ self.equation.projector


@dataclass(frozen=True, eq=False)
class KernelInclusion:
    holds: bool
    residual: float
    max_column_norm: float


@dataclass(frozen=True, eq=False)
class ObserverGains:
    """x_hat(k+1) = A_O x_hat + B_O_u u + B_O_y y + N_O y(k+1)."""

    A_O: np.ndarray
    B_O_u: np.ndarray
    B_O_y: np.ndarray
    N_O: np.ndarray
    kind: str = "standard"
    tol: Tolerances = field(default=DEFAULT_TOLERANCES, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in OBSERVER_KINDS:
            raise InvalidInputError(f"unknown observer kind {self.kind!r}")
        n = self.A_O.shape[0]
        if self.A_O.shape != (n, n):
            raise DimensionError(f"A_O must be square, got {self.A_O.shape}")
        if self.B_O_u.shape[0] != n or self.B_O_y.shape[0] != n or self.N_O.shape[0] != n:
            raise DimensionError("every gain block needs the state count as its row count")
        if self.B_O_y.shape != self.N_O.shape:
            raise DimensionError("B_O_y and N_O must have the same shape")
        if not is_schur(self.A_O, self.tol):
            raise NotSchurError(f"A_O has spectral radius {spectral_radius(self.A_O):.6g}")

    @property
    def n(self) -> int:
        return self.A_O.shape[0]

    @property
    def m(self) -> int:
        return self.B_O_u.shape[1]

    @property
    def p(self) -> int:
        return self.N_O.shape[1]

    @property
    def layout(self) -> StackLayout:
        return StackLayout(self.n, self.m, self.p)

    @property
    def sigma(self) -> np.ndarray:
        return np.hstack([self.A_O, self.B_O_u, self.B_O_y, self.N_O])

    @classmethod
    def from_sigma(
        cls,
        sigma: np.ndarray,
        layout: StackLayout,
        kind: str = "standard",
        tol: Tolerances = DEFAULT_TOLERANCES,
    ) -> ObserverGains:
        A_O, B_O_u, B_O_y, N_O = layout.split_columns(sigma)
        return cls(A_O.copy(), B_O_u.copy(), B_O_y.copy(), N_O.copy(), kind=kind, tol=tol)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "A_O": matrix_to_json(self.A_O),
            "B_O_u": matrix_to_json(self.B_O_u),
            "B_O_y": matrix_to_json(self.B_O_y),
            "N_O": matrix_to_json(self.N_O),
        }

    @classmethod
    def from_dict(cls, document: dict[str, Any], tol: Tolerances = DEFAULT_TOLERANCES) -> ObserverGains:
        missing = [key for key in ("A_O", "B_O_u", "B_O_y", "N_O") if key not in document]
        if missing:
            raise InvalidInputError(f"gains are missing {', '.join(missing)}")
        A_O = matrix_from_json(document["A_O"], "A_O")
        n = A_O.shape[0]
        return cls(
            A_O=A_O,
            B_O_u=matrix_from_json(document["B_O_u"], "B_O_u", rows=n),
            B_O_y=matrix_from_json(document["B_O_y"], "B_O_y"),
            N_O=matrix_from_json(document["N_O"], "N_O"),
            kind=document.get("kind", "standard"),
            tol=tol,
        )


def save_gains(gains: ObserverGains, path: str | Path) -> Path:
    return write_json(path, gains.to_dict())


def load_gains(path: str | Path, tol: Tolerances = DEFAULT_TOLERANCES) -> ObserverGains:
    return ObserverGains.from_dict(read_json(path), tol)


@dataclass(eq=False)
class SynthesisReport:
    feasible: bool
    kind: str
    spectral_radius: float
    data_residual: float
    K1: np.ndarray
    kernel_inclusion_residual: float | None = None
    checks: dict[str, bool] = field(default_factory=dict)
    reason: str | None = None
    gains: ObserverGains | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "feasible": bool(self.feasible),
            "kind": self.kind,
            "reason": self.reason,
            "spectral_radius": float(self.spectral_radius),
            "data_residual": float(self.data_residual),
            "kernel_inclusion_residual": (
                None if self.kernel_inclusion_residual is None else float(self.kernel_inclusion_residual)
            ),
            "K1_norm": float(np.linalg.norm(self.K1)),
            "checks": {name: bool(value) for name, value in self.checks.items()},
            "gains": None if self.gains is None else self.gains.to_dict(),
        }


def save_report(report: SynthesisReport, path: str | Path) -> Path:
    return write_json(path, report.to_dict())


def solve_family(dm: DataMatrices, tol: Tolerances = DEFAULT_TOLERANCES) -> ObserverFamily:
    layout = dm.layout
    D = dm.D
    D_pinv = pseudoinverse(D, tol)
    projector = np.eye(layout.height) - D @ D_pinv
    equation = DataEquation(
        D=D,
        Xf=dm.Xf,
        D_pinv=D_pinv,
        projector=projector,
        kernel_basis=null_space_basis(D, tol),
        layout=layout,
    )
    sigma0 = dm.Xf @ D_pinv
    return ObserverFamily(
        equation=equation,
        sigma0=sigma0,
        M=dm.Xf @ D_pinv[:, layout.xp],
        G=projector[:, layout.xp],
    )


def data_equation_residual(sigma: np.ndarray, dm: DataMatrices) -> float:
    """Frobenius norm of Xf - Sigma D; accepts a gain matrix or ObserverGains."""

    if isinstance(sigma, ObserverGains):
        sigma = sigma.sigma
    return float(np.linalg.norm(dm.Xf - sigma @ dm.D))


def kernel_inclusion_check(deq: DataEquation, tol: Tolerances = DEFAULT_TOLERANCES) -> KernelInclusion:
    """Ker(D) inside Ker(Xf), measured as ||Xf * kernel_basis||."""

    if deq.kernel_basis.shape[1] == 0:
        return KernelInclusion(holds=True, residual=0.0, max_column_norm=0.0)
    image = deq.Xf @ deq.kernel_basis
    residual = float(np.linalg.norm(image))
    max_column = float(np.max(np.linalg.norm(image, axis=0)))
    return KernelInclusion(holds=residual < tol.residual_tol, residual=residual, max_column_norm=max_column)


def rank_condition_check(dm: DataMatrices, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """rank [lambda Xp - Xf; Up; Yp; Yf] = rank [Xp; Up; Yf] on the candidate set.

    Candidates are the eigenvalues of Xf H_Xp outside 1 - margin plus the
    fixed circle grid; the quantifier over all |lambda| >= 1 is not
    checked elsewhere.
    """

    target = stacked_rank(dm, tol)
    layout = dm.layout
    M = dm.Xf @ pseudoinverse(dm.D, tol)[:, layout.xp]
    eigenvalues = [lam for lam in np.linalg.eigvals(M) if abs(lam) >= tol.schur_bound]
    tail = np.vstack([dm.Up, dm.Yp, dm.Yf])
    for lam in [*eigenvalues, *circle_grid()]:
        if numerical_rank(np.vstack([lam * dm.Xp - dm.Xf, tail]), tol) != target:
            logger.debug("rank condition fails at lambda = %s", lam)
            return False
    return True


def _synthesize(
    dm: DataMatrices,
    tol: Tolerances,
    kind: str,
    checks: dict[str, bool],
    family: ObserverFamily | None = None,
    refusal: str | None = None,
    inclusion: KernelInclusion | None = None,
) -> tuple[ObserverGains | None, SynthesisReport]:
    family = family or solve_family(dm, tol)
    layout = dm.layout
    n, w = layout.states, layout.height
    K1 = np.zeros((n, w))
    reason = refusal

    if refusal is None:
        if is_schur(family.M, tol):
            checks["detectability_of_family_pair"] = True
        else:
            gain = stabilize_output_injection(family.M, family.G, tol)
            checks["detectability_of_family_pair"] = gain is not None
            if gain is None:
                reason = "undetectable_family"
            else:
                logger.info("K1 = 0 is not stabilizing; using the Riccati output injection")
                K1 = gain

    sigma = family.sigma(K1)
    residual = data_equation_residual(sigma, dm)
    radius = spectral_radius(sigma[:, layout.xp])
    if reason is None and residual >= tol.residual_tol:
        reason = "data_equation"
    if reason is None and radius >= tol.schur_bound:
        reason = "not_schur"

    gains = None
    if reason is None:
        gains = ObserverGains.from_sigma(sigma, layout, kind=kind, tol=tol)
    else:
        logger.warning("%s synthesis infeasible: %s", kind, reason)

    report = SynthesisReport(
        feasible=gains is not None,
        kind=kind,
        spectral_radius=radius,
        data_residual=residual,
        K1=K1,
        kernel_inclusion_residual=None if inclusion is None else inclusion.residual,
        checks=checks,
        reason=reason,
        gains=gains,
    )
    return gains, report


def synthesize_observer(
    dm: DataMatrices,
    tol: Tolerances = DEFAULT_TOLERANCES,
    kind: str = "standard",
) -> tuple[ObserverGains | None, SynthesisReport]:
    """Try K1 = 0, then the Riccati output injection on (M, G)."""

    checks = {
        "corollary1": corollary1_test(dm, dm.m, dm.n, tol),
        "rank_condition": rank_condition_check(dm, tol),
    }
    return _synthesize(dm, tol, kind, checks)


def synthesize_uio(
    dm: DataMatrices,
    tol: Tolerances = DEFAULT_TOLERANCES,
    q: int | None = None,
) -> tuple[ObserverGains | None, SynthesisReport]:
    """Unknown-input observer; refuses uninformative data and failed kernel inclusion."""

    q = dm.unknown_inputs if q is None else int(q)
    family = solve_family(dm, tol)
    inclusion = kernel_inclusion_check(family.equation, tol)
    checks = {
        "corollary2": corollary2_test(dm, dm.m, dm.n, q, tol),
        "kernel_inclusion": inclusion.holds,
        "rank_condition": rank_condition_check(dm, tol),
    }
    refusal = None
    if not checks["corollary2"]:
        logger.warning(
            "rank [Xp; Up; Yf] = %d, expected %d: data are not informative for the unknown input",
            stacked_rank(dm, tol),
            dm.n + dm.m + q,
        )
        refusal = "data_informativity"
    elif not inclusion.holds:
        refusal = "kernel_inclusion"
    return _synthesize(dm, tol, "uio", checks, family=family, refusal=refusal, inclusion=inclusion)


def augmented_record(rec: DataRecord) -> DataRecord:
    """Record of the ESO augmentation, with x_tilde(k) = [x(k); d(k)]."""

    if rec.eta_d is None:
        raise MissingDataError("the extended state observer needs disturbance data")
    T = rec.T
    if rec.eta_d.shape[0] < T + 1:
        raise MissingDataError(f"disturbance data need {T + 1} samples, got {rec.eta_d.shape[0]}")
    return DataRecord(
        u_d=rec.u_d,
        x_d=np.hstack([rec.x_d, rec.eta_d[: T + 1]]),
        y_d=rec.y_d,
        meta=dict(rec.meta),
    )


def synthesize_eso(
    lti: LtiSystem | None,
    rec: DataRecord,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[ObserverGains | None, SynthesisReport]:
    """Standard synthesis on augmented state data; the model checks need `lti`.

    d(k+1) enters the augmented data as a free signal, so the rank tests
    written for regular descriptor data are not reported here.
    """

    dm = build_data_matrices(augmented_record(rec))
    family = solve_family(dm, tol)
    inclusion = kernel_inclusion_check(family.equation, tol)
    checks = {"kernel_inclusion": inclusion.holds}
    if lti is not None:
        if lti.n + lti.r != dm.n:
            raise DimensionError(f"record holds {dm.n} augmented states, plant has {lti.n + lti.r}")
        checks["strong_detectability"] = strong_detectability(lti, tol)
        checks["augmented_dual_normalizability"] = dual_normalizability(augment_for_eso(lti), tol)
    return _synthesize(dm, tol, "eso", checks, family=family, inclusion=inclusion)


__all__ = [
    "DataEquation",
    "KernelInclusion",
    "OBSERVER_KINDS",
    "ObserverFamily",
    "ObserverGains",
    "SynthesisReport",
    "augmented_record",
    "data_equation_residual",
    "kernel_inclusion_check",
    "load_gains",
    "rank_condition_check",
    "save_gains",
    "save_report",
    "solve_family",
    "synthesize_eso",
    "synthesize_observer",
    "synthesize_uio",
]
