"""Model-based oracles for the data-driven results."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Any

import numpy as np

from deso import config
from deso.data import (
    DataMatrices,
    DataRecord,
    SignalLaw,
    build_data_matrices,
    collect_record,
    hankel,
    pe_assumption_check,
)
from deso.descriptor import (
    DescriptorSystem,
    WeierstrassForm,
    dual_normalizability,
    matching_condition,
    pbh_detectable,
    simulate,
    uio_detectable,
    weierstrass,
)
from deso.errors import ConfigError, InvalidInputError, MissingDataError
from deso.generation import PlantBounds, random_descriptor_system, random_uio_system
from deso.layout import split_state
from deso.linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    numerical_rank,
    pseudoinverse,
    stabilize_output_injection,
)
from deso.runtime import Stopwatch, map_trials
from deso.synthesis import ObserverGains, data_equation_residual, synthesize_observer, synthesize_uio

logger = logging.getLogger(__name__)

MONTECARLO_MODES = ("theorem2", "theorem4")
MODE_ALIASES = {"standard": "theorem2", "uio": "theorem4"}


@dataclass(frozen=True, eq=False)
class ModelBaseline:
    """T E + N C = I, with T F = 0 as well for the unknown-input variant."""

    T_mat: np.ndarray
    N_mat: np.ndarray
    uio: bool = False


def solve_tn(
    sys: DescriptorSystem,
    uio: bool = False,
    tol: Tolerances = DEFAULT_TOLERANCES,
    rng: np.random.Generator | None = None,
) -> ModelBaseline | None:
    """[T N] with T invertible; None when the stacked matrix lacks full column rank.

    The minimum-norm solution is kept when its T is invertible. Otherwise
    T is redrawn from X0 + Y (I - S S^+) with random Y.
    """

    n = sys.n
    if not uio:
        if not dual_normalizability(sys, tol):
            return None
        stacked = np.vstack([sys.E, sys.C])
        inverse = pseudoinverse(stacked, tol)
    else:
        if sys.F is None:
            raise MissingDataError("the unknown-input baseline needs F")
        if not matching_condition(sys, tol):
            return None
        stacked = np.block([[sys.E, sys.F], [sys.C, np.zeros((sys.p, sys.q))]])
        inverse = pseudoinverse(stacked, tol)
    solution = inverse[:n]
    if numerical_rank(split_state(solution, n)[0], tol) < n:
        rng = rng or np.random.default_rng(config.PENCIL_PROBE_SEED)
        free = np.eye(stacked.shape[0]) - stacked @ inverse
        for _ in range(config.TN_MAX_DRAWS):
            candidate = solution + rng.standard_normal((n, stacked.shape[0])) @ free
            if numerical_rank(split_state(candidate, n)[0], tol) == n:
                solution = candidate
                break
        else:
            logger.warning("no invertible T after %d draws; keeping the minimum-norm one", config.TN_MAX_DRAWS)
    T_mat, N_mat = split_state(solution, n)
    return ModelBaseline(T_mat=T_mat, N_mat=N_mat, uio=uio)


def model_observer(
    sys: DescriptorSystem,
    base: ModelBaseline,
    tol: Tolerances = DEFAULT_TOLERANCES,
    dm: DataMatrices | None = None,
) -> ObserverGains | None:
    """A_O = T A - L C with L from the Riccati injection on (T A, C).

    When dm is given the gains must also satisfy Xf = Sigma D on it.
    """

    TA = base.T_mat @ sys.A
    K = stabilize_output_injection(TA, sys.C, tol)
    if K is None:
        return None
    L = -K
    gains = ObserverGains(
        A_O=TA - L @ sys.C,
        B_O_u=base.T_mat @ sys.B,
        B_O_y=L,
        N_O=base.N_mat,
        kind="uio" if base.uio else "standard",
        tol=tol,
    )
    if dm is not None:
        residual = data_equation_residual(gains, dm)
        scale = max(1.0, float(np.linalg.norm(gains.sigma)))
        if residual >= tol.residual_tol * scale:
            raise InvalidInputError(f"data do not fit the model observer: residual {residual:.3g}")
    return gains


@dataclass(frozen=True, eq=False)
class Lemma1Map:
    """Maps [z1(k); w(k); ...; w(k+s)] to [x(k); x(k+1); u(k); y(k); y(k+1)].

    w is u, or [u; eta] for the unknown-input variant.
    """

    matrix: np.ndarray
    n1: int
    width: int
    s: int

    @property
    def latent_dim(self) -> int:
        return self.n1 + self.width * (self.s + 1)

    def latent_data(self, wf: WeierstrassForm, rec: DataRecord) -> np.ndarray:
        T, s = rec.T, self.s
        inputs = rec.u_d
        if self.width > rec.m:
            if rec.eta_d is None:
                raise MissingDataError("the unknown-input map needs eta_d")
            length = min(rec.u_d.shape[0], rec.eta_d.shape[0])
            inputs = np.hstack([rec.u_d[:length], rec.eta_d[:length]])
        return np.vstack([wf.slow_states(rec.x_d[:T]).T, hankel(inputs[: T + s], s + 1)])


def lemma1_map(sys: DescriptorSystem, wf: WeierstrassForm, uio: bool = False) -> Lemma1Map:
    slow_input, fast_input = wf.input_blocks(include_unknown=uio)
    width = slow_input.shape[1]
    n, m, s = sys.n, sys.m, wf.s
    fast_terms = [-wf.P2 @ power @ fast_input for power in wf.fast_powers()]
    zero = np.zeros((n, width))

    x_now = np.hstack([wf.P1, *fast_terms, zero])
    x_next = np.hstack([wf.P1 @ wf.A1, wf.P1 @ slow_input, *fast_terms])
    select_u = np.zeros((m, wf.n1 + width * (s + 1)))
    select_u[:, wf.n1 : wf.n1 + m] = np.eye(m)

    matrix = np.vstack([x_now, x_next, select_u, sys.C @ x_now, sys.C @ x_next])
    return Lemma1Map(matrix=matrix, n1=wf.n1, width=width, s=s)


def _tuple_residual(sys: DescriptorSystem, column: np.ndarray) -> float:
    n, m, p = sys.n, sys.m, sys.p
    x, x_next = column[:n], column[n : 2 * n]
    u = column[2 * n : 2 * n + m]
    y, y_next = column[2 * n + m : 2 * n + m + p], column[2 * n + m + p :]
    dynamics = sys.E @ x_next - sys.A @ x - sys.B @ u
    if sys.F is not None:
        eta, *_ = np.linalg.lstsq(sys.F, dynamics, rcond=None)
        dynamics = dynamics - sys.F @ eta
    return float(
        np.linalg.norm(dynamics) + np.linalg.norm(y - sys.C @ x) + np.linalg.norm(y_next - sys.C @ x_next)
    )


def lemma1_oracle(
    sys: DescriptorSystem,
    rec: DataRecord,
    trials: int = config.LEMMA1_TRIALS,
    tol: Tolerances = DEFAULT_TOLERANCES,
    rng: np.random.Generator | None = None,
    wf: WeierstrassForm | None = None,
) -> bool:
    """Two-way trajectory equivalence between the plant and the data span.

    Random combinations of recorded tuples must satisfy the plant
    equations, fresh simulated tuples must lie in the span of the recorded
    ones, and the latent data must reproduce the record.
    """

    rng = rng or np.random.default_rng(config.PENCIL_PROBE_SEED)
    wf = weierstrass(sys, tol) if wf is None else wf
    uio = sys.F is not None and rec.eta_d is not None
    stack = build_data_matrices(rec).tuples

    combined_ok = 0
    for _ in range(trials):
        g = rng.standard_normal(stack.shape[1])
        if _tuple_residual(sys, stack @ (g / np.linalg.norm(g))) < tol.residual_tol:
            combined_ok += 1

    projector = stack @ pseudoinverse(stack, tol)
    projected_ok = 0
    for _ in range(trials):
        z1 = rng.standard_normal(wf.n1)
        u = rng.standard_normal((wf.s + 1, sys.m))
        eta = rng.standard_normal((wf.s + 1, sys.q)) if sys.F is not None else None
        fresh = simulate(sys, wf, z1, u, eta, steps=1)
        column = np.concatenate([fresh.x[0], fresh.x[1], u[0], fresh.y[0], fresh.y[1]])
        column /= np.linalg.norm(column)
        if np.linalg.norm(column - projector @ column) < tol.residual_tol:
            projected_ok += 1

    block_map = lemma1_map(sys, wf, uio=uio)
    reconstruction = float(np.linalg.norm(block_map.matrix @ block_map.latent_data(wf, rec) - stack))
    scale = max(1.0, float(np.linalg.norm(stack)))
    reconstructed = reconstruction < tol.residual_tol * scale

    logger.info(
        "trajectory equivalence: %d/%d combinations, %d/%d projections, reconstruction %.3g",
        combined_ok,
        trials,
        projected_ok,
        trials,
        reconstruction,
    )
    return combined_ok == trials and projected_ok == trials and reconstructed


@dataclass
class MonteCarloSummary:
    mode: str
    trials: int
    pe_passed: int = 0
    agreements: int = 0
    disagreements: int = 0
    seconds: float = 0.0
    cases: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "trials": self.trials,
            "pe_passed": self.pe_passed,
            "agreements": self.agreements,
            "disagreements": self.disagreements,
            "cases": self.cases,
        }


def _trial_length(wf: WeierstrassForm, width: int) -> int:
    return 2 * (wf.n1 + width * (wf.s + 1)) + 4


def _run_trial(job: tuple[str, int, np.random.SeedSequence, PlantBounds, Tolerances]) -> dict[str, Any]:
    mode, index, seed, bounds, tol = job
    rng = np.random.default_rng(seed)
    input_law = SignalLaw.uniform(config.DEFAULT_INPUT_LOW, config.DEFAULT_INPUT_HIGH)

    if mode == "theorem2":
        plant = random_descriptor_system(rng, bounds, detectable=bool(rng.random() < 0.5))
        sys = plant.system
        model = pbh_detectable(sys, tol)
        wf = weierstrass(sys, tol)
        T = _trial_length(wf, sys.m)
        rec = collect_record(sys, T, rng, input_law, tol=tol, wf=wf)
        pe = pe_assumption_check(rec, wf, tol)
        _, report = synthesize_observer(build_data_matrices(rec), tol)
        rank_verdict = report.checks["rank_condition"]
    else:
        matching, detectable = [(True, True), (True, False), (False, True)][int(rng.integers(0, 3))]
        plant = random_uio_system(rng, bounds, detectable=detectable, matching=matching)
        sys = plant.system
        model = matching_condition(sys, tol) and uio_detectable(sys, tol)
        wf = weierstrass(sys, tol)
        T = _trial_length(wf, sys.m + sys.q)
        rec = collect_record(sys, T, rng, input_law, unknown_law=input_law, tol=tol, wf=wf)
        pe = pe_assumption_check(rec, wf, tol, uio=True)
        _, report = synthesize_uio(build_data_matrices(rec), tol)
        rank_verdict = report.checks["rank_condition"] and report.checks["corollary2"]

    agree = report.feasible == model and rank_verdict == model
    return {
        "trial": index,
        "n": sys.n,
        "n1": wf.n1,
        "m": sys.m,
        "p": sys.p,
        "q": sys.q,
        "T": T,
        "built_detectable": plant.detectable,
        "built_matching": plant.matching,
        "pe_passed": bool(pe),
        "model": bool(model),
        "synthesis": bool(report.feasible),
        "rank_condition": bool(rank_verdict),
        "spectral_radius": float(report.spectral_radius),
        "agree": bool(agree),
    }


def montecarlo_equivalence(
    mode: str,
    trials: int,
    bounds: PlantBounds = PlantBounds(),
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = config.MC_DEFAULT_SEED,
    workers: int = config.MC_WORKERS,
) -> MonteCarloSummary:
    """Compare data-side and model-side verdicts over random plants."""

    mode = MODE_ALIASES.get(mode, mode)
    if mode not in MONTECARLO_MODES:
        raise ConfigError(f"unknown Monte-Carlo mode {mode!r}")
    if trials < 1:
        raise ConfigError("trials must be at least 1")

    clock = Stopwatch()
    seeds = np.random.SeedSequence(seed).spawn(trials)
    jobs = [(mode, index, child, bounds, tol) for index, child in enumerate(seeds)]
    cases = map_trials(_run_trial, jobs, workers)

    summary = MonteCarloSummary(mode=mode, trials=trials, cases=cases)
    for case in cases:
        if not case["pe_passed"]:
            continue
        summary.pe_passed += 1
        if case["agree"]:
            summary.agreements += 1
        else:
            summary.disagreements += 1
            logger.warning("trial %d disagrees: %s", case["trial"], case)
    summary.seconds = clock.elapsed
    logger.info(
        "%s: %d trials, %d PE-valid, %d agreements, %d disagreements (%.1f s)",
        mode,
        trials,
        summary.pe_passed,
        summary.agreements,
        summary.disagreements,
        summary.seconds,
    )
    return summary


__all__ = [
    "Lemma1Map",
    "MODE_ALIASES",
    "MONTECARLO_MODES",
    "ModelBaseline",
    "MonteCarloSummary",
    "lemma1_map",
    "lemma1_oracle",
    "model_observer",
    "montecarlo_equivalence",
    "solve_tn",
]
