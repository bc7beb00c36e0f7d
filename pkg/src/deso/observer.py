"""Running synthesized observers on recorded or streamed signals."""

from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from deso import config
from deso.errors import DimensionError, InvalidInputError, SequenceLengthError
from deso.synthesis import ObserverGains

logger = logging.getLogger(__name__)

DRIVERS = ("noncausal", "causal")


def step_noncausal(
    g: ObserverGains,
    xhat: np.ndarray,
    u: np.ndarray,
    y: np.ndarray,
    y_next: np.ndarray,
) -> np.ndarray:
    return g.A_O @ xhat + g.B_O_u @ u + g.B_O_y @ y + g.N_O @ y_next


def step_causal(
    g: ObserverGains,
    zeta: np.ndarray,
    u: np.ndarray,
    y: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Return (zeta(k+1), x_hat(k)) without looking at y(k+1)."""

    xhat = zeta + g.N_O @ y
    zeta_next = g.A_O @ zeta + g.B_O_u @ u + (g.B_O_y + g.A_O @ g.N_O) @ y
    return zeta_next, xhat


@dataclass
class ObserverState:
    xhat: np.ndarray
    zeta: np.ndarray
    k: int


class ObserverStepper:
    """Pull-based causal observer; one instance per signal stream."""

    def __init__(self, gains: ObserverGains):
        self.gains = gains
        self.state: ObserverState | None = None
        self._y = None

    def reset(self, xhat0: ArrayLike, y0: ArrayLike) -> ObserverState:
        xhat0 = np.asarray(xhat0, dtype=float).reshape(self.gains.n)
        y0 = np.asarray(y0, dtype=float).reshape(self.gains.p)
        self._y = y0
        self.state = ObserverState(xhat=xhat0, zeta=xhat0 - self.gains.N_O @ y0, k=0)
        return self.state

    def push(self, u: ArrayLike, y_next: ArrayLike) -> np.ndarray:
        """Advance with u(k) and y(k+1); returns x_hat(k+1)."""

        if self.state is None:
            raise RuntimeError("call reset() before push()")
        u = np.asarray(u, dtype=float).reshape(self.gains.m)
        y_next = np.asarray(y_next, dtype=float).reshape(self.gains.p)
        zeta_next, _ = step_causal(self.gains, self.state.zeta, u, self._y)
        xhat_next = zeta_next + self.gains.N_O @ y_next
        self._y = y_next
        self.state = ObserverState(xhat=xhat_next, zeta=zeta_next, k=self.state.k + 1)
        return xhat_next


@dataclass(frozen=True, eq=False)
class EstimationRun:
    xhat_traj: np.ndarray
    x_truth: np.ndarray | None = None
    err_traj: np.ndarray | None = None
    residual_steps: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return self.xhat_traj.shape[0] - 1

    @property
    def recursion_residual(self) -> float | None:
        if self.residual_steps is None:
            return None
        if self.residual_steps.size == 0:
            return 0.0
        return float(np.max(self.residual_steps))

    def errors(self) -> np.ndarray | None:
        """Per-coordinate errors x(k) - x_hat(k)."""

        if self.x_truth is None:
            return None
        return self.x_truth - self.xhat_traj


def _signal(values: ArrayLike, width: int, label: str) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim == 1 and width == 1:
        array = array[:, None]
    if array.ndim != 2 or array.shape[1] != width:
        raise DimensionError(f"{label} must have shape (length, {width}), got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{label} has non-finite entries")
    return array


def run(
    g: ObserverGains,
    u: ArrayLike,
    y: ArrayLike,
    xhat0: ArrayLike,
    x_truth: ArrayLike | None = None,
    driver: str = "noncausal",
) -> EstimationRun:
    """Estimate x(0..L) with L = len(y) - 1 using u(0..L-1)."""

    if driver not in DRIVERS:
        raise InvalidInputError(f"unknown driver {driver!r}; expected one of {DRIVERS}")
    u = _signal(u, g.m, "u")
    y = _signal(y, g.p, "y")
    L = y.shape[0] - 1
    if L < 0 or u.shape[0] < L:
        raise SequenceLengthError(f"{L} steps need {L} inputs, got {u.shape[0]}")

    xhat = np.empty((L + 1, g.n))
    xhat[0] = np.asarray(xhat0, dtype=float).reshape(g.n)
    if driver == "noncausal":
        for k in range(L):
            xhat[k + 1] = step_noncausal(g, xhat[k], u[k], y[k], y[k + 1])
    else:
        zeta = xhat[0] - g.N_O @ y[0]
        for k in range(L + 1):
            zeta_next, xhat[k] = step_causal(g, zeta, u[k] if k < L else np.zeros(g.m), y[k])
            zeta = zeta_next

    if x_truth is None:
        return EstimationRun(xhat_traj=xhat)

    truth = _signal(x_truth, g.n, "x_truth")[: L + 1]
    if truth.shape[0] != L + 1:
        raise SequenceLengthError(f"x_truth needs {L + 1} samples, got {truth.shape[0]}")
    errors = truth - xhat
    residual_steps = np.linalg.norm(errors[1:] - errors[:-1] @ g.A_O.T, axis=1)
    return EstimationRun(
        xhat_traj=xhat,
        x_truth=truth,
        err_traj=np.linalg.norm(errors, axis=1),
        residual_steps=residual_steps,
    )


def write_run(estimation: EstimationRun, path: str | Path) -> Path:
    """k, x_*, xhat_*, err_norm, recursion_residual_step (empty on the last row)."""

    steps = estimation.steps
    frame = pd.DataFrame({"k": np.arange(steps + 1)})
    if estimation.x_truth is not None:
        for index in range(estimation.x_truth.shape[1]):
            frame[f"x_{index}"] = estimation.x_truth[:, index]
    for index in range(estimation.xhat_traj.shape[1]):
        frame[f"xhat_{index}"] = estimation.xhat_traj[:, index]
    if estimation.err_traj is not None:
        frame["err_norm"] = estimation.err_traj
        frame["recursion_residual_step"] = np.append(estimation.residual_steps, np.nan)
    path = Path(path)
    frame.to_csv(path, index=False, float_format=config.CSV_FLOAT_FORMAT)
    logger.debug("wrote %s", path)
    return path


__all__ = [
    "DRIVERS",
    "EstimationRun",
    "ObserverState",
    "ObserverStepper",
    "run",
    "step_causal",
    "step_noncausal",
    "write_run",
]
