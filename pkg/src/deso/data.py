"""Experiment records, stacked data matrices and data-side assumption tests."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from pathlib import Path
import re
from typing import Any, Mapping

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from deso import config
from deso.artifacts import read_json, write_json
from deso.descriptor import (
    DescriptorSystem,
    LtiSystem,
    WeierstrassForm,
    simulate,
    simulate_lti,
    weierstrass,
)
from deso.errors import ConfigError, DimensionError, MissingDataError, SequenceLengthError
from deso.generation import normalize_interval
from deso.layout import StackLayout
from deso.linalg import DEFAULT_TOLERANCES, Tolerances, numerical_rank

logger = logging.getLogger(__name__)

SIGNAL_LAWS = ("uniform", "sinusoid", "zero")


@dataclass(frozen=True)
class SignalLaw:
    """Recipe for an input, disturbance or initial-state draw."""

    law: str = "uniform"
    low: float = config.DEFAULT_INPUT_LOW
    high: float = config.DEFAULT_INPUT_HIGH
    amplitude: float = config.DEFAULT_SINUSOID_AMPLITUDE
    frequency: float = 1.0
    phase: float = 0.0

    def __post_init__(self) -> None:
        if self.law not in SIGNAL_LAWS:
            raise ConfigError(f"unknown signal law {self.law!r}; expected one of {SIGNAL_LAWS}")
        try:
            normalize_interval(self.low, self.high, f"{self.law} law")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for name in ("amplitude", "frequency", "phase"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    @classmethod
    def uniform(cls, low: float, high: float) -> SignalLaw:
        return cls("uniform", low=low, high=high)

    @classmethod
    def sinusoid(cls, amplitude: float, frequency: float = 1.0, phase: float = 0.0) -> SignalLaw:
        return cls("sinusoid", amplitude=amplitude, frequency=frequency, phase=phase)

    @classmethod
    def zero(cls) -> SignalLaw:
        return cls("zero")

    @classmethod
    def from_dict(cls, document: Mapping[str, Any]) -> SignalLaw:
        if not isinstance(document, Mapping):
            raise ConfigError(f"signal law must be an object, got {document!r}")
        law = document.get("law", "uniform")
        allowed = {"law", "low", "high", "amplitude", "frequency", "phase"}
        unknown = sorted(set(document) - allowed)
        if unknown:
            raise ConfigError(f"unknown keys in {law} law: {', '.join(unknown)}")
        try:
            values = {key: float(value) for key, value in document.items() if key != "law"}
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{law} law parameters must be numbers") from exc
        return cls(law=law, **values)

    def to_dict(self) -> dict[str, Any]:
        if self.law == "uniform":
            return {"law": "uniform", "low": self.low, "high": self.high}
        if self.law == "sinusoid":
            return {
                "law": "sinusoid",
                "amplitude": self.amplitude,
                "frequency": self.frequency,
                "phase": self.phase,
            }
        return {"law": "zero"}

    def sample(self, rng: np.random.Generator, length: int, dim: int) -> np.ndarray:
        """Array of shape (length, dim)."""

        if self.law == "uniform":
            return rng.uniform(self.low, self.high, size=(length, dim))
        if self.law == "sinusoid":
            k = np.arange(length, dtype=float)
            wave = self.amplitude * np.sin(self.frequency * k + self.phase)
            return np.repeat(wave[:, None], dim, axis=1)
        return np.zeros((length, dim))


@dataclass(frozen=True, eq=False)
class DataRecord:
    """One recorded experiment; row k of each array is the sample at time k."""

    u_d: np.ndarray
    x_d: np.ndarray
    y_d: np.ndarray
    eta_d: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("u_d", "x_d", "y_d", "eta_d"):
            value = getattr(self, name)
            if value is None:
                continue
            array = np.asarray(value, dtype=float)
            if array.ndim != 2:
                raise DimensionError(f"{name} must be 2-D (time, channel), got {array.shape}")
            object.__setattr__(self, name, array)
        T = self.T
        if T < 1:
            raise SequenceLengthError("a record needs at least two state samples")
        if self.y_d.shape[0] != T + 1:
            raise SequenceLengthError(f"y_d must have {T + 1} samples, got {self.y_d.shape[0]}")
        if self.u_d.shape[0] < T:
            raise SequenceLengthError(f"u_d must have at least {T} samples, got {self.u_d.shape[0]}")
        if self.eta_d is not None and self.eta_d.shape[0] < T:
            raise SequenceLengthError(f"eta_d must have at least {T} samples")

    @property
    def T(self) -> int:
        return self.x_d.shape[0] - 1

    @property
    def n(self) -> int:
        return self.x_d.shape[1]

    @property
    def m(self) -> int:
        return self.u_d.shape[1]

    @property
    def p(self) -> int:
        return self.y_d.shape[1]

    @property
    def q(self) -> int:
        return 0 if self.eta_d is None else self.eta_d.shape[1]


@dataclass(frozen=True, eq=False)
class DataMatrices:
    """Xp, Xf, Up, Yp, Yf with one column per time step."""

    Xp: np.ndarray
    Xf: np.ndarray
    Up: np.ndarray
    Yp: np.ndarray
    Yf: np.ndarray
    unknown_inputs: int = 0

    def __post_init__(self) -> None:
        T = self.Xp.shape[1]
        for name in ("Xf", "Up", "Yp", "Yf"):
            if getattr(self, name).shape[1] != T:
                raise DimensionError(f"{name} must have {T} columns")
        if self.Xf.shape[0] != self.Xp.shape[0] or self.Yf.shape[0] != self.Yp.shape[0]:
            raise DimensionError("past and future blocks must have matching heights")

    @property
    def T(self) -> int:
        return self.Xp.shape[1]

    @property
    def n(self) -> int:
        return self.Xp.shape[0]

    @property
    def m(self) -> int:
        return self.Up.shape[0]

    @property
    def p(self) -> int:
        return self.Yp.shape[0]

    @property
    def layout(self) -> StackLayout:
        return StackLayout(self.n, self.m, self.p)

    @property
    def D(self) -> np.ndarray:
        """[Xp; Up; Yp; Yf]."""

        return self.layout.stack(self.Xp, self.Up, self.Yp, self.Yf)

    @property
    def tuples(self) -> np.ndarray:
        """[Xp; Xf; Up; Yp; Yf], one system tuple per column."""

        return np.vstack([self.Xp, self.Xf, self.Up, self.Yp, self.Yf])


def hankel(f: ArrayLike, L: int) -> np.ndarray:
    """Block-Hankel matrix of depth L with T0 - L + 1 columns."""

    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    T0 = f.shape[0]
    if L < 1 or T0 < L:
        raise SequenceLengthError(f"depth {L} needs 1 <= L <= {T0}")
    columns = T0 - L + 1
    return np.vstack([f[i : i + columns].T for i in range(L)])


def build_data_matrices(rec: DataRecord) -> DataMatrices:
    T = rec.T
    return DataMatrices(
        Xp=rec.x_d[:T].T,
        Xf=rec.x_d[1 : T + 1].T,
        Up=rec.u_d[:T].T,
        Yp=rec.y_d[:T].T,
        Yf=rec.y_d[1 : T + 1].T,
        unknown_inputs=rec.q,
    )


def pe_assumption_check(
    rec: DataRecord,
    wf: WeierstrassForm,
    tol: Tolerances = DEFAULT_TOLERANCES,
    uio: bool = False,
) -> bool:
    """Full row rank of [H1(z1_d); H_{s+1}(u_d)], or of the [u; eta] variant."""

    T, s = rec.T, wf.s
    inputs = rec.u_d
    if uio:
        if rec.eta_d is None:
            raise MissingDataError("the unknown-input variant needs eta_d")
        inputs = np.hstack([rec.u_d[: rec.eta_d.shape[0]], rec.eta_d[: rec.u_d.shape[0]]])
    if inputs.shape[0] < T + s:
        raise SequenceLengthError(f"inputs need {T + s} samples, got {inputs.shape[0]}")

    z1 = wf.slow_states(rec.x_d[:T])
    stacked = np.vstack([z1.T, hankel(inputs[: T + s], s + 1)])
    return numerical_rank(stacked, tol) == stacked.shape[0]


def input_pe_order(u: ArrayLike, L: int, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    block = hankel(u, L)
    return numerical_rank(block, tol) == block.shape[0]


def stacked_rank(dm: DataMatrices, tol: Tolerances = DEFAULT_TOLERANCES) -> int:
    """rank [Xp; Up; Yf]."""

    return numerical_rank(np.vstack([dm.Xp, dm.Up, dm.Yf]), tol)


def corollary1_test(dm: DataMatrices, m: int, n: int, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    return stacked_rank(dm, tol) == n + m


def corollary2_test(
    dm: DataMatrices,
    m: int,
    n: int,
    q: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> bool:
    if q == 0:
        return corollary1_test(dm, m, n, tol)
    return stacked_rank(dm, tol) == n + m + q


def collect_record(
    sys: DescriptorSystem,
    T: int,
    rng: np.random.Generator,
    input_law: SignalLaw,
    unknown_law: SignalLaw | None = None,
    initial_law: SignalLaw | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    wf: WeierstrassForm | None = None,
) -> DataRecord:
    """Simulate one historical experiment with an input horizon padded by n."""

    if T < 1:
        raise ConfigError("T must be at least 1")
    wf = weierstrass(sys, tol) if wf is None else wf
    initial_law = initial_law or SignalLaw.uniform(config.Z1_INIT_LOW, config.Z1_INIT_HIGH)
    length = T + sys.n

    u = input_law.sample(rng, length, sys.m)
    eta = None
    if sys.F is not None:
        if unknown_law is None:
            logger.warning("no unknown-input law given; recording eta = 0")
            unknown_law = SignalLaw.zero()
        eta = unknown_law.sample(rng, length, sys.q)
    z1_init = initial_law.sample(rng, 1, wf.n1)[0]

    trajectory = simulate(sys, wf, z1_init, u, eta, steps=T)
    return DataRecord(
        u_d=u,
        x_d=trajectory.x,
        y_d=trajectory.y,
        eta_d=eta,
        meta={"T": T, "generator": "descriptor"},
    )


def collect_lti_record(
    lti: LtiSystem,
    T: int,
    rng: np.random.Generator,
    input_law: SignalLaw,
    disturbance_law: SignalLaw,
    initial_law: SignalLaw | None = None,
) -> DataRecord:
    """Record an LTI experiment; the disturbance is kept as eta_d."""

    if T < 1:
        raise ConfigError("T must be at least 1")
    initial_law = initial_law or SignalLaw.uniform(config.Z1_INIT_LOW, config.Z1_INIT_HIGH)
    length = T + lti.n + lti.r
    u = input_law.sample(rng, length, lti.m)
    d = disturbance_law.sample(rng, length, lti.r)
    x0 = initial_law.sample(rng, 1, lti.n)[0]
    trajectory = simulate_lti(lti, x0, u, d, steps=T)
    return DataRecord(
        u_d=u,
        x_d=trajectory.x,
        y_d=trajectory.y,
        eta_d=d,
        meta={"T": T, "generator": "lti"},
    )


_COLUMN = re.compile(r"^(u|eta|y|x)_(\d+)$")


def write_dataset(rec: DataRecord, path: str | Path) -> Path:
    """One row per time step; y and x cells stay empty after k = T."""

    rows = max(rec.u_d.shape[0], rec.T + 1, 0 if rec.eta_d is None else rec.eta_d.shape[0])
    frame = pd.DataFrame({"k": np.arange(rows)})

    def add(prefix: str, values: np.ndarray) -> None:
        padded = np.full((rows, values.shape[1]), np.nan)
        padded[: values.shape[0]] = values
        for index in range(values.shape[1]):
            frame[f"{prefix}_{index}"] = padded[:, index]

    add("u", rec.u_d)
    if rec.eta_d is not None:
        add("eta", rec.eta_d)
    add("y", rec.y_d)
    add("x", rec.x_d)

    path = Path(path)
    frame.to_csv(path, index=False, float_format=config.CSV_FLOAT_FORMAT)
    logger.debug("wrote %s", path)
    return path


def read_dataset(path: str | Path, meta: Mapping[str, Any] | None = None) -> DataRecord:
    frame = pd.read_csv(path, float_precision="round_trip")
    if "k" not in frame.columns:
        raise MissingDataError(f"{path} has no k column")
    groups: dict[str, list[tuple[int, str]]] = {"u": [], "eta": [], "y": [], "x": []}
    for column in frame.columns:
        match = _COLUMN.match(str(column))
        if match:
            groups[match.group(1)].append((int(match.group(2)), column))
    for prefix in ("u", "y", "x"):
        if not groups[prefix]:
            raise MissingDataError(f"{path} has no {prefix}_* columns")

    def block(prefix: str) -> np.ndarray:
        columns = [name for _, name in sorted(groups[prefix])]
        return frame[columns].to_numpy(dtype=float)

    x = block("x")
    present = ~np.isnan(x).any(axis=1)
    T = int(np.flatnonzero(present)[-1]) if present.any() else -1
    if T < 1 or not present[: T + 1].all():
        raise MissingDataError(f"{path} needs contiguous state rows from k = 0")

    def trimmed(values: np.ndarray, label: str) -> np.ndarray:
        filled = ~np.isnan(values).any(axis=1)
        count = int(np.argmin(filled)) if not filled.all() else values.shape[0]
        if np.any(filled[count:]):
            raise MissingDataError(f"{label} samples in {path} are not contiguous")
        return values[:count]

    return DataRecord(
        u_d=trimmed(block("u"), "u"),
        x_d=x[: T + 1],
        y_d=block("y")[: T + 1],
        eta_d=trimmed(block("eta"), "eta") if groups["eta"] else None,
        meta=dict(meta or {}),
    )


def write_meta(path: str | Path, document: Mapping[str, Any]) -> Path:
    return write_json(path, dict(document))


def read_meta(path: str | Path) -> dict[str, Any]:
    return read_json(path)


__all__ = [
    "DataMatrices",
    "DataRecord",
    "SignalLaw",
    "build_data_matrices",
    "collect_lti_record",
    "collect_record",
    "corollary1_test",
    "corollary2_test",
    "hankel",
    "input_pe_order",
    "pe_assumption_check",
    "read_dataset",
    "read_meta",
    "stacked_rank",
    "write_dataset",
    "write_meta",
]
