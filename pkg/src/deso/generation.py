"""Random descriptor and LTI plants with known structural properties.

Plants are assembled in Weierstrass coordinates (slow part diagonal or
block-diagonal, fast part with R = 0) and then scrambled by random
well-conditioned S and P, so detectability and the matching condition
are known by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from deso import config
from deso.descriptor import DescriptorSystem, LtiSystem


def normalize_range_config(min_value, max_value, label):
    """Validate and normalize an integer [min, max] range."""

    min_value = int(min_value)
    max_value = int(max_value)
    if min_value < 0 or max_value < 0:
        raise ValueError(f"{label} cannot be negative")
    if max_value < min_value:
        raise ValueError(f"{label} has min ({min_value}) greater than max ({max_value})")
    return min_value, max_value


def normalize_interval(low, high, label):
    """Validate a real interval [low, high)."""

    low = float(low)
    high = float(high)
    if not (np.isfinite(low) and np.isfinite(high)):
        raise ValueError(f"{label} bounds must be finite")
    if high < low:
        raise ValueError(f"{label} has low ({low}) greater than high ({high})")
    return low, high


@dataclass(frozen=True)
class PlantBounds:
    """Size and spectrum limits for random plants."""

    min_states: int = config.MC_MIN_STATES
    max_states: int = config.MC_MAX_STATES
    min_inputs: int = config.MC_MIN_INPUTS
    max_inputs: int = config.MC_MAX_INPUTS
    unknown_inputs: int = config.MC_UNKNOWN_INPUTS
    stable_radius: float = config.MC_STABLE_RADIUS
    unstable_low: float = config.MC_UNSTABLE_RADIUS_LOW
    unstable_high: float = config.MC_UNSTABLE_RADIUS_HIGH

    def __post_init__(self) -> None:
        low, _ = normalize_range_config(self.min_states, self.max_states, "states")
        if low < 2:
            raise ValueError("random plants need at least two states")
        low, _ = normalize_range_config(self.min_inputs, self.max_inputs, "inputs")
        if low < 1:
            raise ValueError("random plants need at least one input")
        if int(self.unknown_inputs) < 1:
            raise ValueError("unknown inputs must be at least one")
        normalize_interval(self.unstable_low, self.unstable_high, "unstable radius")
        if not 0.0 < self.stable_radius < 1.0 < self.unstable_low:
            raise ValueError("radii must leave a band around the unit circle")

    def to_dict(self) -> dict[str, float]:
        return {
            "min_states": self.min_states,
            "max_states": self.max_states,
            "min_inputs": self.min_inputs,
            "max_inputs": self.max_inputs,
            "unknown_inputs": self.unknown_inputs,
            "stable_radius": self.stable_radius,
            "unstable_low": self.unstable_low,
            "unstable_high": self.unstable_high,
        }


@dataclass(frozen=True, eq=False)
class GeneratedPlant:
    """A random plant plus the properties it was built to have."""

    system: DescriptorSystem
    n1: int
    detectable: bool
    matching: bool | None = None


def random_invertible(rng: np.random.Generator, size: int) -> np.ndarray:
    """Orthogonal factor times a diagonal scaling in [0.5, 1.5)."""

    orthogonal, _ = np.linalg.qr(rng.standard_normal((size, size)))
    scales = rng.uniform(config.MC_SCALE_LOW, config.MC_SCALE_HIGH, size=size)
    return orthogonal @ np.diag(scales)


def _spread_values(rng: np.random.Generator, count: int, low: float, high: float) -> np.ndarray:
    for _ in range(200):
        values = rng.uniform(low, high, size=count)
        if count < 2 or np.min(np.diff(np.sort(values))) >= config.MC_EIGENVALUE_GAP:
            return values
    return np.linspace(low, high, count)


def _modal_block(rng: np.random.Generator, stable_count: int, radius: float) -> list[np.ndarray]:
    """Stable real modes, with one rotation block when there is room for it."""

    blocks = []
    if stable_count >= 2 and rng.random() < 0.5:
        modulus = rng.uniform(0.2, radius)
        angle = rng.uniform(0.3, np.pi - 0.3)
        re, im = modulus * np.cos(angle), modulus * np.sin(angle)
        blocks.append(np.array([[re, im], [-im, re]]))
        stable_count -= 2
    for value in _spread_values(rng, stable_count, -radius, radius):
        blocks.append(np.array([[value]]))
    return blocks


def _slow_subsystem(
    rng: np.random.Generator,
    n1: int,
    outputs: int,
    bounds: PlantBounds,
    detectable: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonal A1 and a C1 that hides exactly one unstable mode when undetectable."""

    unstable = not detectable or rng.random() < 0.5
    stable_count = n1 - 1 if unstable else n1
    blocks = _modal_block(rng, stable_count, bounds.stable_radius)
    A1 = np.zeros((n1, n1))
    start = 0
    for block in blocks:
        size = block.shape[0]
        A1[start : start + size, start : start + size] = block
        start += size

    C1 = rng.standard_normal((outputs, n1))
    if unstable:
        sign = rng.choice([-1.0, 1.0])
        A1[n1 - 1, n1 - 1] = sign * rng.uniform(bounds.unstable_low, bounds.unstable_high)
        if not detectable:
            C1[:, n1 - 1] = 0.0
    return A1, C1


def _scramble(
    rng: np.random.Generator,
    A1: np.ndarray,
    n2: int,
    B: np.ndarray,
    C: np.ndarray,
    F: np.ndarray | None,
) -> DescriptorSystem:
    n1 = A1.shape[0]
    n = n1 + n2
    S_inv = random_invertible(rng, n)
    P_inv = random_invertible(rng, n)
    E_w = np.diag(np.concatenate([np.ones(n1), np.zeros(n2)]))
    A_w = np.zeros((n, n))
    A_w[:n1, :n1] = A1
    A_w[n1:, n1:] = np.eye(n2)
    return DescriptorSystem(
        E=S_inv @ E_w @ P_inv,
        A=S_inv @ A_w @ P_inv,
        B=S_inv @ B,
        C=C @ P_inv,
        F=None if F is None else S_inv @ F,
    )


def _split_sizes(rng: np.random.Generator, bounds: PlantBounds) -> tuple[int, int]:
    n = int(rng.integers(bounds.min_states, bounds.max_states + 1))
    n2 = int(rng.integers(0, n))
    return n - n2, n2


def random_descriptor_system(
    rng: np.random.Generator,
    bounds: PlantBounds = PlantBounds(),
    detectable: bool = True,
) -> GeneratedPlant:
    """Regular, dual normalizable, R-controllable plant of nilpotency index at most one."""

    n1, n2 = _split_sizes(rng, bounds)
    m = int(rng.integers(bounds.min_inputs, bounds.max_inputs + 1))
    p = max(n2, 1) + int(rng.integers(0, 2))
    A1, C1 = _slow_subsystem(rng, n1, p, bounds, detectable)
    C2 = rng.standard_normal((p, n2))
    B = rng.standard_normal((n1 + n2, m))
    system = _scramble(rng, A1, n2, B, np.hstack([C1, C2]), None)
    return GeneratedPlant(system=system, n1=n1, detectable=detectable)


def random_uio_system(
    rng: np.random.Generator,
    bounds: PlantBounds = PlantBounds(),
    detectable: bool = True,
    matching: bool = True,
) -> GeneratedPlant:
    """Plant with an unknown-input channel; the matching condition holds or fails by construction.

    A violation needs a fast subsystem: F2 = 0 while C1 F1 lies in the span of C2.
    n2 is capped so that [B2, F2], or B2 alone when F2 = 0, has full row rank.
    """

    q = int(bounds.unknown_inputs)
    m = int(rng.integers(bounds.min_inputs, bounds.max_inputs + 1))
    n = int(rng.integers(bounds.min_states, bounds.max_states + 1))
    reach = m + q if matching else m
    low, high = (0 if matching else q), min(n - 1, reach)
    if high < low:
        raise ValueError(f"no fast subsystem size fits {n} states with {m} inputs")
    n2 = int(rng.integers(low, high + 1))
    n1 = n - n2
    p = n2 + q if n2 else q + 1
    A1, C1 = _slow_subsystem(rng, n1, p, bounds, detectable)
    C2 = rng.standard_normal((p, n2))
    B = rng.standard_normal((n, m))
    F1 = rng.standard_normal((n1, q))
    F2 = rng.standard_normal((n2, q))
    if not matching:
        F2 = np.zeros((n2, q))
        C2[:, :q] = C1 @ F1
    system = _scramble(rng, A1, n2, B, np.hstack([C1, C2]), np.vstack([F1, F2]))
    return GeneratedPlant(system=system, n1=n1, detectable=detectable, matching=matching)


def random_lti_system(
    rng: np.random.Generator,
    states: int = 3,
    inputs: int = 1,
    disturbances: int = 1,
) -> LtiSystem:
    """Stable LTI plant whose F0 has full column rank."""

    radius = config.MC_STABLE_RADIUS
    T = random_invertible(rng, states)
    A0 = T @ np.diag(_spread_values(rng, states, -radius, radius)) @ np.linalg.inv(T)
    outputs = max(states - 1, disturbances)
    F0 = np.zeros((outputs, disturbances))
    F0[:disturbances, :disturbances] = random_invertible(rng, disturbances)
    return LtiSystem(
        A0=A0,
        B0=rng.standard_normal((states, inputs)),
        E0=rng.standard_normal((states, disturbances)),
        C0=rng.standard_normal((outputs, states)),
        F0=F0,
    )


__all__ = [
    "GeneratedPlant",
    "PlantBounds",
    "normalize_interval",
    "normalize_range_config",
    "random_descriptor_system",
    "random_invertible",
    "random_lti_system",
    "random_uio_system",
]
