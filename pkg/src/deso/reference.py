"""Embedded reference plants and the experiment settings that go with them."""

from __future__ import annotations

from typing import Any

import numpy as np

from deso import config
from deso.descriptor import DescriptorSystem, LtiSystem
from deso.errors import ConfigError

_E = [[1.0, 2.0, 1.0], [0.0, 2.0, 1.0], [1.0, 0.0, 0.0]]
_A = [[0.153, 0.045, 0.069], [0.156, 0.252, 0.156], [0.135, -0.171, -0.636]]
_B = [[1.0], [1.0], [0.2]]
_C = [[1.0, 0.0, 0.0], [1.0, 0.0, 1.0]]
_F = [[1.0], [0.2], [0.5]]

_E0 = [[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]
_C0 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
_F0 = [[1.2, 1.0], [0.0, 1.0]]


def descriptor_example(with_unknown_input: bool = False) -> DescriptorSystem:
    """Three-state descriptor plant with one algebraic equation."""

    return DescriptorSystem(
        E=np.array(_E),
        A=np.array(_A),
        B=np.array(_B),
        C=np.array(_C),
        F=np.array(_F) if with_unknown_input else None,
    )


def disturbed_lti_example() -> LtiSystem:
    """Three-state LTI plant with a two-channel disturbance reaching the output."""

    return LtiSystem(
        A0=np.array(_A),
        B0=np.array(_B),
        E0=np.array(_E0),
        C0=np.array(_C0),
        F0=np.array(_F0),
    )


def _uniform(low: float, high: float) -> dict[str, Any]:
    return {"law": "uniform", "low": low, "high": high}


def example_system(example: int) -> DescriptorSystem | LtiSystem:
    if example == 1:
        return descriptor_example()
    if example == 2:
        return descriptor_example(with_unknown_input=True)
    if example == 4:
        return disturbed_lti_example()
    raise ConfigError(f"no reference example {example}; expected one of {config.REFERENCE_EXAMPLES}")


def example_config(example: int, seed: int = config.DEFAULT_SEED) -> dict[str, Any]:
    """Experiment configuration document for a reference example."""

    system = example_system(example).to_dict()
    sinusoid = {"law": "sinusoid", "amplitude": config.DEFAULT_SINUSOID_AMPLITUDE}
    inputs = _uniform(config.DEFAULT_INPUT_LOW, config.DEFAULT_INPUT_HIGH)
    start = _uniform(config.Z1_INIT_LOW, config.Z1_INIT_HIGH)
    estimate = _uniform(config.XHAT_INIT_LOW, config.XHAT_INIT_HIGH)
    test = {
        "steps": config.DEFAULT_TEST_STEPS,
        "input_law": sinusoid,
        "initial_law": start,
        "estimate_law": estimate,
    }

    if example == 1:
        return {
            "example": 1,
            "system": system,
            "mode": "standard",
            "T": 20,
            "seed": seed,
            "input_law": inputs,
            "test": test,
        }
    if example == 2:
        return {
            "example": 2,
            "system": system,
            "mode": "uio",
            "T": 20,
            "seed": seed,
            "input_law": inputs,
            "disturbance_law": inputs,
            "test": {**test, "unknown_law": _uniform(-1.0, 1.0)},
        }
    return {
        "example": 4,
        "system": system,
        "mode": "eso",
        "T": 25,
        "seed": seed,
        "input_law": inputs,
        "disturbance_law": _uniform(-3.0, 3.0),
        "test": {**test, "unknown_law": _uniform(-2.0, 2.0), "initial_law": _uniform(-2.0, 0.0)},
    }


__all__ = [
    "descriptor_example",
    "disturbed_lti_example",
    "example_config",
    "example_system",
]
