from __future__ import annotations

import numpy as np
import pytest

from deso.data import SignalLaw, collect_lti_record, collect_record, pe_assumption_check
from deso.descriptor import weierstrass
from deso.linalg import DEFAULT_TOLERANCES
from deso.reference import descriptor_example, disturbed_lti_example

INPUTS = SignalLaw.uniform(-5.0, 5.0)


def excited_record(system, T=20, seed=0, unknown_law=None, tol=DEFAULT_TOLERANCES):
    """First record from seed, seed + 1, ... that passes the excitation check."""

    wf = weierstrass(system, tol)
    uio = system.F is not None and unknown_law is not None
    for attempt in range(10):
        rng = np.random.default_rng(seed + attempt)
        rec = collect_record(system, T, rng, INPUTS, unknown_law=unknown_law, tol=tol, wf=wf)
        if pe_assumption_check(rec, wf, tol, uio=uio):
            return rec
    raise AssertionError("no exciting record found")


@pytest.fixture
def tol():
    return DEFAULT_TOLERANCES


@pytest.fixture
def plant():
    return descriptor_example()


@pytest.fixture
def uio_plant():
    return descriptor_example(with_unknown_input=True)


@pytest.fixture
def lti_plant():
    return disturbed_lti_example()


@pytest.fixture
def record(plant):
    return excited_record(plant)


@pytest.fixture
def uio_record(uio_plant):
    return excited_record(uio_plant, unknown_law=INPUTS)


@pytest.fixture
def eso_record(lti_plant):
    rng = np.random.default_rng(3)
    return collect_lti_record(lti_plant, 25, rng, INPUTS, SignalLaw.uniform(-3.0, 3.0))
