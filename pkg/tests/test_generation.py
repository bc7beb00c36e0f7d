import numpy as np
import pytest

from deso.data import build_data_matrices, corollary2_test
from deso.descriptor import (
    augment_for_eso,
    c_controllable,
    dual_normalizability,
    matching_condition,
    pbh_detectable,
    r_controllable,
    weierstrass,
)
from deso.generation import (
    PlantBounds,
    normalize_interval,
    normalize_range_config,
    random_descriptor_system,
    random_lti_system,
    random_uio_system,
)
from deso.linalg import numerical_rank, spectral_radius

from conftest import INPUTS, excited_record


@pytest.mark.parametrize("detectable", [True, False])
def test_descriptor_plants_have_requested_detectability(detectable):
    rng = np.random.default_rng(100 if detectable else 200)
    for _ in range(10):
        plant = random_descriptor_system(rng, detectable=detectable)
        system = plant.system
        wf = weierstrass(system)
        assert wf.n1 == plant.n1
        assert wf.s <= 1
        assert dual_normalizability(system)
        assert r_controllable(wf)
        assert pbh_detectable(system) is detectable


@pytest.mark.parametrize("matching", [True, False])
def test_uio_plants_have_requested_matching(matching):
    rng = np.random.default_rng(300 if matching else 400)
    for _ in range(10):
        plant = random_uio_system(rng, matching=matching)
        assert plant.system.q == 1
        assert matching_condition(plant.system) is matching


@pytest.mark.parametrize("matching", [True, False])
def test_uio_plants_reach_the_fast_block(matching):
    rng = np.random.default_rng(600 if matching else 700)
    for _ in range(20):
        plant = random_uio_system(rng, matching=matching)
        wf = weierstrass(plant.system)
        assert wf.n2 <= plant.system.m + (1 if matching else 0)
        assert c_controllable(wf, include_unknown=True)


def test_uio_data_rank_matches_matching_condition():
    rng = np.random.default_rng(800)
    for index in range(10):
        plant = random_uio_system(rng, matching=bool(index % 2))
        rec = excited_record(plant.system, T=30, seed=index, unknown_law=INPUTS)
        dm = build_data_matrices(rec)
        verdict = corollary2_test(dm, dm.m, dm.n, 1)
        assert verdict is matching_condition(plant.system), index


def test_lti_plants_are_stable_with_full_rank_feedthrough():
    rng = np.random.default_rng(500)
    for _ in range(5):
        lti = random_lti_system(rng, states=3, inputs=1, disturbances=2)
        assert spectral_radius(lti.A0) < 1.0
        assert numerical_rank(lti.F0) == 2
        assert dual_normalizability(augment_for_eso(lti))


def test_plant_bounds_validation():
    assert PlantBounds().to_dict()["max_states"] == 4
    with pytest.raises(ValueError):
        PlantBounds(min_states=1)
    with pytest.raises(ValueError):
        PlantBounds(min_states=4, max_states=3)
    with pytest.raises(ValueError):
        PlantBounds(stable_radius=1.0)


def test_range_helpers():
    assert normalize_range_config(1, 3, "states") == (1, 3)
    assert normalize_interval(-1, 1, "law") == (-1.0, 1.0)
    with pytest.raises(ValueError):
        normalize_range_config(-1, 3, "states")
    with pytest.raises(ValueError):
        normalize_interval(2, 1, "law")
