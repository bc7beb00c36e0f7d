import numpy as np
import pytest

from deso.descriptor import (
    DescriptorSystem,
    LtiSystem,
    augment_for_eso,
    c_controllable,
    check_regularity,
    dual_normalizability,
    fast_subsystem_observable,
    load_system,
    matching_condition,
    observable,
    pbh_detectable,
    r_controllable,
    save_system,
    simulate,
    simulate_lti,
    strong_detectability,
    uio_detectable,
    weierstrass,
)
from deso.errors import (
    DimensionError,
    InvalidInputError,
    MissingDataError,
    SequenceLengthError,
    SingularPencilError,
)
from deso.linalg import finite_spectrum


def test_weierstrass_blocks(plant):
    wf = weierstrass(plant)
    assert (wf.n1, wf.n2, wf.s) == (2, 1, 1)

    SEP = wf.S @ plant.E @ wf.P
    SAP = wf.S @ plant.A @ wf.P
    np.testing.assert_allclose(SEP[:2, :2], np.eye(2), atol=1e-8)
    np.testing.assert_allclose(SEP[2:, 2:], wf.R, atol=1e-8)
    np.testing.assert_allclose(SAP[:2, :2], wf.A1, atol=1e-8)
    np.testing.assert_allclose(SAP[2:, 2:], np.eye(1), atol=1e-8)
    for block in (SEP[:2, 2:], SEP[2:, :2], SAP[:2, 2:], SAP[2:, :2]):
        np.testing.assert_allclose(block, 0.0, atol=1e-8)
    np.testing.assert_allclose(wf.S @ plant.B, np.vstack([wf.B1, wf.B2]), atol=1e-12)
    np.testing.assert_allclose(plant.C @ wf.P, np.hstack([wf.C1, wf.C2]), atol=1e-12)


def test_slow_spectrum_matches_pencil(plant):
    wf = weierstrass(plant)
    slow = np.sort_complex(np.linalg.eigvals(wf.A1))
    pencil = np.sort_complex(np.array(finite_spectrum(plant.E, plant.A)))
    np.testing.assert_allclose(slow, pencil, atol=1e-8)


def test_singular_pencil_is_rejected():
    singular = DescriptorSystem(
        E=np.diag([1.0, 0.0]),
        A=np.diag([1.0, 0.0]),
        B=np.ones((2, 1)),
        C=np.eye(2),
    )
    assert not check_regularity(singular)
    with pytest.raises(SingularPencilError):
        weierstrass(singular)


def test_simulation_satisfies_descriptor_equation(plant):
    rng = np.random.default_rng(1)
    wf = weierstrass(plant)
    u = rng.uniform(-5, 5, size=(41, 1))
    trajectory = simulate(plant, wf, rng.uniform(0, 2, size=2), u)
    assert trajectory.steps == 40
    for k in range(trajectory.steps):
        residual = plant.E @ trajectory.x[k + 1] - plant.A @ trajectory.x[k] - plant.B @ u[k]
        assert np.linalg.norm(residual) < 1e-9
    np.testing.assert_allclose(trajectory.y, trajectory.x @ plant.C.T)


def test_simulation_with_unknown_input(uio_plant):
    rng = np.random.default_rng(2)
    wf = weierstrass(uio_plant)
    u = rng.uniform(-5, 5, size=(31, 1))
    eta = rng.uniform(-5, 5, size=(31, 1))
    trajectory = simulate(uio_plant, wf, np.ones(2), u, eta, steps=30)
    for k in range(30):
        residual = (
            uio_plant.E @ trajectory.x[k + 1]
            - uio_plant.A @ trajectory.x[k]
            - uio_plant.B @ u[k]
            - uio_plant.F @ eta[k]
        )
        assert np.linalg.norm(residual) < 1e-9


def test_simulation_argument_checks(plant):
    wf = weierstrass(plant)
    with pytest.raises(InvalidInputError):
        simulate(plant, wf, np.zeros(2), np.zeros((5, 1)), eta=np.zeros((5, 1)))
    with pytest.raises(SequenceLengthError):
        simulate(plant, wf, np.zeros(2), np.zeros((3, 1)), steps=5)


def test_structural_properties_of_reference_plants(plant, uio_plant, lti_plant):
    wf = weierstrass(plant)
    assert pbh_detectable(plant)
    assert dual_normalizability(plant)
    assert fast_subsystem_observable(wf)
    assert observable(plant)
    assert r_controllable(wf)
    assert c_controllable(wf)
    assert matching_condition(uio_plant)
    assert uio_detectable(uio_plant)
    assert strong_detectability(lti_plant)


def test_unknown_input_tests_need_f(plant):
    with pytest.raises(MissingDataError):
        matching_condition(plant)


def test_hidden_unstable_mode_is_not_detectable():
    system = DescriptorSystem(
        E=np.diag([1.0, 1.0, 0.0]),
        A=np.diag([1.2, 0.5, 1.0]),
        B=np.ones((3, 1)),
        C=np.array([[0.0, 1.0, 1.0]]),
    )
    assert not pbh_detectable(system)
    assert dual_normalizability(system)


def test_matching_condition_fails_without_output_coverage():
    system = DescriptorSystem(
        E=np.diag([1.0, 1.0]),
        A=np.diag([0.5, 0.2]),
        B=np.ones((2, 1)),
        C=np.array([[1.0, 0.0]]),
        F=np.array([[0.0], [1.0]]),
    )
    assert not matching_condition(system)


def test_eso_augmentation(lti_plant):
    augmented = augment_for_eso(lti_plant)
    assert augmented.n == 5
    assert dual_normalizability(augmented)
    np.testing.assert_array_equal(augmented.C, np.hstack([lti_plant.C0, lti_plant.F0]))


def test_lti_simulation_includes_feedthrough(lti_plant):
    rng = np.random.default_rng(4)
    u = rng.uniform(-5, 5, size=(10, 1))
    d = rng.uniform(-3, 3, size=(11, 2))
    trajectory = simulate_lti(lti_plant, np.zeros(3), u, d)
    assert trajectory.steps == 10
    np.testing.assert_allclose(trajectory.y, trajectory.x @ lti_plant.C0.T + d @ lti_plant.F0.T)


def test_system_validation():
    with pytest.raises(DimensionError):
        DescriptorSystem(E=np.eye(2), A=np.eye(3), B=np.ones((2, 1)), C=np.eye(2))
    with pytest.raises(InvalidInputError):
        DescriptorSystem(E=np.eye(2), A=np.eye(2), B=np.ones((2, 1)), C=np.eye(2), F=np.zeros((2, 1)))
    with pytest.raises(InvalidInputError):
        DescriptorSystem(E=np.eye(2), A=np.full((2, 2), np.inf), B=np.ones((2, 1)), C=np.eye(2))
    with pytest.raises(InvalidInputError):
        LtiSystem(
            A0=np.eye(2),
            B0=np.ones((2, 1)),
            E0=np.zeros((2, 1)),
            C0=np.eye(2),
            F0=np.zeros((2, 1)),
        )


def test_system_json(tmp_path, uio_plant, lti_plant):
    save_system(uio_plant, tmp_path / "plant.json")
    loaded = load_system(tmp_path / "plant.json")
    assert isinstance(loaded, DescriptorSystem)
    np.testing.assert_array_equal(loaded.F, uio_plant.F)

    save_system(lti_plant, tmp_path / "lti.json")
    assert isinstance(load_system(tmp_path / "lti.json"), LtiSystem)


def test_lti_without_disturbance_from_dict():
    lti = LtiSystem.from_dict({"A0": [[0.5]], "B0": [1.0], "C0": [[1.0]]})
    assert lti.r == 0
    assert lti.E0.shape == (1, 0)
    assert lti.F0.shape == (1, 0)


@pytest.mark.parametrize("key", ["A0", "B0", "C0"])
def test_lti_from_dict_names_missing_matrix(key):
    document = {"A0": [[0.5]], "B0": [1.0], "C0": [[1.0]]}
    del document[key]
    with pytest.raises(InvalidInputError, match=key):
        LtiSystem.from_dict(document)
