import numpy as np
import pytest

from deso.data import build_data_matrices
from deso.descriptor import DescriptorSystem, pbh_detectable
from deso.errors import MissingDataError, NotSchurError
from deso.linalg import spectral_radius
from deso.synthesis import (
    ObserverGains,
    augmented_record,
    data_equation_residual,
    kernel_inclusion_check,
    load_gains,
    rank_condition_check,
    save_gains,
    solve_family,
    synthesize_eso,
    synthesize_observer,
    synthesize_uio,
)

from conftest import excited_record


def _hidden_unstable_plant():
    return DescriptorSystem(
        E=np.diag([1.0, 1.0, 0.0]),
        A=np.diag([1.2, 0.5, 1.0]),
        B=np.ones((3, 1)),
        C=np.array([[0.0, 1.0, 1.0]]),
    )


def test_standard_observer_from_reference_data(record):
    dm = build_data_matrices(record)
    gains, report = synthesize_observer(dm)
    assert report.feasible
    assert gains is not None
    assert report.reason is None
    assert report.spectral_radius < 1.0
    assert report.data_residual < 1e-8
    assert report.checks["corollary1"]
    assert report.checks["rank_condition"]
    assert report.checks["detectability_of_family_pair"]
    assert spectral_radius(gains.A_O) == pytest.approx(report.spectral_radius)
    assert data_equation_residual(gains, dm) < 1e-8


def test_kernel_inclusion_holds_on_standard_data(record):
    family = solve_family(build_data_matrices(record))
    inclusion = kernel_inclusion_check(family.equation)
    assert inclusion.holds
    assert inclusion.residual < 1e-8


def test_any_free_parameter_keeps_the_data_equation(record):
    dm = build_data_matrices(record)
    family = solve_family(dm)
    rng = np.random.default_rng(9)
    for _ in range(100):
        K1 = rng.standard_normal(family.sigma0.shape)
        scale = max(1.0, np.linalg.norm(K1))
        assert data_equation_residual(family.sigma(K1), dm) < 1e-8 * scale


def test_gain_blocks_partition_sigma(record):
    gains, report = synthesize_observer(build_data_matrices(record))
    assert gains.A_O.shape == (3, 3)
    assert gains.B_O_u.shape == (3, 1)
    assert gains.B_O_y.shape == gains.N_O.shape == (3, 2)
    family = solve_family(build_data_matrices(record))
    np.testing.assert_allclose(gains.sigma, family.sigma(report.K1), atol=1e-12)


def test_uio_from_reference_data(uio_record):
    dm = build_data_matrices(uio_record)
    gains, report = synthesize_uio(dm)
    assert report.feasible
    assert gains.kind == "uio"
    assert report.checks["corollary2"]
    assert report.checks["kernel_inclusion"]
    assert report.kernel_inclusion_residual < 1e-8
    assert report.spectral_radius < 1.0


def test_uio_refuses_unexcited_unknown_input(uio_plant):
    rec = excited_record(uio_plant)
    assert not np.any(rec.eta_d)
    gains, report = synthesize_uio(build_data_matrices(rec))
    assert gains is None
    assert not report.feasible
    assert report.reason == "data_informativity"
    assert not report.checks["corollary2"]


def test_eso_from_reference_data(lti_plant, eso_record):
    gains, report = synthesize_eso(lti_plant, eso_record)
    assert report.feasible
    assert gains.kind == "eso"
    assert gains.n == lti_plant.n + lti_plant.r
    assert report.checks["kernel_inclusion"]
    assert report.checks["strong_detectability"]
    assert report.checks["augmented_dual_normalizability"]


def test_eso_without_model_reports_data_checks_only(eso_record):
    _, report = synthesize_eso(None, eso_record)
    assert report.feasible
    assert set(report.checks) == {"kernel_inclusion", "detectability_of_family_pair"}


def test_eso_needs_disturbance_data(record):
    with pytest.raises(MissingDataError):
        augmented_record(record)


def test_undetectable_plant_is_infeasible():
    plant = _hidden_unstable_plant()
    assert not pbh_detectable(plant)
    dm = build_data_matrices(excited_record(plant))
    gains, report = synthesize_observer(dm)
    assert gains is None
    assert report.reason == "undetectable_family"
    assert not report.checks["detectability_of_family_pair"]
    assert not rank_condition_check(dm)


def test_unstable_gains_are_rejected():
    with pytest.raises(NotSchurError):
        ObserverGains(
            A_O=2.0 * np.eye(2),
            B_O_u=np.zeros((2, 1)),
            B_O_y=np.zeros((2, 1)),
            N_O=np.zeros((2, 1)),
        )


def test_gains_file(tmp_path, record):
    gains, _ = synthesize_observer(build_data_matrices(record))
    loaded = load_gains(save_gains(gains, tmp_path / "gains.json"))
    assert loaded.kind == "standard"
    np.testing.assert_allclose(loaded.sigma, gains.sigma, rtol=1e-12)
