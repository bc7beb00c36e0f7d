import numpy as np
import pytest

from deso.data import build_data_matrices, collect_record
from deso.descriptor import DescriptorSystem, pbh_detectable, weierstrass
from deso.errors import ConfigError, InvalidInputError, MissingDataError
from deso.generation import random_descriptor_system, random_uio_system
from deso.linalg import spectral_radius
from deso.synthesis import data_equation_residual, synthesize_observer
from deso.validation import (
    ModelBaseline,
    lemma1_map,
    lemma1_oracle,
    model_observer,
    montecarlo_equivalence,
    solve_tn,
)

from conftest import INPUTS, excited_record


def test_model_baseline_solves_normalization(plant):
    base = solve_tn(plant)
    assert base is not None
    identity = base.T_mat @ plant.E + base.N_mat @ plant.C
    np.testing.assert_allclose(identity, np.eye(3), atol=1e-9)


def test_unknown_input_baseline_annihilates_f(uio_plant):
    base = solve_tn(uio_plant, uio=True)
    assert base.uio
    np.testing.assert_allclose(base.T_mat @ uio_plant.E + base.N_mat @ uio_plant.C, np.eye(3), atol=1e-9)
    np.testing.assert_allclose(base.T_mat @ uio_plant.F, 0.0, atol=1e-9)


def test_baseline_needs_f(plant):
    with pytest.raises(MissingDataError):
        solve_tn(plant, uio=True)


def test_baseline_without_normalization():
    system = DescriptorSystem(
        E=np.diag([1.0, 0.0]),
        A=np.diag([0.5, 1.0]),
        B=np.ones((2, 1)),
        C=np.array([[1.0, 0.0]]),
    )
    assert solve_tn(system) is None


def test_model_observer_satisfies_data_equation(plant, record):
    gains = model_observer(plant, solve_tn(plant))
    assert gains is not None
    assert spectral_radius(gains.A_O) < 1.0
    dm = build_data_matrices(record)
    scale = max(1.0, np.linalg.norm(gains.sigma))
    assert data_equation_residual(gains, dm) < 1e-8 * scale


def test_model_observer_on_random_plants():
    rng = np.random.default_rng(31)
    for index in range(5):
        system = random_descriptor_system(rng, detectable=True).system
        base = solve_tn(system)
        assert np.linalg.matrix_rank(base.T_mat) == system.n, index
        gains = model_observer(system, base)
        assert gains is not None, index
        rec = excited_record(system, T=16, seed=int(rng.integers(1_000)))
        assert data_equation_residual(gains, build_data_matrices(rec)) < 1e-7


def test_baseline_avoids_singular_t():
    system = DescriptorSystem(
        E=np.diag([1.0, 0.0]),
        A=np.diag([-1.2, 1.0]),
        B=np.ones((2, 1)),
        C=np.array([[1.0, 1.0]]),
    )
    assert pbh_detectable(system)
    minimum_norm = np.linalg.pinv(np.vstack([system.E, system.C]))
    singular = ModelBaseline(T_mat=minimum_norm[:, :2], N_mat=minimum_norm[:, 2:])
    assert np.linalg.matrix_rank(singular.T_mat) == 1
    assert model_observer(system, singular) is None

    base = solve_tn(system)
    assert np.linalg.matrix_rank(base.T_mat) == 2
    np.testing.assert_allclose(base.T_mat @ system.E + base.N_mat @ system.C, np.eye(2), atol=1e-9)
    gains = model_observer(system, base)
    assert gains is not None
    assert spectral_radius(gains.A_O) < 1.0


def test_model_observer_checks_foreign_data(plant, record):
    dm = build_data_matrices(record)
    assert model_observer(plant, solve_tn(plant), dm=dm) is not None
    shifted = DescriptorSystem(E=plant.E, A=plant.A, B=2.0 * plant.B, C=plant.C)
    with pytest.raises(InvalidInputError):
        model_observer(shifted, solve_tn(shifted), dm=dm)


def test_trajectory_equivalence_on_reference_data(plant, record):
    assert lemma1_oracle(plant, record, trials=30)


def test_trajectory_equivalence_with_unknown_input(uio_plant, uio_record):
    assert lemma1_oracle(uio_plant, uio_record, trials=30)


def test_latent_map_reconstructs_record(plant, record):
    wf = weierstrass(plant)
    block_map = lemma1_map(plant, wf)
    assert block_map.latent_dim == 2 + 1 * 2
    latent = block_map.latent_data(wf, record)
    stack = build_data_matrices(record).tuples
    np.testing.assert_allclose(block_map.matrix @ latent, stack, atol=1e-8 * np.linalg.norm(stack))


def test_short_record_fails_trajectory_equivalence(plant):
    rec = collect_record(plant, 2, np.random.default_rng(0), INPUTS)
    assert not lemma1_oracle(plant, rec, trials=10)


def test_standard_synthesis_agrees_with_model_on_random_plants():
    rng = np.random.default_rng(41)
    for detectable in (True, False, True, False):
        plant = random_descriptor_system(rng, detectable=detectable)
        rec = excited_record(plant.system, T=20, seed=int(rng.integers(1_000)))
        _, report = synthesize_observer(build_data_matrices(rec))
        assert report.feasible is detectable


@pytest.mark.parametrize("mode", ["theorem2", "theorem4"])
def test_small_montecarlo_agrees(mode):
    summary = montecarlo_equivalence(mode, trials=4, seed=11)
    assert summary.trials == 4
    assert len(summary.cases) == 4
    assert summary.disagreements == 0
    assert summary.agreements == summary.pe_passed
    assert "seconds" not in summary.to_dict()


def test_montecarlo_aliases_and_errors():
    assert montecarlo_equivalence("standard", trials=1, seed=3).mode == "theorem2"
    with pytest.raises(ConfigError):
        montecarlo_equivalence("theorem3", trials=1)
    with pytest.raises(ConfigError):
        montecarlo_equivalence("theorem2", trials=0)


@pytest.mark.slow
@pytest.mark.parametrize("mode", ["theorem2", "theorem4"])
def test_montecarlo_equivalence_holds(mode):
    summary = montecarlo_equivalence(mode, trials=50, workers=2)
    assert summary.pe_passed >= 45
    assert summary.disagreements == 0


@pytest.mark.slow
def test_trajectory_equivalence_across_random_plants():
    rng = np.random.default_rng(51)
    for index in range(20):
        if index % 2:
            system = random_uio_system(rng).system
            rec = excited_record(system, T=20, seed=index, unknown_law=INPUTS)
        else:
            system = random_descriptor_system(rng).system
            rec = excited_record(system, T=20, seed=index)
        assert lemma1_oracle(system, rec, trials=100), index
