import numpy as np
import pandas as pd
import pytest

from deso.data import SignalLaw, build_data_matrices, collect_record, pe_assumption_check
from deso.descriptor import simulate, weierstrass
from deso.errors import InvalidInputError, SequenceLengthError
from deso.observer import ObserverStepper, run, write_run
from deso.synthesis import synthesize_observer

STEPS = 200


@pytest.fixture
def gains(record):
    gains, _ = synthesize_observer(build_data_matrices(record))
    return gains


@pytest.fixture
def trajectory(plant):
    rng = np.random.default_rng(21)
    u = SignalLaw.sinusoid(4.0).sample(rng, STEPS + plant.n, plant.m)
    path = simulate(plant, weierstrass(plant), rng.uniform(0.0, 2.0, size=2), u, steps=STEPS)
    return u[:STEPS], path


def test_error_converges_on_fresh_trajectory(gains, trajectory):
    u, path = trajectory
    xhat0 = np.random.default_rng(22).uniform(0.0, 2.0, size=3)
    estimation = run(gains, u, path.y, xhat0, x_truth=path.x)
    assert estimation.steps == STEPS
    assert estimation.err_traj[0] > 1e-3
    assert np.max(estimation.err_traj[50:]) < 1e-6
    assert estimation.recursion_residual < 1e-8


def test_error_follows_observer_matrix(gains, trajectory):
    u, path = trajectory
    xhat0 = np.zeros(3)
    estimation = run(gains, u, path.y, xhat0, x_truth=path.x)
    e0 = path.x[0] - xhat0
    for k in (1, 5, 10):
        expected = np.linalg.matrix_power(gains.A_O, k) @ e0
        np.testing.assert_allclose(estimation.errors()[k], expected, atol=1e-8)


def test_exact_start_stays_exact(gains, trajectory):
    u, path = trajectory
    estimation = run(gains, u, path.y, path.x[0], x_truth=path.x)
    assert np.max(estimation.err_traj) < 1e-8


def test_drivers_agree(gains, trajectory):
    u, path = trajectory
    xhat0 = np.ones(3)
    noncausal = run(gains, u, path.y, xhat0, driver="noncausal")
    causal = run(gains, u, path.y, xhat0, driver="causal")
    assert noncausal.x_truth is None
    assert noncausal.errors() is None
    assert np.max(np.abs(noncausal.xhat_traj - causal.xhat_traj)) < 1e-10


def test_stepper_matches_batch_run(gains, trajectory):
    u, path = trajectory
    xhat0 = np.ones(3)
    batch = run(gains, u[:20], path.y[:21], xhat0)
    stepper = ObserverStepper(gains)
    stepper.reset(xhat0, path.y[0])
    for k in range(20):
        xhat = stepper.push(u[k], path.y[k + 1])
        np.testing.assert_allclose(xhat, batch.xhat_traj[k + 1], atol=1e-10)
    assert stepper.state.k == 20


def test_stepper_needs_reset(gains):
    with pytest.raises(RuntimeError):
        ObserverStepper(gains).push([0.0], [0.0, 0.0])


def test_run_argument_checks(gains, trajectory):
    u, path = trajectory
    with pytest.raises(InvalidInputError):
        run(gains, u, path.y, np.zeros(3), driver="kalman")
    with pytest.raises(SequenceLengthError):
        run(gains, u[:5], path.y[:10], np.zeros(3))


def test_run_csv(tmp_path, gains, trajectory):
    u, path = trajectory
    estimation = run(gains, u[:10], path.y[:11], np.zeros(3), x_truth=path.x)
    frame = pd.read_csv(write_run(estimation, tmp_path / "run.csv"))
    assert list(frame.columns) == [
        "k",
        "x_0",
        "x_1",
        "x_2",
        "xhat_0",
        "xhat_1",
        "xhat_2",
        "err_norm",
        "recursion_residual_step",
    ]
    assert len(frame) == 11
    assert np.isnan(frame["recursion_residual_step"].iloc[-1])
    np.testing.assert_allclose(frame["err_norm"], estimation.err_traj)


@pytest.mark.slow
def test_reference_plant_over_many_seeds(plant):
    wf = weierstrass(plant)
    inputs = SignalLaw.uniform(-5.0, 5.0)
    wave = SignalLaw.sinusoid(4.0).sample(None, 60 + plant.n, plant.m)
    for seed in range(100):
        rng = np.random.default_rng(seed)
        rec = collect_record(plant, 20, rng, inputs, wf=wf)
        if not pe_assumption_check(rec, wf):
            continue
        gains, report = synthesize_observer(build_data_matrices(rec))
        assert report.feasible, seed
        path = simulate(plant, wf, rng.uniform(0.0, 2.0, size=2), wave, steps=60)
        estimation = run(gains, wave[:60], path.y, rng.uniform(0.0, 2.0, size=3), x_truth=path.x)
        assert estimation.err_traj[50] < 1e-6, seed
