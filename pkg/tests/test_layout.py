import numpy as np
import pytest

from deso.descriptor import weierstrass
from deso.errors import DimensionError
from deso.layout import StackLayout, split_state


def test_gain_columns_follow_stack_rows():
    layout = StackLayout(states=3, inputs=1, outputs=2)
    assert layout.height == 8
    sigma = np.arange(24.0).reshape(3, 8)
    A_O, B_u, B_y, N_O = layout.split_columns(sigma)
    assert A_O.shape == (3, 3)
    assert B_u.shape == (3, 1)
    np.testing.assert_array_equal(np.hstack([A_O, B_u, B_y, N_O]), sigma)
    with pytest.raises(DimensionError):
        layout.split_columns(sigma[:, :7])


def test_split_state_on_vectors_and_trajectories():
    slow, fast = split_state(np.array([1.0, 2.0, 3.0]), 2)
    np.testing.assert_array_equal(slow, [1.0, 2.0])
    np.testing.assert_array_equal(fast, [3.0])

    trajectory = np.arange(12.0).reshape(4, 3)
    slow, fast = split_state(trajectory, 1)
    assert slow.shape == (4, 1)
    assert fast.shape == (4, 2)


def test_weierstrass_slow_states_use_the_split(plant):
    wf = weierstrass(plant)
    x = np.random.default_rng(3).standard_normal((5, 3))
    expected, _ = split_state(x @ wf.P_inv.T, wf.n1)
    np.testing.assert_allclose(wf.slow_states(x), expected)
