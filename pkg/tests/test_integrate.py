import numpy as np
import pytest
from scipy.integrate import solve_ivp

from suturedtorus.errors import StepFailure
from suturedtorus.integrate import integrate


def pendulum(y):
    return np.stack([y[:, 1], -np.sin(y[:, 0])], axis=1)


def test_batched_pendulum_matches_scipy():
    y0 = np.array([[0.1, 0.0], [1.0, 0.5], [2.5, -0.3]])
    y, stats = integrate(pendulum, y0, 3.0)
    for row, out in zip(y0, y):
        ref = solve_ivp(lambda t, v: [v[1], -np.sin(v[0])], (0, 3.0), row,
                        method="DOP853", rtol=1e-13, atol=1e-14).y[:, -1]
        np.testing.assert_allclose(out, ref, atol=1e-8)
    assert stats.accepted > 0


def test_backward_time_and_zero_time():
    y0 = np.array([[1.0, 2.0]])
    y, _ = integrate(lambda y: y, y0, -1.0)
    np.testing.assert_allclose(y, y0 * np.exp(-1.0), rtol=1e-9)
    y, stats = integrate(lambda y: y, y0, 0.0)
    np.testing.assert_array_equal(y, y0)
    assert stats.accepted == 0


def test_on_step_reports_monotone_times():
    seen = []
    integrate(lambda y: -y, np.ones((1, 1)), 2.0, on_step=lambda t, y: seen.append(t))
    assert seen[-1] == 2.0
    assert np.all(np.diff(seen) > 0)


def test_blow_up_raises_step_failure():
    # y' = y^2 from y(0) = 1 blows up at t = 1
    with pytest.raises(StepFailure):
        integrate(lambda y: y**2, np.ones((1, 1)), 2.0)
