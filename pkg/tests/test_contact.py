import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from suturedtorus.contact import (
    ContactFormModel,
    alpha_from_spatial,
    build_cutoffs,
    contact_densities,
    contact_grid,
    critical_eps,
    curl_density,
    eval_alpha,
    reeb_field,
    verify_contact_condition,
)
from suturedtorus.errors import PointOutsideCharts

from .conftest import polar
from .test_flow import proxy_rhs


def bump_step_oracle(eps_chi, t):
    """Normalized integral of exp(-1/(u(1-u))) over the rescaled interval, by adaptive quadrature."""
    f = lambda u: math.exp(-1.0 / (u * (1.0 - u))) if 0 < u < 1 else 0.0
    u = (t + 1 - eps_chi) / (2 - 2 * eps_chi)
    if u <= 0:
        return 0.0
    if u >= 1:
        return 1.0
    total = quad(f, 0, 1, epsabs=1e-15, epsrel=1e-13)[0]
    return quad(f, 0, u, epsabs=1e-15, epsrel=1e-13)[0] / total


def test_cutoff_boundary_values():
    cut = build_cutoffs()
    assert cut.chi0(-1.0) == 0.0
    assert cut.chi0(1.0) == 1.0
    assert cut.chi1(-1.0) == 0.0


@pytest.mark.parametrize("eps_chi", [0.05, 0.1, 0.3])
def test_cutoff_matches_quadrature_oracle(eps_chi):
    cut = build_cutoffs(eps_chi)
    for t in np.linspace(-1, 1, 41):
        assert cut.chi0(t) == pytest.approx(bump_step_oracle(eps_chi, t), abs=1e-12)


def test_cutoff_derivative_pair():
    cut = build_cutoffs(0.1)
    t = np.linspace(-0.85, 0.85, 50)
    h = 1e-6
    fd = (cut.chi0(t + h) - cut.chi0(t - h)) / (2 * h)
    np.testing.assert_allclose(cut.chi1(t), fd, atol=1e-8)
    grid = np.linspace(-1, 1, 20001)
    assert np.max(cut.chi1(grid)) == pytest.approx(cut.chi1_max, rel=1e-6)


@given(eps_chi=st.floats(0.01, 0.49), t=st.floats(-1, 1), s=st.floats(-1, 1))
def test_cutoff_invariants(eps_chi, t, s):
    cut = build_cutoffs(eps_chi)
    lo, hi = min(t, s), max(t, s)
    assert cut.chi0(lo) <= cut.chi0(hi)
    assert cut.chi1(t) >= 0
    if t <= -1 + eps_chi:
        assert cut.chi0(t) == 0.0
    if t >= 1 - eps_chi:
        assert cut.chi0(t) == 1.0


@pytest.mark.parametrize("bad", [0.0, 0.5, -0.1, 1.0])
def test_cutoff_rejects_bad_width(bad):
    with pytest.raises(ValueError):
        build_cutoffs(bad)


def test_alpha_on_S_is_standard_form(model3):
    cfm = ContactFormModel(model3)
    p = polar(12.0, 0.4)
    for t in (-1.0, -0.3, 0.0, 0.6, 1.0):
        np.testing.assert_allclose(eval_alpha(cfm, t, p),
                                   [1.0, -0.5 * model3.eps * p[1], 0.5 * model3.eps * p[0]], atol=1e-9)


def test_alpha_outside_charts_raises(model3):
    with pytest.raises(PointOutsideCharts):
        eval_alpha(ContactFormModel(model3), 0.0, [0.0, 0.0])
    with pytest.raises(PointOutsideCharts):
        eval_alpha(ContactFormModel(model3), 0.0, [2 * model3.R_star, 0.0])


def proxy_pullback_oracle(m, p, h=1e-6):
    """beta1 = DPhi^T beta(Phi(p)) and f from an independent scipy flow."""
    def run(q):
        return solve_ivp(proxy_rhs(m), (0, 1), [*q, 0.0], method="DOP853", rtol=1e-13, atol=1e-14).y[:, -1]
    end = run(p)
    J = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        J[:, j] = (run(p + e)[:2] - run(p - e)[:2]) / (2 * h)
    b_end = 0.5 * np.array([-end[1], end[0]])
    return J.T @ b_end, end[2]


def test_alpha_end_slices_on_proxy(model3):
    m = model3
    cfm = ContactFormModel(m, source="proxy")
    p = np.array([0.3, -0.2])
    beta1, f = proxy_pullback_oracle(m, p)
    beta0 = 0.5 * np.array([-p[1], p[0]])
    np.testing.assert_allclose(eval_alpha(cfm, -1.0, p), [1.0, *(m.eps * beta0)], atol=1e-12)
    np.testing.assert_allclose(eval_alpha(cfm, 1.0, p), [1.0, *(m.eps * beta1)], atol=1e-7)
    mid = eval_alpha(cfm, 0.0, p)
    assert mid[0] == pytest.approx(1 + m.eps * cfm.cutoffs.chi1(0.0) * f, abs=1e-9)


def test_reeb_field_examples(model3):
    m = model3
    cfm = ContactFormModel(m)
    v = m.saddle_centers[1] + [0.01 * m.chart_half_width, 0.0]
    for t in (-1.0, 0.0, 0.5):
        R = reeb_field(cfm, t, v)
        np.testing.assert_allclose(R.vector, [1.0, 0.0, 0.0], atol=1e-9)
        assert R.spatial_norm == 0.0
    proxy = ContactFormModel(m, source="proxy")
    p = [0.3, -0.2]
    assert np.array_equal(reeb_field(proxy, -1.0, p).vector, [1.0, 0.0, 0.0])
    R = reeb_field(proxy, 0.1, p)
    _, f = proxy_pullback_oracle(m, np.array(p))
    assert R.vector[0] == pytest.approx(1 / (1 + m.eps * proxy.cutoffs.chi1(0.1) * f), rel=1e-8)
    assert abs(R.alpha_of_reeb - 1) < 1e-10
    assert R.contraction_defect < 1e-6


def test_h_vanishes_on_chart_samples(model3):
    m = model3
    cfm = ContactFormModel(m)
    hw = m.chart_half_width * math.exp(-m.a / m.eps)
    pts = np.concatenate([
        m.saddle_centers + 0.5 * hw,
        [polar(r, th) for r, th in [(9, 0.2), (14, 2.5), (25, 5.1)]],
    ])
    data = cfm.spatial(pts)
    assert data.evaluable.all()
    assert np.max(np.abs(data.h)) <= m.tol.quad
    dens = contact_densities(cfm, np.linspace(-1, 1, 7), data)
    np.testing.assert_allclose(dens, np.broadcast_to(m.eps * data.density, dens.shape), rtol=1e-9)


def test_t_minus_one_slice_density(model3):
    cfm = ContactFormModel(model3, source="proxy")
    data = cfm.spatial(np.random.default_rng(0).uniform(-0.7, 0.7, (20, 2)))
    dens = contact_densities(cfm, [-1.0], data)[0]
    np.testing.assert_allclose(dens[data.evaluable], model3.eps * 1.0)


def test_density_formula_matches_curl(model3):
    cfm = ContactFormModel(model3, source="proxy")
    pts = np.array([[0.3, -0.2], [-0.1, 0.5], [0.2, 0.2]])
    data = cfm.spatial(pts)
    for t in (-0.4, 0.0, 0.3):
        np.testing.assert_allclose(curl_density(cfm, t, pts), contact_densities(cfm, [t], data)[0], rtol=1e-6)


def test_contact_condition_small_grid(model3):
    cfm = ContactFormModel(model3)
    ts, pts = contact_grid(model3, 15, 7)
    rep = verify_contact_condition(cfm, ts, pts)
    assert rep.passed
    assert rep.details["min_density"] > 0
    assert rep.details["reeb_spatial_max"] == 0.0
    assert rep.details["reeb_alpha_defect"] < 1e-10


def test_large_eps_fails_on_proxy_and_bisection(model3):
    m = model3
    pts = contact_grid(m, 11, 2, half_width=m.r_sing)[1]
    ts = np.linspace(-1, 1, 11)
    small = ContactFormModel(m, source="proxy")
    assert verify_contact_condition(small, ts, pts).passed
    big = ContactFormModel(m.with_(eps=10.0), source="proxy")
    rep = verify_contact_condition(big, ts, pts)
    assert not rep.passed and rep.details["min_density"] < 0
    data = small.spatial(pts)
    h = data.h[data.evaluable]
    expected = 1.0 / (np.max(small.cutoffs.chi1(ts)) * np.max(-h))
    assert critical_eps(small, ts, pts) == pytest.approx(expected, rel=1e-8)


def test_alpha_components_shape(model3):
    cfm = ContactFormModel(model3)
    data = cfm.spatial([polar(10.0, 0.0), polar(11.0, 1.0)])
    assert alpha_from_spatial(cfm, 0.2, data).shape == (2, 3)


def test_unknown_source_rejected(model3):
    with pytest.raises(ValueError):
        ContactFormModel(model3, source="other")
