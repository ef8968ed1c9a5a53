import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from suturedtorus.config import make_model
from suturedtorus.errors import ArcConstructionFailure
from suturedtorus.gluing import (
    FAMILIES,
    admissible_radii,
    construct_gluing_data,
    suture_count,
    verify_gluing,
    window_angles,
)
from suturedtorus.model import TorusModel

from .test_flow import outer_rhs


@pytest.fixture(scope="module")
def gluing3():
    return construct_gluing_data(make_model({"n": 3}))


def test_window_angles_n3():
    lo, hi = window_angles(3, 0)
    assert lo == pytest.approx(math.pi / 3) and hi == pytest.approx(2 * math.pi / 3)


def test_a_plus_arc_n3(gluing3):
    arc = gluing3.arcs["a_plus"][0]
    np.testing.assert_allclose(np.hypot(arc[:, 0], arc[:, 1]), gluing3.model.R)
    th = np.arctan2(arc[:, 1], arc[:, 0])
    assert th[0] == pytest.approx(math.pi / 3) and th[-1] == pytest.approx(2 * math.pi / 3)


def test_a_minus_endpoints(gluing3):
    m = gluing3.model
    ends = [arc[i] for arc in gluing3.arcs["a_minus"] for i in (0, -1)]
    radii = np.hypot(*np.array(ends).T)
    # end radius from an independent flow of one window endpoint
    start = m.R * np.array([math.cos(math.pi / 3), math.sin(math.pi / 3)])
    ref = solve_ivp(outer_rhs(m.n, m.mu), (0, 1), start, method="DOP853", rtol=1e-13, atol=1e-12).y[:, -1]
    np.testing.assert_allclose(radii, np.hypot(*ref), rtol=1e-9)
    assert radii.min() > m.R
    w = math.pi / (2 * m.n)

    def within(th, lo, hi):
        return 0 < (th - lo) % (2 * math.pi) < hi - lo

    for k, arc in enumerate(gluing3.arcs["a_minus"]):
        lo, hi = window_angles(m.n, k)
        assert within(math.atan2(arc[0, 1], arc[0, 0]), lo - w, lo)
        assert within(math.atan2(arc[-1, 1], arc[-1, 0]), hi, hi + w)


def test_verify_gluing_details(gluing3):
    rep = verify_gluing(gluing3)
    assert rep.passed
    d = rep.details
    assert d["transversality"]["a_plus"] == pytest.approx(0.5 * gluing3.model.R, rel=1e-3)
    assert all(v < gluing3.model.tol.flow for v in d["identification_defect"].values())
    assert all(v > 0 for v in d["disjointness_margin"].values())
    assert all(d["regions"].values())
    assert all(v > 0 for v in d["containment_margin"].values())


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_gluing_all_families_and_sutures(n):
    gd = construct_gluing_data(make_model({"n": n}))
    assert set(gd.arcs) == set(FAMILIES)
    assert all(len(gd.arcs[f]) == n for f in FAMILIES)
    assert not [k for k, v in gd.p_checks.items() if v is False]
    assert verify_gluing(gd).passed
    assert suture_count(gd) == 2 * n


@pytest.mark.parametrize("n, expected", [(2, (4.0, 8.0)), (3, (8.0, 32.0))])
def test_admissible_radii_doubling(n, expected):
    assert admissible_radii(n, 0.25) == expected


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_admissible_radii_enclose_arcs(n):
    R, R_star = admissible_radii(n, 0.25)
    assert R_star > R * 1.05 * math.exp(n * 0.25)


def test_too_small_radius_rejected():
    with pytest.raises(ArcConstructionFailure):
        construct_gluing_data(TorusModel(n=3, R=1.5, R_star=32.0))
