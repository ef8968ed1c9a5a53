import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from suturedtorus.config import make_model
from suturedtorus.errors import DegenerateIterate, OrbitCountMismatch, ResonantRotation
from suturedtorus.orbits import (
    Elliptic,
    NegativeHyperbolic,
    PositiveHyperbolic,
    ReebOrbit,
    build_orbits,
    catalog_table,
    classify_good_bad,
    cz_index,
    is_resonant,
    iterate,
    symbolic_catalog,
)


def test_cz_index_examples():
    assert cz_index(Elliptic(0.3), 4, strict=False) == 3
    assert cz_index(Elliptic(math.sqrt(2) - 1), 4) == 2 * math.floor(4 * (math.sqrt(2) - 1)) + 1
    assert cz_index(PositiveHyperbolic(0), 7) == 0
    assert cz_index(NegativeHyperbolic(1), 2) == 2


def test_resonant_rotation_rejected_when_strict():
    assert is_resonant(0.3)
    assert not is_resonant(math.sqrt(2) - 1)
    with pytest.raises(ResonantRotation):
        cz_index(Elliptic(0.3), 4)


def test_rotation_integer_parity_enforced():
    with pytest.raises(ValueError):
        PositiveHyperbolic(1)
    with pytest.raises(ValueError):
        NegativeHyperbolic(2)


def test_good_bad_examples():
    assert classify_good_bad(PositiveHyperbolic(), 2)
    assert not classify_good_bad(NegativeHyperbolic(), 2)
    assert classify_good_bad(NegativeHyperbolic(), 3)
    assert classify_good_bad(Elliptic(0.3), 6)


@given(phi=st.floats(0.001, 0.999), k=st.integers(1, 50))
def test_elliptic_index_is_odd(phi, k):
    assert cz_index(Elliptic(phi), k, strict=False) % 2 == 1


@given(r=st.integers(-5, 5).map(lambda x: 2 * x), k=st.integers(1, 50))
def test_positive_hyperbolic_index_even_and_good(r, k):
    t = PositiveHyperbolic(r)
    assert cz_index(t, k) % 2 == 0
    assert classify_good_bad(t, k)


def orbit(eps=0.5, a=1.0, N=1.0):
    return symbolic_catalog(2, N=N, a=a, eps=eps)[0]


def test_iterate_examples():
    g = orbit()
    sq = iterate(g, 2)
    np.testing.assert_allclose(sq.return_map, np.diag([math.exp(-4), math.exp(4)]), rtol=1e-14)
    one = iterate(g, 1)
    np.testing.assert_array_equal(one.return_map, g.return_map)
    assert one.action == g.action and one.homology_class == g.homology_class
    cube = iterate(orbit(N=5.0), 3)
    assert cube.action == 30.0 and cube.homology_class == 3


def test_degenerate_iterate_raises():
    rot = 2 * math.pi / 3
    g = ReebOrbit(1, Elliptic(1 / 3), 2.0, 1,
                  np.array([[math.cos(rot), -math.sin(rot)], [math.sin(rot), math.cos(rot)]]))
    iterate(g, 2, strict=False)
    with pytest.raises(DegenerateIterate):
        iterate(g, 3, strict=False)


@pytest.mark.parametrize("n", [2, 4])
def test_build_orbits(n):
    m = make_model({"n": n})
    orbits = build_orbits(m)
    assert len(orbits) == n - 1
    lam = math.exp(m.a / m.eps)
    for o in orbits:
        assert isinstance(o.orbit_type, PositiveHyperbolic)
        assert o.action == 2 * m.N and o.homology_class == 1
        np.testing.assert_allclose(o.eigenvalues, [1 / lam, lam], rtol=1e-6)
    assert len({o.action for o in orbits}) == 1


def test_build_orbits_count_mismatch():
    m = make_model({"n": 3})
    with pytest.raises(OrbitCountMismatch):
        build_orbits(m, seeds=m.saddle_centers[:1])


def test_catalog_iterates_even_good_equal_actions():
    m = make_model({"n": 5})
    rows = catalog_table(build_orbits(m), 3)
    assert len(rows) == 4 * 3
    for r in rows:
        assert r["is_good"] and r["cz_index"] % 2 == 0
        assert r["action"] == pytest.approx(2 * m.N * r["multiplicity"])
    lam = math.exp(m.a / m.eps)
    for r in rows:
        eig = np.sort(np.linalg.eigvals(r["return_map"]).real)
        s = r["multiplicity"]
        assert eig[0] < 1 < eig[1]
        np.testing.assert_allclose(eig, [lam**-s, lam**s], rtol=1e-6)


def test_orbit_serialization_roundtrip_fields():
    d = orbit().to_dict()
    assert d["type"] == "PositiveHyperbolic" and d["rotation_integer"] == 0
    assert dataclasses.is_dataclass(orbit())
