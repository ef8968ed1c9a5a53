import dataclasses
import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from suturedtorus.errors import FiltrationHypothesisViolated
from suturedtorus.homology import (
    ChMonomial,
    OrbitSet,
    ch_monomials,
    ch_rank_table,
    check_against_closed_form,
    cyl_rank_table,
    distinct_partition_count,
    ech_differential,
    ech_generators,
    ech_rank_table,
    rank_table,
    rho,
)
from suturedtorus.orbits import Elliptic, symbolic_catalog


def brute_force_monomials(n, h):
    """Subsets of the generator set {gamma_l^s} counted directly."""
    gens = [(l, s) for l in range(1, n) for s in range(1, h + 1)]
    return sum(1 for k in range(h + 1) for c in itertools.combinations(gens, k)
               if sum(s for _, s in c) == h)


def test_ech_generator_examples():
    assert [g.labels for g in ech_generators(3, 1)] == [(1,), (2,)]
    gens = ech_generators(4, 0)
    assert len(gens) == 1 and gens[0].pairs == ()
    assert ech_generators(2, 3) == []
    assert all(g.admissible for h in range(5) for g in ech_generators(5, h))


def test_ech_rank_examples():
    t = ech_rank_table(3)
    assert [t.rank(h) for h in range(3)] == [1, 2, 1] and t.total == 4
    assert ech_rank_table(5).total == 16
    assert [ech_rank_table(2).rank(h) for h in range(2)] == [1, 1]
    assert t.rank(-1) == 0


def test_ech_differential_certificates():
    orbits = symbolic_catalog(5)
    a = OrbitSet(((orbits[0], 1), (orbits[2], 1)))
    d, cert = ech_differential(a, orbits)
    assert d(a) == 0 and cert.max_pairwise_action_gap == 0 and cert.conclusion
    d, cert = ech_differential(OrbitSet(()), orbits)
    assert d(OrbitSet(())) == 0
    skewed = list(orbits)
    skewed[1] = dataclasses.replace(skewed[1], action=2.5)
    with pytest.raises(FiltrationHypothesisViolated):
        ech_differential(a, skewed)
    with pytest.raises(FiltrationHypothesisViolated):
        ech_rank_table(5, orbits=skewed)


def test_orbit_set_invariants():
    o = symbolic_catalog(3)
    s = OrbitSet(((o[0], 1), (o[1], 1)))
    assert s.total_class == 2 and s.total_action == 4.0
    assert not OrbitSet(((o[0], 2),)).admissible
    ell = dataclasses.replace(o[0], orbit_type=Elliptic(math.sqrt(2) - 1))
    assert OrbitSet(((ell, 3),)).admissible
    with pytest.raises(ValueError):
        OrbitSet(((o[0], 1), (o[0], 1)))


def test_cyl_examples():
    t = cyl_rank_table(4, 7)
    assert t.rank(7) == 3 and t.rank(0) == 0
    assert cyl_rank_table(2, 1).rank(1) == 1
    assert [rank_table("cyl", 4, 5).rank(h) for h in range(6)] == [0, 3, 3, 3, 3, 3]


def test_ch_monomial_examples():
    assert [m.factors for m in ch_monomials(2, 3)] == [((1, 1), (1, 2)), ((1, 3),)]
    assert sorted(m.factors for m in ch_monomials(3, 2)) == sorted(
        [((1, 2),), ((2, 2),), ((1, 1), (2, 1))])
    assert [m.factors for m in ch_monomials(4, 0)] == [()]
    with pytest.raises(ValueError):
        ChMonomial(((1, 1), (1, 1)))


def test_rho_examples():
    assert rho(2, 6) == 4
    assert rho(3, 3) == 6
    assert all(rho(n, 1) == n - 1 for n in range(2, 9))
    assert rho(3, -2) == 0


@pytest.mark.parametrize("n", range(2, 6))
def test_ch_enumeration_matches_brute_force(n):
    for h in range(0, 8 if n < 5 else 7):
        assert len(ch_monomials(n, h)) == brute_force_monomials(n, h) == rho(n, h)


def test_distinct_partitions():
    assert [distinct_partition_count(h) for h in range(13)] == [1, 1, 1, 2, 2, 3, 4, 5, 6, 8, 10, 12, 15]
    assert [rho(2, h) for h in range(13)] == [distinct_partition_count(h) for h in range(13)]


def test_ch_table_with_enumeration_limit():
    t = ch_rank_table(8, 20, enumeration_limit=1000)
    assert t.unchecked and min(t.unchecked) > 5
    assert not check_against_closed_form(t)
    assert all(c.conclusion for c in t.certificates)


def test_certificate_actions_equal_2Nh():
    for theory in ("ech", "cyl", "ch"):
        t = rank_table(theory, 4, 6)
        for c in t.certificates:
            assert c.max_pairwise_action_gap == 0.0
            assert c.to_dict()["distinct_actions"] == [2.0 * c.h]


@given(n=st.integers(2, 8), h=st.integers(0, 7))
def test_ech_binomial(n, h):
    assert len(ech_generators(n, h)) == (math.comb(n - 1, h) if h <= n - 1 else 0)


def test_csv_projection():
    text = ech_rank_table(3).to_csv()
    assert text.splitlines() == ["theory,n,h,rank", "ech,3,0,1", "ech,3,1,2", "ech,3,2,1"]


def test_unknown_theory():
    with pytest.raises(ValueError):
        rank_table("sft", 3)
