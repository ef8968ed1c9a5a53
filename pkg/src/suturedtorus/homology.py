"""Generators and rank tables for sutured ECH, cylindrical contact homology
and contact homology of the solid torus.

Every differential here is certified zero: all generators of a homology
class carry the same action, so the action filtration leaves no room for
nontrivial curves. The certificate records the measured action spread and
fails loudly if the hypothesis breaks.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

from .errors import FiltrationHypothesisViolated, OracleMismatch
from .orbits import (
    Elliptic,
    OrbitIterate,
    iterate,
    symbolic_catalog,
)
from .series import distinct_parts_product

THEORIES = ("ech", "cyl", "ch")
DEFAULT_HMAX = 20
ACTION_TOL = 1e-12


@dataclass(frozen=True)
class OrbitSet:
    """Orbit set ``{(alpha_i, m_i)}`` with distinct orbits."""

    pairs: tuple = ()

    def __post_init__(self):
        labels = [o.label for o, _ in self.pairs]
        if len(set(labels)) != len(labels):
            raise ValueError("orbit sets use each orbit at most once")
        if any(m < 1 for _, m in self.pairs):
            raise ValueError("multiplicities must be >= 1")

    @property
    def admissible(self):
        return all(m == 1 or isinstance(o.orbit_type, Elliptic) for o, m in self.pairs)

    @property
    def total_action(self):
        return sum(m * o.action for o, m in self.pairs)

    @property
    def total_class(self):
        return sum(m * o.homology_class for o, m in self.pairs)

    @property
    def labels(self):
        return tuple(o.label for o, _ in self.pairs)

    def to_dict(self):
        return {
            "orbits": [[o.label, m] for o, m in self.pairs],
            "admissible": self.admissible,
            "action": self.total_action,
            "class": self.total_class,
        }


@dataclass(frozen=True)
class ChMonomial:
    """Product of distinct generators ``gamma_l^s``, stored as sorted ``(l, s)`` keys."""

    factors: tuple = ()

    def __post_init__(self):
        if len(set(self.factors)) != len(self.factors):
            raise ValueError("a monomial uses each generator at most once")

    @property
    def total_class(self):
        return sum(s for _, s in self.factors)

    def iterates(self, orbits) -> list[OrbitIterate]:
        by_label = {o.label: o for o in orbits}
        return [iterate(by_label[l], s) for l, s in self.factors]


@dataclass
class VanishingCertificate:
    theory: str
    h: int
    actions: list
    max_pairwise_action_gap: float
    conclusion: bool

    def to_dict(self):
        return {
            "theory": self.theory,
            "class": self.h,
            "generator_count": len(self.actions),
            "distinct_actions": sorted(set(self.actions)),
            "max_pairwise_action_gap": self.max_pairwise_action_gap,
            "conclusion": self.conclusion,
        }


class ZeroMap:
    """The zero differential on a chain group."""

    def __call__(self, _generator):
        return 0

    def __repr__(self):
        return "ZeroMap()"


def certify_vanishing(theory, h, actions, tol=ACTION_TOL) -> VanishingCertificate:
    """All generators of class ``h`` must share one action up to ``tol``."""
    actions = [float(a) for a in actions]
    gap = max(actions) - min(actions) if actions else 0.0
    cert = VanishingCertificate(theory, h, actions, gap, gap <= tol)
    if not cert.conclusion:
        raise FiltrationHypothesisViolated(
            f"{theory}: actions in class {h} spread by {gap:.3e} > {tol:.1e}")
    return cert


@dataclass
class RankTable:
    theory: str
    n: int
    entries: dict
    h_max: int
    unchecked: list = field(default_factory=list)
    certificates: list = field(default_factory=list)

    def rank(self, h):
        if h < 0:
            return 0
        return self.entries[h]

    @property
    def total(self):
        return sum(self.entries.values())

    def rows(self):
        return [(self.theory, self.n, h, self.entries[h]) for h in sorted(self.entries)]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["theory", "n", "h", "rank"])
        writer.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self):
        return {
            "theory": self.theory,
            "n": self.n,
            "h_max": self.h_max,
            "ranks": [{"h": h, "rank": r} for _, _, h, r in self.rows()],
            "unchecked_classes": list(self.unchecked),
            "certificates": [c.to_dict() for c in self.certificates],
        }


def _catalog(n, orbits):
    if n < 2:
        raise ValueError("n must be >= 2")
    return symbolic_catalog(n) if orbits is None else list(orbits)


# --------------------------------------------------------------------------
# ECH
# --------------------------------------------------------------------------

def ech_generators(n, h, orbits=None) -> list[OrbitSet]:
    """Admissible orbit sets of class ``h``: ``h``-element subsets of the orbits."""
    orbits = _catalog(n, orbits)
    if h < 0:
        return []
    return [OrbitSet(tuple((o, 1) for o in combo)) for combo in itertools.combinations(orbits, h)]


def ech_differential(a: OrbitSet, orbits, tol=ACTION_TOL):
    """The ECH differential from ``a``: zero, with the action certificate for its class.

    ``orbits`` is the full catalog; the certificate compares ``a`` with every
    generator of the same class.
    """
    if not a.admissible:
        raise ValueError("ECH generators are admissible orbit sets")
    orbits = list(orbits)
    n = len(orbits) + 1
    h = a.total_class
    actions = [a.total_action] + [g.total_action for g in ech_generators(n, h, orbits)]
    return ZeroMap(), certify_vanishing("ech", h, actions, tol)


def ech_rank_table(n, h_max=None, orbits=None) -> RankTable:
    orbits = _catalog(n, orbits)
    h_max = n - 1 if h_max is None else h_max
    entries, certs = {}, []
    for h in range(h_max + 1):
        gens = ech_generators(n, h, orbits)
        entries[h] = len(gens)
        if gens:
            certs.append(certify_vanishing("ech", h, [g.total_action for g in gens]))
    return RankTable("ech", n, entries, h_max, certificates=certs)


# --------------------------------------------------------------------------
# cylindrical contact homology
# --------------------------------------------------------------------------

def cyl_generators(n, h, orbits=None) -> list[OrbitIterate]:
    """Good iterates of total class ``h``."""
    orbits = _catalog(n, orbits)
    out = []
    for o in orbits:
        if h >= 1 and h % o.homology_class == 0:
            it = iterate(o, h // o.homology_class)
            if it.is_good:
                out.append(it)
    return out


def cyl_rank_table(n, h_max=DEFAULT_HMAX, orbits=None) -> RankTable:
    orbits = _catalog(n, orbits)
    entries, certs = {}, []
    for h in range(h_max + 1):
        gens = cyl_generators(n, h, orbits)
        entries[h] = len(gens)
        if gens:
            certs.append(certify_vanishing("cyl", h, [g.action for g in gens]))
    return RankTable("cyl", n, entries, h_max, certificates=certs)


# --------------------------------------------------------------------------
# contact homology
# --------------------------------------------------------------------------

def _subsets_with_sum(keys, start, remaining):
    """Increasing index subsets of ``keys`` (``(l, s)`` pairs) with ``sum s = remaining``."""
    if remaining == 0:
        yield ()
        return
    for i in range(start, len(keys)):
        if keys[i][1] <= remaining:
            for rest in _subsets_with_sum(keys, i + 1, remaining - keys[i][1]):
                yield (keys[i],) + rest


def ch_monomials(n, h) -> list[ChMonomial]:
    """All sets of distinct generators ``gamma_l^s`` (``1 <= l <= n - 1``) with ``sum s = h``.

    Emitted in lexicographic order of their sorted ``(l, s)`` tuples.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if h < 0:
        return []
    keys = [(l, s) for l in range(1, n) for s in range(1, h + 1)]
    return [ChMonomial(m) for m in _subsets_with_sum(keys, 0, h)]


def count_ch_monomials(n, h):
    return len(ch_monomials(n, h))


def rho(n, h, degree=None):
    """Coefficient of ``x^h`` in ``prod_{s >= 1} (1 + x^s)^(n-1)``; 0 for ``h < 0``."""
    if h < 0:
        return 0
    return distinct_parts_product(n - 1, max(h, degree or 0))[h]


def ch_rank_table(n, h_max=DEFAULT_HMAX, enumeration_limit=None, orbits=None) -> RankTable:
    """Ranks from the series product, cross-checked against monomial enumeration.

    Classes whose series coefficient exceeds ``enumeration_limit`` are not
    enumerated and are listed in ``unchecked``.
    """
    orbits = _catalog(n, orbits)
    series = distinct_parts_product(n - 1, h_max)
    entries, unchecked, certs = {}, [], []
    by_label = {o.label: o for o in orbits}
    for h in range(h_max + 1):
        value = series[h]
        if enumeration_limit is not None and value > enumeration_limit:
            unchecked.append(h)
        else:
            monos = ch_monomials(n, h)
            if len(monos) != value:
                raise OracleMismatch(f"rho({n}, {h}): series {value} vs enumeration {len(monos)}")
            actions = [sum(s * by_label[l].action for l, s in m.factors) for m in monos]
            certs.append(certify_vanishing("ch", h, actions))
        entries[h] = value
    return RankTable("ch", n, entries, h_max, unchecked=unchecked, certificates=certs)


def rank_table(theory, n, h_max=None, **kwargs) -> RankTable:
    theory = theory.lower()
    if theory == "ech":
        return ech_rank_table(n, h_max if h_max is not None else n - 1, **kwargs)
    if theory == "cyl":
        return cyl_rank_table(n, DEFAULT_HMAX if h_max is None else h_max, **kwargs)
    if theory == "ch":
        return ch_rank_table(n, DEFAULT_HMAX if h_max is None else h_max, **kwargs)
    raise ValueError(f"unknown theory {theory!r}")


# --------------------------------------------------------------------------
# closed forms (oracles)
# --------------------------------------------------------------------------

def closed_form_rank(theory, n, h):
    """Closed-form ranks: binomial for ECH, ``n - 1`` for CYL, series for CH."""
    if h < 0:
        return 0
    if theory == "ech":
        return math.comb(n - 1, h) if h <= n - 1 else 0
    if theory == "cyl":
        return n - 1 if h >= 1 else 0
    if theory == "ch":
        return rho(n, h)
    raise ValueError(f"unknown theory {theory!r}")


def distinct_partition_count(h):
    """Partitions of ``h`` into distinct parts, by brute force over subsets of ``{1..h}``."""
    if h < 0:
        return 0
    parts = range(1, h + 1)
    return sum(
        1
        for k in range(h + 1)
        for combo in itertools.combinations(parts, k)
        if sum(combo) == h
    )


def check_against_closed_form(table: RankTable):
    """List of ``(h, enumerated, closed_form)`` disagreements."""
    return [
        (h, r, closed_form_rank(table.theory, table.n, h))
        for h, r in sorted(table.entries.items())
        if r != closed_form_rank(table.theory, table.n, h)
    ]
