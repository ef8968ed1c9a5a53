"""Embedded Reeb orbits, their iterates, Conley-Zehnder indices and parity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateIterate, OrbitCountMismatch, ResonantRotation
from .flow import FixedPointType, default_seeds, find_fixed_points
from .model import TorusModel

RESONANCE_DENOMINATOR = 10**6
RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class Elliptic:
    rotation: float
    name = "Elliptic"


@dataclass(frozen=True)
class PositiveHyperbolic:
    rotation_integer: int = 0
    name = "PositiveHyperbolic"

    def __post_init__(self):
        if self.rotation_integer % 2:
            raise ValueError("positive hyperbolic orbits have an even rotation integer")


@dataclass(frozen=True)
class NegativeHyperbolic:
    rotation_integer: int = 1
    name = "NegativeHyperbolic"

    def __post_init__(self):
        if self.rotation_integer % 2 == 0:
            raise ValueError("negative hyperbolic orbits have an odd rotation integer")


OrbitType = Elliptic | PositiveHyperbolic | NegativeHyperbolic


def is_resonant(phi, max_denominator=RESONANCE_DENOMINATOR, tol=RESONANCE_TOL):
    """True when some ``p/q`` with ``q <= max_denominator`` lies within ``tol`` of ``phi``."""
    approx = Fraction(phi).limit_denominator(max_denominator)
    return abs(float(approx) - phi) <= tol


def cz_index(orbit_type, k: int, strict=True) -> int:
    """Conley-Zehnder index of the ``k``-th iterate.

    Elliptic with rotation ``phi``: ``2 floor(k phi) + 1``; hyperbolic with
    rotation integer ``r``: ``k r``. ``strict`` rejects near-rational ``phi``.
    """
    if k < 1:
        raise ValueError("multiplicity must be >= 1")
    if isinstance(orbit_type, Elliptic):
        phi = orbit_type.rotation
        if strict and is_resonant(phi):
            raise ResonantRotation(f"rotation {phi!r} is within {RESONANCE_TOL} of a rational")
        return 2 * math.floor(k * phi) + 1
    return k * orbit_type.rotation_integer


def classify_good_bad(orbit_type, s: int) -> bool:
    """``True`` (good) unless the orbit is negative hyperbolic and ``s`` is even."""
    if s < 1:
        raise ValueError("multiplicity must be >= 1")
    return not (isinstance(orbit_type, NegativeHyperbolic) and s % 2 == 0)


@dataclass(frozen=True)
class ReebOrbit:
    label: int
    orbit_type: OrbitType
    action: float
    homology_class: int
    return_map: np.ndarray = field(compare=False)
    location: tuple = ()

    @property
    def eigenvalues(self):
        return np.sort(np.linalg.eigvals(self.return_map).real)

    def to_dict(self):
        t = self.orbit_type
        d = {
            "label": self.label,
            "type": t.name,
            "action": self.action,
            "homology_class": self.homology_class,
            "return_map": self.return_map,
            "eigenvalues": self.eigenvalues,
            "location": list(self.location),
        }
        if isinstance(t, Elliptic):
            d["rotation"] = t.rotation
        else:
            d["rotation_integer"] = t.rotation_integer
        return d


@dataclass(frozen=True)
class OrbitIterate:
    base: ReebOrbit
    multiplicity: int
    return_map: np.ndarray = field(compare=False)
    cz_index: int = 0
    is_good: bool = True

    @property
    def action(self):
        return self.multiplicity * self.base.action

    @property
    def homology_class(self):
        return self.multiplicity * self.base.homology_class

    @property
    def key(self):
        return (self.base.label, self.multiplicity)

    def to_dict(self):
        return {
            "label": self.base.label,
            "multiplicity": self.multiplicity,
            "action": self.action,
            "homology_class": self.homology_class,
            "cz_index": self.cz_index,
            "is_good": self.is_good,
            "return_map": self.return_map,
        }


def iterate(orbit: ReebOrbit, s: int, tol=1e-9, strict=True) -> OrbitIterate:
    """The ``s``-fold cover, with return map ``P^s`` checked for nondegeneracy."""
    if s < 1:
        raise ValueError("multiplicity must be >= 1")
    P = np.linalg.matrix_power(np.asarray(orbit.return_map, dtype=float), s)
    eig = np.linalg.eigvals(P)
    if np.any(np.abs(eig - 1.0) < tol):
        raise DegenerateIterate(f"iterate {s} of orbit {orbit.label} has eigenvalue near 1")
    return OrbitIterate(
        base=orbit,
        multiplicity=s,
        return_map=P,
        cz_index=cz_index(orbit.orbit_type, s, strict=strict),
        is_good=classify_good_bad(orbit.orbit_type, s),
    )


_TYPE_OF = {
    FixedPointType.POSITIVE_HYPERBOLIC: lambda r: PositiveHyperbolic(r),
    FixedPointType.NEGATIVE_HYPERBOLIC: lambda r: NegativeHyperbolic(r if r % 2 else r + 1),
}


def build_orbits(model: TorusModel, rotation_integer=0, seeds=None):
    """One embedded orbit per fixed point of the time-1 map found from ``seeds``.

    Each closes up after gluing with action ``2N`` and homology class 1.
    """
    seeds = default_seeds(model) if seeds is None else seeds
    search = find_fixed_points(model, seeds)
    if len(search) != model.n - 1:
        raise OrbitCountMismatch(f"found {len(search)} fixed points, expected {model.n - 1}")
    ordered = sorted(search, key=lambda p: math.atan2(p.location[1], p.location[0]) % (2 * math.pi))
    orbits = []
    for label, fp in enumerate(ordered, start=1):
        maker = _TYPE_OF.get(fp.classification)
        if maker is None:
            raise OrbitCountMismatch(f"fixed point {fp.location} is {fp.classification.value}")
        orbits.append(ReebOrbit(
            label=label,
            orbit_type=maker(rotation_integer),
            action=2.0 * model.N,
            homology_class=1,
            return_map=fp.jacobian,
            location=tuple(float(x) for x in fp.location),
        ))
    return orbits


def symbolic_catalog(n: int, N=1.0, a=1.0, eps=0.5, rotation_integer=0):
    """Catalog from the closed-form saddle return map, without integrating."""
    lam = math.exp(a / eps)
    P = np.diag([1.0 / lam, lam])
    return [
        ReebOrbit(label=l, orbit_type=PositiveHyperbolic(rotation_integer), action=2.0 * N,
                  homology_class=1, return_map=P)
        for l in range(1, n)
    ]


def catalog_table(orbits, s_max):
    """Rows for every orbit and multiplicity ``1..s_max``."""
    return [iterate(o, s).to_dict() | {"type": o.orbit_type.name} for o in orbits
            for s in range(1, s_max + 1)]
