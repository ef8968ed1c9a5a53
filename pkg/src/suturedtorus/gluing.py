"""Arc and region data for gluing the top and bottom of ``[-1, 1] x D``.

All arcs live in the annulus ``V(R)`` outside the smoothing disk, where the
flow is the exact outer flow. Arcs are stored as ``(m, 2)`` polylines.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from shapely.geometry import LinearRing, Polygon

from .errors import ArcConstructionFailure, InconsistentIdentification
from .flow import flow_many, outer_flow_exact
from .model import TorusModel
from .reports import make_report

ARC_SAMPLES = 129
FAMILIES = ("a_plus", "a_minus", "b_plus", "b_minus", "c_plus", "c_minus")


def window_angles(n, k):
    """``(theta_minus_k, theta_plus_k)``: the window centred on the k-th inward ray."""
    centre = 3 * math.pi / (2 * n) + 2 * math.pi * k / n
    half = math.pi / (2 * n)
    return centre - half, centre + half


def end_radius(model: TorusModel):
    """Radius reached after time 1 by the window endpoints, ``R sqrt(cosh 2 n mu)``."""
    return model.R * math.sqrt(math.cosh(2 * model.n * model.mu))


def _polar(r, th):
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=-1)


def _bump(u):
    """Flat-ended bump on ``[0, 1]`` with peak 1 at ``u = 1/2`` and its derivative."""
    u = np.asarray(u, dtype=float)
    s = np.zeros_like(u)
    ds = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    x = 2 * u[inside] - 1
    q = 1 - x * x
    s[inside] = np.exp(1 - 1 / q)
    ds[inside] = s[inside] * (-2 * x / q**2) * 2
    return s, ds


def tube_min_radius(model: TorusModel, samples=256):
    """Smallest radius met by the time-[0, 1] orbits of the circle ``r = R``.

    Measured numerically, at every accepted step, on the outer formulas.
    """
    th = 2 * np.pi * (np.arange(samples) + 0.5) / samples
    pts = _polar(np.full(samples, model.R), th)
    lowest = [np.inf]

    def monitor(s, Y):
        lowest[0] = min(lowest[0], float(np.min(np.hypot(Y[:, 0], Y[:, 1]))))

    flow_many(model, pts, 1.0, chart=model.extended_outer_chart(), on_exit="flag", monitor=monitor)
    return lowest[0]


def annulus_inner_radius(model: TorusModel, tube_min=None):
    """Inner radius of ``V(R)``: halfway between ``r_sing`` and the tube minimum."""
    tube_min = tube_min_radius(model) if tube_min is None else tube_min
    return 0.5 * (model.r_sing + tube_min)


def radii_admissible(model: TorusModel, tube_min=None):
    """The circle ``r = R`` flows for unit time without coming within a factor 2 of ``r_sing``."""
    tube_min = tube_min_radius(model) if tube_min is None else tube_min
    return tube_min >= 2 * model.r_sing


def admissible_radii(n, mu, r_sing=1.0, delta=0.05, max_doublings=40, **params):
    """Doubling search for ``(R, R_star)``.

    ``R`` starts at ``2 r_sing`` and doubles until :func:`radii_admissible`;
    ``R_star`` is the smallest doubling of ``R`` enclosing every arc, bounded
    above by ``R (1 + delta) e^{n mu}``.
    """
    R = 2.0 * r_sing
    for _ in range(max_doublings):
        probe = TorusModel(n=n, mu=mu, r_sing=r_sing, R=R, R_star=2 * R, **params)
        if radii_admissible(probe):
            break
        R *= 2
    else:
        raise ArcConstructionFailure("no admissible R found", failed=("V(R)",))
    reach = R * (1 + delta) * math.exp(n * mu)
    R_star = 2 * R
    while R_star <= reach:
        R_star *= 2
    return R, R_star


@dataclass
class GluingData:
    model: TorusModel
    arcs: dict
    delta: float
    inner_radius: float
    R_tilde: float
    fillet_radius: float
    p_checks: dict = field(default_factory=dict)
    P_plus: np.ndarray | None = None
    P_minus: np.ndarray | None = None
    D: np.ndarray | None = None
    D_smooth: np.ndarray | None = None

    @property
    def n(self):
        return self.model.n

    def to_dict(self):
        return {
            "n": self.n,
            "R": self.model.R,
            "R_star": self.model.R_star,
            "V_inner_radius": self.inner_radius,
            "R_tilde": self.R_tilde,
            "delta": self.delta,
            "fillet_radius": self.fillet_radius,
            "p_checks": self.p_checks,
            "arcs": {name: [a for a in arcs] for name, arcs in self.arcs.items()},
        }


def _b_plus_arc(model, delta, k, samples):
    n, R = model.n, model.R
    start = window_angles(n, k)[1]
    stop = window_angles(n, k + 1)[0]
    u = np.linspace(0.0, 1.0, samples)
    s, _ = _bump(u)
    th = start + (stop - start) * u
    return _polar(R * (1 + delta * s), th)


def _b_plus_slope(model, delta, k, samples):
    """``dH/dtheta`` along b_plus in closed form."""
    n, R, mu = model.n, model.R, model.mu
    start = window_angles(n, k)[1]
    stop = window_angles(n, k + 1)[0]
    u = np.linspace(0.0, 1.0, samples)
    s, ds = _bump(u)
    th = start + (stop - start) * u
    r = R * (1 + delta * s)
    dr = R * delta * ds / (stop - start)
    return mu * (2 * r * dr * np.cos(n * th) - n * r * r * np.sin(n * th)), r, dr


def _flow_arcs(model, arcs):
    sizes = [len(a) for a in arcs]
    pts = np.concatenate(arcs)
    res = flow_many(model, pts, 1.0, chart=model.outer_chart, on_exit="flag")
    stayed = all(r.stayed_in_chart for r in res)
    ends = np.array([r.endpoint for r in res])
    return np.split(ends, np.cumsum(sizes)[:-1]), stayed


def _angle_in(th, lo, hi, slack=1e-12):
    off = np.mod(th - lo + slack, 2 * np.pi)
    return off <= (hi - lo) + 2 * slack


def _segment(p, q, samples):
    u = np.linspace(0.0, 1.0, samples)[:, None]
    return (1 - u) * p + u * q


def _ring(pieces):
    """Concatenate consecutive polylines sharing endpoints into one closed ring."""
    out = [pieces[0]]
    for piece in pieces[1:]:
        out.append(piece[1:])
    ring = np.concatenate(out)
    return ring[:-1] if np.allclose(ring[0], ring[-1]) else ring


def _check_b_plus(model, delta, inner, samples):
    n = model.n
    failed = []
    arcs = [_b_plus_arc(model, delta, k, samples) for k in range(n)]
    # P1: endpoints coincide with the a_plus endpoints
    p1 = 0.0
    for k, arc in enumerate(arcs):
        a_end = _polar(model.R, window_angles(n, k)[1])
        a_next = _polar(model.R, window_angles(n, k + 1)[0])
        p1 = max(p1, np.linalg.norm(arc[0] - a_end), np.linalg.norm(arc[-1] - a_next))
    if p1 > 1e-12 * model.R:
        failed.append("P1")
    # P2: inside the angular sector and V(R)
    p2 = True
    for k, arc in enumerate(arcs):
        th = np.arctan2(arc[:, 1], arc[:, 0])
        r = np.hypot(arc[:, 0], arc[:, 1])
        lo, hi = window_angles(n, k)[1], window_angles(n, k + 1)[0]
        p2 &= bool(np.all(_angle_in(th, lo, hi)) and np.all(r > model.r_sing)
                   and np.all((r >= inner) & (r <= model.R_star)))
    if not p2:
        failed.append("P2")
    # P3: images stay beyond the circle R
    images, stayed = _flow_arcs(model, arcs)
    r_img = np.concatenate([np.hypot(b[:, 0], b[:, 1]) for b in images])
    p3_margin = float(np.min(r_img) - model.R)
    if not (stayed and p3_margin > 0 and np.max(r_img) <= model.R_star):
        failed.append("P3")
    # P4: tangent continuity at the joins with the circle (r' = 0 there)
    slope, r, dr = _b_plus_slope(model, delta, 0, samples)
    turning = float(max(abs(math.atan2(dr[0], r[0])), abs(math.atan2(dr[-1], r[-1]))))
    if turning > 1e-12:
        failed.append("P4")
    # P5: H strictly monotone along the arc, interior slope never vanishing
    interior = slope[1:-1]
    h_vals = model.outer_chart.H(arcs[0])
    p5_margin = float(np.min(-interior))
    if not (p5_margin > 0 and np.all(np.diff(h_vals) < 0)):
        failed.append("P5")
    checks = {
        "P1_endpoint_gap": p1,
        "P2_in_sector_and_V": p2,
        "P3_margin": p3_margin,
        "P4_turning_angle": turning,
        "P5_min_slope": p5_margin,
    }
    return arcs, images, stayed, failed, checks


def construct_gluing_data(cfm, delta=0.05, max_shrinks=8, samples=ARC_SAMPLES,
                          fillet_fraction=0.05) -> GluingData:
    """Build the six arc families, the regions ``P_plus``, ``P_minus`` and ``D``.

    ``cfm`` is a contact form model or a bare :class:`TorusModel`. The bump
    height ``delta`` of b_plus is halved until the P-checks pass.
    """
    model = getattr(cfm, "model", cfm)
    n = model.n
    tube_min = tube_min_radius(model)
    if not radii_admissible(model, tube_min):
        raise ArcConstructionFailure(
            f"R={model.R} is too small: flowed circle reaches r={tube_min:.4g}", failed=("P2", "P3"))
    inner = annulus_inner_radius(model, tube_min)

    theta = [window_angles(n, k) for k in range(n)]
    a_plus = [_polar(np.full(samples, model.R), np.linspace(lo, hi, samples)) for lo, hi in theta]
    a_minus, stayed = _flow_arcs(model, a_plus)
    if not stayed:
        raise ArcConstructionFailure("a_minus leaves the outer chart", failed=("P2",))

    failed = ["unset"]
    for _ in range(max_shrinks + 1):
        b_plus, b_minus, stayed, failed, checks = _check_b_plus(model, delta, inner, samples)
        if not failed:
            break
        delta *= 0.5
    if failed:
        raise ArcConstructionFailure(f"b_plus checks failed: {', '.join(failed)}", failed=failed)

    c_minus = [_segment(a_plus[k][-1], b_minus[k][0], samples) for k in range(n)]
    c_plus = [_segment(b_minus[k][-1], a_plus[(k + 1) % n][0], samples) for k in range(n)]
    arcs = {
        "a_plus": a_plus, "a_minus": a_minus, "b_plus": b_plus,
        "b_minus": b_minus, "c_plus": c_plus, "c_minus": c_minus,
    }
    P_plus = _ring([p for k in range(n) for p in (a_plus[k], b_plus[k])])
    P_minus = _ring([p for k in range(n) for p in (a_minus[k], b_minus[(k) % n])])
    D = _ring([p for k in range(n) for p in (a_plus[k], c_minus[k], b_minus[k], c_plus[k])])
    fillet = fillet_fraction * model.R
    smooth = Polygon(D).buffer(-fillet, quad_segs=16).buffer(fillet, quad_segs=16)
    smooth = smooth.buffer(fillet, quad_segs=16).buffer(-fillet, quad_segs=16)
    D_smooth = np.asarray(smooth.exterior.coords)[:-1] if smooth.geom_type == "Polygon" else None
    return GluingData(
        model=model,
        arcs=arcs,
        delta=delta,
        inner_radius=inner,
        R_tilde=end_radius(model),
        fillet_radius=fillet,
        p_checks=checks,
        P_plus=P_plus,
        P_minus=P_minus,
        D=D,
        D_smooth=D_smooth,
    )


def _outward_margin(ring):
    """Minimum of ``<1/2 r d_r, outward unit normal>`` over a counter-clockwise ring."""
    nxt = np.roll(ring, -1, axis=0)
    mid = 0.5 * (ring + nxt)
    tang = nxt - ring
    length = np.linalg.norm(tang, axis=1)
    normal = np.stack([tang[:, 1], -tang[:, 0]], axis=1) / length[:, None]
    return float(np.min(0.5 * np.einsum("ij,ij->i", mid, normal)))


def _arc_transversality(arc, region_ring):
    """Transversality margin of ``1/2 r d_r`` along one boundary arc, with the
    normal pointing out of ``region_ring``."""
    mid = 0.5 * (arc[1:] + arc[:-1])
    tang = arc[1:] - arc[:-1]
    normal = np.stack([tang[:, 1], -tang[:, 0]], axis=1) / np.linalg.norm(tang, axis=1)[:, None]
    if LinearRing(region_ring).is_ccw is False:
        normal = -normal
    probe = mid + 1e-6 * np.linalg.norm(mid, axis=1)[:, None] * normal
    outside = ~shapely.contains_xy(Polygon(region_ring), probe[:, 0], probe[:, 1])
    if not np.all(outside):
        raise InconsistentIdentification("arc normals disagree with the region orientation")
    return float(np.min(0.5 * np.einsum("ij,ij->i", mid, normal)))


def _min_distance(arcs_a, arcs_b):
    ga = shapely.MultiLineString([a for a in arcs_a])
    gb = shapely.MultiLineString([b for b in arcs_b])
    return float(ga.distance(gb))


def verify_gluing(gd: GluingData):
    """Transversality, flow identification, containment in ``V(R)`` and disjointness."""
    model = gd.model
    arcs = gd.arcs
    n = gd.n
    checks = {}

    trans = {}
    for name, ring in (("a_plus", gd.P_plus), ("b_plus", gd.P_plus),
                       ("a_minus", gd.P_minus), ("b_minus", gd.P_minus)):
        trans[name] = min(_arc_transversality(arc, ring) for arc in arcs[name])
    checks["transversality"] = trans

    ident = {}
    for src, dst in (("a_plus", "a_minus"), ("b_plus", "b_minus")):
        exact = [outer_flow_exact(model, arc, 1.0) for arc in arcs[src]]
        ident[src] = float(max(np.max(np.linalg.norm(e - d, axis=1)) for e, d in zip(exact, arcs[dst])))
    checks["identification_defect"] = ident

    contain = {}
    for name in FAMILIES:
        r = np.concatenate([np.hypot(a[:, 0], a[:, 1]) for a in arcs[name]])
        contain[name] = float(min(r.min() - gd.inner_radius, model.R_star - r.max()))
    checks["containment_margin"] = contain

    disjoint = {
        "a_plus|b_minus": _min_distance(arcs["a_plus"], arcs["b_minus"]),
        "a_plus|a_minus": _min_distance(arcs["a_plus"], arcs["a_minus"]),
        "b_plus|b_minus": _min_distance(arcs["b_plus"], arcs["b_minus"]),
    }
    checks["disjointness_margin"] = disjoint

    D = Polygon(gd.D)
    fat = D.buffer(1e-9 * model.R)
    regions = {
        "D_boundary_simple": bool(LinearRing(gd.D).is_simple),
        "P_plus_boundary_simple": bool(LinearRing(gd.P_plus).is_simple),
        "P_minus_boundary_simple": bool(LinearRing(gd.P_minus).is_simple),
        "P_plus_in_D": bool(fat.contains(Polygon(gd.P_plus))),
        "P_minus_in_D": bool(fat.contains(Polygon(gd.P_minus))),
    }
    checks["regions"] = regions

    theta = [window_angles(n, k) for k in range(n)]
    ends = []
    for k, arc in enumerate(arcs["a_minus"]):
        lo, hi = theta[k]
        w = math.pi / (2 * n)
        th0 = math.atan2(arc[0, 1], arc[0, 0])
        th1 = math.atan2(arc[-1, 1], arc[-1, 0])
        ends.append(bool(_angle_in(np.array([th0]), lo - w, lo)[0] and _angle_in(np.array([th1]), hi, hi + w)[0]))
    radii = np.array([np.hypot(*a[i]) for a in arcs["a_minus"] for i in (0, -1)])
    checks["a_minus_endpoints"] = {
        "R_tilde": gd.R_tilde,
        "radius_spread": float(np.ptp(radii)),
        "radius_gap_to_R_tilde": float(np.max(np.abs(radii - gd.R_tilde))),
        "angles_in_windows": all(ends),
    }
    checks["p_checks"] = gd.p_checks

    margins = (
        [v for v in trans.values()]
        + [v for v in contain.values()]
        + [v for v in disjoint.values()]
    )
    defects = [v for v in ident.values()]
    ok_margins = all(m > 0 for m in margins)
    ok_regions = all(regions.values())
    ok_ends = all(ends) and checks["a_minus_endpoints"]["radius_gap_to_R_tilde"] < model.tol.flow \
        and gd.R_tilde > model.R
    rep = make_report("gluing data", defects, model.tol.flow, details=checks, strict=True)
    rep.passed = rep.passed and ok_margins and ok_regions and ok_ends
    rep.details["min_margin"] = float(min(margins))
    return rep


def suture_count(gd: GluingData) -> int:
    """Number of suture components read off the cyclic arc pattern of ``dD``.

    ``dD`` is walked as ``a_plus[k], c_minus[k], b_minus[k], c_plus[k], ...``.
    The a_plus pieces lie on the positive side and the b_minus pieces on the
    negative side; each switch between sides along the cycle is one suture.
    """
    n = gd.n
    arcs = gd.arcs
    tol = gd.model.tol.flow * gd.model.R
    cycle = []
    for k in range(n):
        cycle += [("+", arcs["a_plus"][k]), ("c", arcs["c_minus"][k]),
                  ("-", arcs["b_minus"][k]), ("c", arcs["c_plus"][k])]
    for (_, p), (_, q) in zip(cycle, cycle[1:] + cycle[:1]):
        if np.linalg.norm(p[-1] - q[0]) > tol:
            raise InconsistentIdentification("boundary pieces of D do not close up")
    # a_minus[k] must join the ends of b_minus[k-1] and b_minus[k]: this is what
    # places a_plus[k] on the arc of dD cut off by a_minus[k]
    for k in range(n):
        a = arcs["a_minus"][k]
        if (np.linalg.norm(a[0] - arcs["b_minus"][k - 1][-1]) > tol
                or np.linalg.norm(a[-1] - arcs["b_minus"][k][0]) > tol):
            raise InconsistentIdentification(f"a_minus[{k}] does not span a positive boundary piece")
    sides = [s for s, _ in cycle if s != "c"]
    return sum(1 for s, t in zip(sides, sides[1:] + sides[:1]) if s != t)
