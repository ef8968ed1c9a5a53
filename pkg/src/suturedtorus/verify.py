"""Sample generators and the verification suites run by the ``verify`` command."""
from __future__ import annotations

import numpy as np

from .contact import ContactFormModel, contact_grid, critical_eps, verify_contact_condition
from .flow import (
    FixedPointType,
    default_seeds,
    exactness_many,
    find_fixed_points,
    flow_quality,
    saddle_return_maps,
    verify_beta_XH_identity,
    verify_exact_symplectomorphism,
    verify_symmetry,
)
from .gluing import construct_gluing_data, suture_count, verify_gluing
from .model import TorusModel
from .reports import make_report

SUITES = ("dynamics", "contact", "gluing")


def outer_samples(model: TorusModel, count, rng, r_min=None, r_max=None):
    """Uniform-in-area samples of the annulus ``r_min <= r <= r_max`` (default ``r_sing..R_star``)."""
    r_min = model.r_sing if r_min is None else r_min
    r_max = model.R_star if r_max is None else r_max
    r = np.sqrt(rng.uniform(r_min**2, r_max**2, count))
    th = rng.uniform(0.0, 2 * np.pi, count)
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)


def saddle_chart_samples(model: TorusModel, count, rng, k=None):
    """Uniform samples of the saddle squares (all of them, or only square ``k``)."""
    charts = model.saddle_charts if k is None else [model.saddle_charts[k - 1]]
    pick = rng.integers(0, len(charts), count)
    centers = np.array([charts[i].center for i in pick])
    hw = model.chart_half_width
    return centers + rng.uniform(-hw, hw, (count, 2))


def stable_saddle_samples(model: TorusModel, count, rng):
    """Samples of the sets ``V_k``: their time-1 trajectories stay in the squares."""
    hw = model.chart_half_width
    shrink = np.exp(-model.a / model.eps)
    pick = rng.integers(0, model.n - 1, count)
    centers = model.saddle_centers[pick]
    u = rng.uniform(-hw, hw, count)
    v = rng.uniform(-0.9 * hw * shrink, 0.9 * hw * shrink, count)
    return centers + np.stack([u, v], axis=1)


def dynamics_suite(model: TorusModel, samples=None, seed=0):
    samples = samples or {}
    rng = np.random.default_rng(seed)
    tol = model.tol
    reports = []

    n_chart = samples.get("chart", 1000)
    pts = np.concatenate([outer_samples(model, n_chart, rng), saddle_chart_samples(model, n_chart, rng)])
    reports.append(verify_beta_XH_identity(model, pts))

    # f vanishes at the saddles and along trajectories certified inside S
    f_saddle, _ = exactness_many(model, model.saddle_centers, 1.0)
    outer = outer_samples(model, samples.get("exactness", 100), rng, r_min=model.R)
    f_outer, res = exactness_many(model, outer, 1.0)
    stayed = np.array([r.stayed_in_chart for r in res])
    rep = make_report(
        "f_1 vanishes at saddles and on S",
        list(np.abs(f_saddle)) + list(np.abs(f_outer[stayed])),
        1e-8,
        excluded=list(np.flatnonzero(~stayed)),
        details={"max_abs_f_saddle": float(np.max(np.abs(f_saddle))), "saddle_tolerance": 1e-10},
    )
    rep.passed = rep.passed and float(np.max(np.abs(f_saddle))) < 1e-10
    reports.append(rep)

    n_flow = samples.get("flow", 100)
    traj = np.concatenate([
        outer_samples(model, n_flow - n_flow // 4, rng),
        stable_saddle_samples(model, n_flow // 4, rng),
    ])
    energy, area = flow_quality(model, traj)
    reports.append(make_report("energy drift", energy, 1e-8))
    reports.append(make_report("area preservation |det - 1|", area, 1e-8))

    expected, maps = saddle_return_maps(model)
    search = find_fixed_points(model, default_seeds(model, rng))
    kinds = [p.classification for p in search]
    rep = make_report(
        "saddle return maps",
        [rel for _, _, rel in maps],
        1e-6,
        details={
            "expected": expected,
            "fixed_points": [p.to_dict() for p in search],
            "fixed_point_count": len(search),
            "expected_count": model.n - 1,
            "seed_failures": len(search.failures),
        },
    )
    rep.passed = (rep.passed and len(search) == model.n - 1
                  and all(k is FixedPointType.POSITIVE_HYPERBOLIC for k in kinds))
    reports.append(rep)

    n_pull = samples.get("pullback", 200)
    pull = np.concatenate([
        outer_samples(model, n_pull - n_pull // 4, rng, r_min=model.R),
        stable_saddle_samples(model, n_pull // 4, rng),
    ])
    general = rng.uniform(-0.6, 0.6, (8, 2)) * model.r_sing
    reports.append(verify_exact_symplectomorphism(model, pull, general_pts=general))

    reports.append(verify_symmetry(model, outer_samples(model, 50, rng, r_min=model.R)))
    return reports


def contact_suite(model: TorusModel, samples=None, seed=0):
    samples = samples or {}
    cfm = ContactFormModel(model)
    ts, pts = contact_grid(model, samples.get("grid_xy", 50), samples.get("grid_t", 20))
    reports = [verify_contact_condition(cfm, ts, pts)]
    reports[0].name = "contact condition (model charts)"

    proxy = ContactFormModel(model, source="proxy")
    m = samples.get("proxy_grid", 21)
    pts_p = contact_grid(model, m, m, half_width=model.r_sing)[1]
    ts_p = np.linspace(-1.0, 1.0, m)
    data = proxy.spatial(pts_p)
    rep = verify_contact_condition(proxy, ts_p, pts_p, data=data)
    rep.name = "contact condition (smoothing-disk proxy)"
    rep.details["critical_eps"] = critical_eps(proxy, ts_p, pts_p)
    reports.append(rep)
    return reports


def gluing_suite(model: TorusModel, samples=None, seed=0):
    gd = construct_gluing_data(model)
    rep = verify_gluing(gd)
    count = suture_count(gd)
    rep.details["suture_count"] = count
    rep.details["expected_suture_count"] = 2 * model.n
    rep.passed = rep.passed and count == 2 * model.n
    return [rep], gd


def run_suite(name, model, samples=None, seed=0):
    if name == "dynamics":
        return dynamics_suite(model, samples, seed)
    if name == "contact":
        return contact_suite(model, samples, seed)
    if name == "gluing":
        return gluing_suite(model, samples, seed)[0]
    if name == "all":
        return [r for s in SUITES for r in run_suite(s, model, samples, seed)]
    raise ValueError(f"unknown suite {name!r}")
