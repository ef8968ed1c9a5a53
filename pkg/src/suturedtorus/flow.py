"""Hamiltonian vector fields, flows with their linearization, fixed points,
and the exactness identities of the time-1 map.

Sign convention: ``i_X d(beta) = -dH``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateAreaForm,
    LeftChartDomain,
    NewtonDivergence,
    PointOutsideCharts,
    SingularNewtonMatrix,
    StepFailure,
)
from .integrate import integrate
from .model import (
    Chart,
    OneForm,
    PlaneField,
    RegionKind,
    TorusModel,
    classify_many,
    classify_region,
)
from .reports import make_report


def hamiltonian_vector_field(H: PlaneField, beta: OneForm, pt):
    """Solve ``i_X d(beta) = -dH`` at ``pt``: ``X = (-H_y, H_x) / w``."""
    pt = np.asarray(pt, dtype=float)
    w = beta.density(pt)
    if not w > beta.model.tol.identity:
        raise DegenerateAreaForm(f"area density {w:.3e} at {pt}")
    gx, gy = H.gradient(pt)
    return np.array([-gy / w, gx / w])


@dataclass
class FlowResult:
    endpoint: np.ndarray
    jacobian: np.ndarray
    time: float
    stayed_in_chart: bool
    accepted_steps: int
    rejected_steps: int
    exit_time: float | None = None
    quad: float | None = None
    region: str = ""

    @property
    def det_defect(self):
        return abs(np.linalg.det(self.jacobian) - 1.0)


def _chart_groups(model, pts):
    codes, index = classify_many(model, pts)
    if np.any(codes < 0):
        bad = np.flatnonzero(codes < 0)[0]
        raise PointOutsideCharts(f"point {pts[bad]} lies in no chart")
    groups = {}
    for i, (c, k) in enumerate(zip(codes, index)):
        if c == 0:
            ch = model.outer_chart
        elif c == 1:
            ch = model.saddle_charts[k - 1]
        else:
            ch = model.smoothing_chart
        groups.setdefault(id(ch), (ch, []))[1].append(i)
    return list(groups.values())


def _integrate_chart(chart: Chart, pts, t, rtol, atol, with_quad=False, monitor=None,
                     freeze=False):
    m = pts.shape[0]
    d = 7 if with_quad else 6
    Y0 = np.zeros((m, d))
    Y0[:, :2] = pts
    Y0[:, 2] = Y0[:, 5] = 1.0

    active = np.ones(m, dtype=bool)

    def rhs(Y):
        if freeze and not np.all(active):
            out = np.zeros_like(Y)
            out[active] = rhs_all(Y[active])
            return out
        return rhs_all(Y)

    def rhs_all(Y):
        P = Y[:, :2]
        out = np.empty_like(Y)
        out[:, :2] = chart.vector_field(P)
        DX = chart.field_jacobian(P)
        J = Y[:, 2:6].reshape(-1, 2, 2)
        out[:, 2:6] = np.matmul(DX, J).reshape(-1, 4)
        if with_quad:
            out[:, 6] = chart.beta_of_field(P) - chart.H(P)
        return out

    exit_time = np.full(m, np.nan)

    def on_step(s, Y):
        inside = chart.contains(Y[:, :2])
        fresh = ~inside & np.isnan(exit_time)
        exit_time[fresh] = s
        if freeze:
            active[fresh] = False
        if monitor is not None:
            monitor(s, Y)

    Y, stats = integrate(rhs, Y0, t, rtol=rtol, atol=atol, on_step=on_step)
    return Y, exit_time, stats


def flow_many(model: TorusModel, pts, t, chart: Chart | None = None, on_exit="flag",
              with_quad=False, rtol=None, atol=None, monitor=None):
    """Time-``t`` flow of a batch of points with the linearized flow alongside.

    Each point is integrated with the formulas of the chart it starts in
    (or of ``chart`` when given). Membership in that chart is re-checked
    after every accepted step; the first violation time is recorded as
    ``exit_time``. With ``on_exit="raise"`` any exit raises
    :class:`LeftChartDomain`; with ``"flag"`` the trajectory continues on the
    chart formulas and ``stayed_in_chart`` is False; ``"freeze"`` also flags
    but stops the trajectory at its first step outside the chart.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    rtol = model.tol.ode_rtol if rtol is None else rtol
    atol = model.tol.ode_atol if atol is None else atol
    if chart is None:
        groups = _chart_groups(model, pts)
    else:
        if not np.all(chart.contains(pts)):
            raise PointOutsideCharts(f"start points outside chart {chart.region}")
        groups = [(chart, list(range(pts.shape[0])))]
    results = [None] * pts.shape[0]
    for ch, idx in groups:
        idx = np.asarray(idx)
        Y, exit_time, stats = _integrate_chart(
            ch, pts[idx], t, rtol, atol, with_quad=with_quad, monitor=monitor,
            freeze=on_exit == "freeze",
        )
        for j, i in enumerate(idx):
            left = not np.isnan(exit_time[j])
            if left and on_exit == "raise":
                raise LeftChartDomain(
                    f"trajectory of {pts[i]} left chart {ch.region} at t={exit_time[j]:.6g}",
                    exit_time=float(exit_time[j]),
                )
            results[i] = FlowResult(
                endpoint=Y[j, :2].copy(),
                jacobian=Y[j, 2:6].reshape(2, 2).copy(),
                time=float(t),
                stayed_in_chart=not left,
                accepted_steps=stats.accepted,
                rejected_steps=stats.rejected,
                exit_time=float(exit_time[j]) if left else None,
                quad=float(Y[j, 6]) if with_quad else None,
                region=str(ch.region),
            )
    return results


def flow(model: TorusModel, p0, t, chart: Chart | None = None, on_exit="raise", with_quad=False):
    """Time-``t`` flow of a single point; see :func:`flow_many`."""
    return flow_many(model, [p0], t, chart=chart, on_exit=on_exit, with_quad=with_quad)[0]


def outer_flow_exact(model: TorusModel, pts, t):
    """Closed-form outer flow (oracle, independent of the integrator).

    With ``u = n theta`` and ``w = sin u`` the angular equation becomes
    ``w' = 2 n mu (1 - w^2)``, so with ``D = 2 n mu t``::

        w(t)     = (w0 + tanh D) / (1 + w0 tanh D)
        cos u(t) = cos u0 / (cosh D + w0 sinh D)
        r(t)^2   = r0^2 (cosh D + w0 sinh D)
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    n, mu = model.n, model.mu
    r0 = np.hypot(pts[:, 0], pts[:, 1])
    th0 = np.arctan2(pts[:, 1], pts[:, 0])
    u0 = n * th0
    w0, c0 = np.sin(u0), np.cos(u0)
    D = 2 * n * mu * t
    g = np.cosh(D) + w0 * np.sinh(D)
    w1 = (w0 + np.tanh(D)) / (1 + w0 * np.tanh(D))
    c1 = c0 / g
    u1 = np.arctan2(w1, c1)
    du = np.angle(np.exp(1j * (u1 - u0)))
    th1 = th0 + du / n
    r1 = r0 * np.sqrt(g)
    return np.stack([r1 * np.cos(th1), r1 * np.sin(th1)], axis=1)


# --------------------------------------------------------------------------
# fixed points
# --------------------------------------------------------------------------

class FixedPointType(enum.Enum):
    ELLIPTIC = "Elliptic"
    POSITIVE_HYPERBOLIC = "PositiveHyperbolic"
    NEGATIVE_HYPERBOLIC = "NegativeHyperbolic"
    DEGENERATE = "Degenerate"


def classify_jacobian(jac, tol=1e-9):
    """Eigenvalue rule: near 1 -> degenerate; non-real -> elliptic; else by sign."""
    eig = np.linalg.eigvals(np.asarray(jac, dtype=float))
    if np.any(np.abs(eig - 1.0) < tol):
        return FixedPointType.DEGENERATE, eig
    if np.any(np.abs(eig.imag) > tol * (1 + np.abs(eig))):
        return FixedPointType.ELLIPTIC, eig
    re = eig.real
    if np.all(re > 0):
        return FixedPointType.POSITIVE_HYPERBOLIC, eig
    if np.all(re < 0):
        return FixedPointType.NEGATIVE_HYPERBOLIC, eig
    return FixedPointType.DEGENERATE, eig


@dataclass
class FixedPointReport:
    location: np.ndarray
    residual: float
    eigenvalues: np.ndarray
    classification: FixedPointType
    jacobian: np.ndarray
    region: str
    iterations: int

    def to_dict(self):
        return {
            "location": self.location,
            "residual": self.residual,
            "eigenvalues": [complex(e) for e in self.eigenvalues],
            "classification": self.classification.value,
            "jacobian": self.jacobian,
            "region": self.region,
            "iterations": self.iterations,
        }


@dataclass
class SeedFailure:
    seed: np.ndarray
    reason: str
    error: str


@dataclass
class FixedPointSearch:
    points: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]


def _newton(model, seed, t, chart):
    tol = model.tol
    p = np.array(seed, dtype=float)
    ch = chart
    if ch is None:
        region = classify_region(model, p)
        ch = model.chart(region)
    for it in range(tol.newton_maxiter + 1):
        res = flow(model, p, t, chart=ch, on_exit="raise")
        r = res.endpoint - p
        if np.max(np.abs(r)) < tol.newton:
            return p, res, it, ch
        if it == tol.newton_maxiter:
            break
        J = res.jacobian - np.eye(2)
        if abs(np.linalg.det(J)) < tol.degenerate:
            raise SingularNewtonMatrix(f"det(DPhi - I) = {np.linalg.det(J):.3e} at {p}")
        p = p - np.linalg.solve(J, r)
        if not np.all(ch.contains(p)):
            raise NewtonDivergence(f"Newton iterate {p} left chart {ch.region}")
    raise NewtonDivergence(f"no convergence after {tol.newton_maxiter} iterations from {seed}")


def find_fixed_points(model: TorusModel, seeds, t=1.0, chart: Chart | None = None) -> FixedPointSearch:
    """Newton iteration on ``phi(p) - p`` from each seed, deduplicated and classified."""
    out = FixedPointSearch()
    for seed in np.atleast_2d(np.asarray(seeds, dtype=float)):
        try:
            p, res, its, ch = _newton(model, seed, t, chart)
        except (NewtonDivergence, SingularNewtonMatrix, LeftChartDomain,
                StepFailure, PointOutsideCharts) as exc:
            out.failures.append(SeedFailure(seed, type(exc).__name__, str(exc)))
            continue
        if any(np.linalg.norm(q.location - p) < model.tol.dedup for q in out.points):
            continue
        kind, eig = classify_jacobian(res.jacobian, model.tol.degenerate)
        out.points.append(FixedPointReport(
            location=p,
            residual=float(np.linalg.norm(res.endpoint - p)),
            eigenvalues=eig,
            classification=kind,
            jacobian=res.jacobian,
            region=res.region,
            iterations=its,
        ))
    return out


def default_seeds(model: TorusModel, rng=None):
    """Saddle points, jittered copies inside their charts, and a ring of outer seeds."""
    rng = np.random.default_rng(0) if rng is None else rng
    centers = model.saddle_centers
    hw = model.chart_half_width
    shrink = np.exp(-model.a / model.eps)
    jitter = centers + rng.uniform(-0.2, 0.2, centers.shape) * hw * shrink
    ang = 2 * np.pi * (np.arange(2 * model.n) + 0.5) / (2 * model.n)
    rr = 0.5 * (model.R + model.R_star)
    ring = np.stack([rr * np.cos(ang), rr * np.sin(ang)], axis=1)
    return np.concatenate([centers, jitter, ring])


# --------------------------------------------------------------------------
# exactness identities
# --------------------------------------------------------------------------

def exactness_function(model: TorusModel, p, t, chart: Chart | None = None, on_exit="raise"):
    """``f_t(p) = int_0^t (-H + beta(X_H))(phi^s p) ds`` by quadrature along the flow."""
    if t == 0:
        return 0.0
    return flow(model, p, t, chart=chart, on_exit=on_exit, with_quad=True).quad


def exactness_many(model, pts, t, chart=None, on_exit="flag"):
    res = flow_many(model, pts, t, chart=chart, on_exit=on_exit, with_quad=True)
    return np.array([r.quad for r in res]), res


def _pullback_defect(chart, p, res):
    b_end = chart.beta(res.endpoint[None, :])[0]
    b0 = chart.beta(p[None, :])[0]
    return res.jacobian.T @ b_end - b0


def verify_beta_XH_identity(model: TorusModel, sample_pts):
    """``|beta(X_H) - H|`` evaluated from the closed-form chart data."""
    pts = np.atleast_2d(np.asarray(sample_pts, dtype=float))
    defects, excluded = [], []
    for i, (ch, idx) in enumerate(_chart_groups(model, pts)):
        if ch.region.kind is RegionKind.POLY_SMOOTHING:
            excluded.extend(int(j) for j in idx)
            continue
        P = pts[idx]
        d = np.abs(ch.beta_of_field(P) - ch.H(P))
        defects.extend(zip(idx, d))
    defects.sort()
    return make_report(
        "beta(X_H) = H",
        [d for _, d in defects],
        model.tol.identity,
        excluded=sorted(excluded),
        details={"charts": "OuterExact and SaddleChart"},
        strict=True,
    )


def exactness_gradients(model, chart, pts, t):
    """Central-difference gradients of ``f_t`` at every row of ``pts`` (one batched flow)."""
    pts = np.atleast_2d(pts)
    h = model.tol.fd_step * np.maximum(1.0, np.max(np.abs(pts), axis=1))
    e = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
    shifted = (pts[:, None, :] + h[:, None, None] * e[None]).reshape(-1, 2)
    q = np.array([r.quad for r in flow_many(model, shifted, t, chart=chart, on_exit="flag",
                                             with_quad=True)]).reshape(-1, 4)
    return np.stack([q[:, 0] - q[:, 1], q[:, 2] - q[:, 3]], axis=1) / (2 * h[:, None])


def _df_defect(defect, grad_f):
    return float(np.max(np.abs(defect - grad_f)) / (1 + np.max(np.abs(grad_f))))


def verify_exact_symplectomorphism(model: TorusModel, sample_pts, general_pts=(), t=1.0,
                                   general_chart: Chart | None = None):
    """Pullback invariance on samples whose trajectories stay in their chart, and
    the identity ``phi^* beta - beta = df`` on every sample plus ``general_pts``.

    ``general_pts`` are flowed with ``general_chart`` (default: the proxy
    smoothing data, where ``f`` does not vanish).
    """
    tol = model.tol
    pts = np.atleast_2d(np.asarray(sample_pts, dtype=float))
    pull_defects, excluded = [], []
    df_defects = []
    for ch, idx in _chart_groups(model, pts):
        if ch.region.kind is RegionKind.POLY_SMOOTHING:
            excluded.extend(int(i) for i in idx)
            continue
        results = flow_many(model, pts[idx], t, chart=ch, on_exit="flag", with_quad=True)
        grads = exactness_gradients(model, ch, pts[idx], t)
        for i, res, grad_f in zip(idx, results, grads):
            defect = _pullback_defect(ch, pts[i], res)
            if res.stayed_in_chart:
                pull_defects.append((int(i), float(np.max(np.abs(defect)))))
            else:
                excluded.append(int(i))
            df_defects.append(_df_defect(defect, grad_f))
    general_pts = np.atleast_2d(np.asarray(general_pts, dtype=float)).reshape(-1, 2)
    gchart = general_chart if general_chart is not None else model.proxy_chart()
    general_f = []
    if len(general_pts):
        results = flow_many(model, general_pts, t, chart=gchart, on_exit="flag", with_quad=True)
        grads = exactness_gradients(model, gchart, general_pts, t)
        for p, res, grad_f in zip(general_pts, results, grads):
            defect = _pullback_defect(gchart, p, res)
            general_f.append(res.quad)
            df_defects.append(_df_defect(defect, grad_f))
    pull_defects.sort()
    rep = make_report(
        "phi^* beta = beta",
        [d for _, d in pull_defects],
        tol.pullback,
        excluded=sorted(excluded),
        strict=True,
    )
    df_max = max(df_defects) if df_defects else 0.0
    rep.details.update({
        "df_identity_max_defect": df_max,
        "df_identity_tolerance": tol.df,
        "df_identity_passed": bool(df_max <= tol.df),
        "df_identity_samples": len(df_defects),
        "general_f_values": general_f,
    })
    rep.passed = rep.passed and df_max <= tol.df
    return rep


def rotate(pts, angle):
    c, s = np.cos(angle), np.sin(angle)
    pts = np.atleast_2d(pts)
    return np.stack([c * pts[:, 0] - s * pts[:, 1], s * pts[:, 0] + c * pts[:, 1]], axis=1)


def verify_symmetry(model: TorusModel, sample_pts, t=1.0):
    """``rot(2 pi / n) o phi^t = phi^t o rot(2 pi / n)`` on outer samples staying in S."""
    pts = np.atleast_2d(np.asarray(sample_pts, dtype=float))
    ang = 2 * np.pi / model.n
    ch = model.outer_chart
    keep = np.flatnonzero(ch.contains(pts))
    excluded = sorted(set(range(len(pts))) - set(keep.tolist()))
    base = flow_many(model, pts[keep], t, chart=ch, on_exit="flag")
    rot = flow_many(model, rotate(pts[keep], ang), t, chart=ch, on_exit="flag")
    defects = []
    for i, a, b in zip(keep, base, rot):
        if not (a.stayed_in_chart and b.stayed_in_chart):
            excluded.append(int(i))
            continue
        defects.append(float(np.linalg.norm(rotate(a.endpoint, ang)[0] - b.endpoint)))
    return make_report("2pi/n equivariance", defects, model.tol.flow, excluded=sorted(excluded))


def flow_quality(model: TorusModel, sample_pts, t=1.0):
    """Worst energy drift and ``|det DPhi - 1|`` over every accepted step in ``[0, t]``."""
    pts = np.atleast_2d(np.asarray(sample_pts, dtype=float))
    energy, area = np.zeros(len(pts)), np.zeros(len(pts))
    for ch, idx in _chart_groups(model, pts):
        idx = np.asarray(idx)
        H0 = ch.H(pts[idx])

        def monitor(s, Y, ch=ch, idx=idx, H0=H0):
            dH = np.abs(ch.H(Y[:, :2]) - H0)
            J = Y[:, 2:6]
            det = J[:, 0] * J[:, 3] - J[:, 1] * J[:, 2]
            energy[idx] = np.maximum(energy[idx], dH)
            area[idx] = np.maximum(area[idx], np.abs(det - 1))

        flow_many(model, pts[idx], t, chart=ch, on_exit="flag", monitor=monitor)
    return energy, area


def saddle_return_maps(model: TorusModel):
    """Time-1 Jacobians at the saddles with their closed-form benchmark."""
    lam = np.exp(model.a / model.eps)
    expected = np.diag([1 / lam, lam])
    out = []
    for p in model.saddle_centers:
        res = flow(model, p, 1.0)
        rel = float(np.max(np.abs(res.jacobian - expected)) / lam)
        out.append((p, res.jacobian, rel))
    return expected, out
