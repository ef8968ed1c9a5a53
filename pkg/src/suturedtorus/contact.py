"""The interpolated contact form on ``[-1, 1] x D`` and its Reeb field.

``alpha = (1 + eps chi1(t) h) dt + eps ((1 - chi0(t)) beta0 + chi0(t) beta1)``

with ``beta1`` the time-1 pullback of ``beta0`` and ``beta1 - beta0 = dh``.
Points are evaluable when they lie in a chart with a closed-form 1-form and
their time-1 trajectory stays in that chart. The ``"proxy"`` source replaces
the model charts by the smoothing Hamiltonian with the standard form on the
smoothing disk, where ``h`` does not vanish.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NonpositiveDenominator, PointOutsideCharts, StepFailure
from .flow import exactness_gradients, flow_many
from .model import TorusModel, classify_many
from .reports import make_report

# proxy trajectories leaving this multiple of r_sing are dropped (finite-time blow-up for n >= 3)
PROXY_ESCAPE = 4.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(80)


def _bump_density(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    v = u[inside]
    out[inside] = np.exp(-1.0 / (v * (1.0 - v)))
    return out


def _half_integral(u):
    """``int_0^u exp(-1/(s(1-s))) ds`` for ``0 <= u <= 1/2`` (Gauss-Legendre)."""
    u = np.asarray(u, dtype=float)
    nodes = 0.5 * u[..., None] * (_GL_NODES + 1.0)
    return 0.5 * u * np.sum(_GL_WEIGHTS * _bump_density(nodes), axis=-1)


_BUMP_MASS = 2.0 * float(_half_integral(np.array(0.5)))


def smooth_step(u):
    """Normalized integral of the bump ``exp(-1/(u(1-u)))``: 0 for ``u <= 0``, 1 for ``u >= 1``."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    low = u <= 0.5
    out = np.empty_like(u)
    out[low] = _half_integral(u[low]) / _BUMP_MASS
    out[~low] = 1.0 - _half_integral(1.0 - u[~low]) / _BUMP_MASS
    return out


@dataclass(frozen=True)
class CutoffPair:
    """``chi0`` rising from 0 on ``[-1, -1 + eps_chi]`` to 1 on ``[1 - eps_chi, 1]``; ``chi1 = chi0'``."""

    eps_chi: float

    @property
    def _span(self):
        return 2.0 - 2.0 * self.eps_chi

    def _arg(self, t):
        return (np.asarray(t, dtype=float) + 1.0 - self.eps_chi) / self._span

    def chi0(self, t):
        out = smooth_step(self._arg(t))
        return float(out) if np.ndim(t) == 0 else out

    def chi1(self, t):
        out = _bump_density(self._arg(t)) / (_BUMP_MASS * self._span)
        return float(out) if np.ndim(t) == 0 else out

    @property
    def chi1_max(self):
        return float(np.exp(-4.0) / (_BUMP_MASS * self._span))


def build_cutoffs(eps_chi=0.1) -> CutoffPair:
    if not 0 < eps_chi < 0.5:
        raise ValueError(f"eps_chi must lie in (0, 1/2), got {eps_chi}")
    return CutoffPair(eps_chi)


@dataclass
class SpatialData:
    """Time-independent ingredients of alpha at a batch of plane points."""

    pts: np.ndarray
    evaluable: np.ndarray
    beta0: np.ndarray
    beta1: np.ndarray
    h: np.ndarray
    density: np.ndarray
    charts: list = field(default_factory=list)


@dataclass
class ContactFormModel:
    model: TorusModel
    cutoffs: CutoffPair = field(default_factory=build_cutoffs)
    source: str = "model"
    proxy_radius: float | None = None

    def __post_init__(self):
        if self.source not in ("model", "proxy"):
            raise ValueError(f"unknown source {self.source!r}")
        if self.proxy_radius is None:
            self.proxy_radius = self.model.r_sing

    @property
    def eps(self):
        return self.model.eps

    def _groups(self, pts):
        """``[(chart, indices)]`` of evaluable starting points."""
        if self.source == "proxy":
            keep = np.flatnonzero(np.hypot(pts[:, 0], pts[:, 1]) <= self.proxy_radius)
            chart = self.model.proxy_chart(escape_radius=PROXY_ESCAPE * self.model.r_sing)
            return [(chart, keep)] if len(keep) else []
        codes, index = classify_many(self.model, pts)
        inside = np.hypot(pts[:, 0], pts[:, 1]) <= self.model.R_star
        groups = []
        outer = np.flatnonzero((codes == 0) & inside)
        if len(outer):
            groups.append((self.model.outer_chart, outer))
        for ch in self.model.saddle_charts:
            sel = np.flatnonzero((codes == 1) & (index == ch.index) & inside)
            if len(sel):
                groups.append((ch, sel))
        return groups

    def spatial(self, pts) -> SpatialData:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        m = len(pts)
        data = SpatialData(
            pts=pts,
            evaluable=np.zeros(m, dtype=bool),
            beta0=np.full((m, 2), np.nan),
            beta1=np.full((m, 2), np.nan),
            h=np.full(m, np.nan),
            density=np.full(m, np.nan),
            charts=[None] * m,
        )
        for ch, idx in self._groups(pts):
            for i, res in zip(idx, _robust_flow(self.model, ch, pts[idx])):
                if res is None or not res.stayed_in_chart:
                    continue
                b_end = ch.beta(res.endpoint[None, :])[0]
                data.beta0[i] = ch.beta(pts[i][None, :])[0]
                data.beta1[i] = res.jacobian.T @ b_end
                data.h[i] = res.quad
                data.density[i] = ch.density_value
                data.evaluable[i] = True
                data.charts[i] = ch
        return data


def _robust_flow(model, chart, pts):
    """Batched time-1 flow with quadrature; falls back to single points when a
    batch member blows up, marking those as ``None``."""
    try:
        return flow_many(model, pts, 1.0, chart=chart, on_exit="freeze", with_quad=True)
    except StepFailure:
        if len(pts) == 1:
            return [None]
        mid = len(pts) // 2
        return _robust_flow(model, chart, pts[:mid]) + _robust_flow(model, chart, pts[mid:])


def alpha_from_spatial(cfm: ContactFormModel, t, data: SpatialData):
    """``(m, 3)`` array of ``(dt, dx, dy)`` components at a single time ``t``."""
    eps = cfm.eps
    c0 = cfm.cutoffs.chi0(t)
    c1 = cfm.cutoffs.chi1(t)
    out = np.empty((len(data.pts), 3))
    out[:, 0] = 1.0 + eps * c1 * data.h
    out[:, 1:] = eps * ((1.0 - c0) * data.beta0 + c0 * data.beta1)
    return out


def eval_alpha(cfm: ContactFormModel, t, pt):
    """Coefficients ``(dt, dx, dy)`` of alpha at ``(t, pt)``."""
    data = cfm.spatial(np.reshape(np.asarray(pt, dtype=float), (1, 2)))
    if not data.evaluable[0]:
        raise PointOutsideCharts(f"alpha is not evaluable at {pt}")
    return alpha_from_spatial(cfm, t, data)[0]


@dataclass
class ReebSample:
    vector: np.ndarray
    alpha_of_reeb: float
    contraction_defect: float

    @property
    def spatial_norm(self):
        return float(np.max(np.abs(self.vector[1:])))


def _reeb_from(cfm, t, data, grad_h):
    alpha = alpha_from_spatial(cfm, t, data)
    A = alpha[:, 0]
    if np.any(A <= 0):
        bad = int(np.flatnonzero(A <= 0)[0])
        raise NonpositiveDenominator(f"1 + eps chi1 h = {A[bad]:.3e} at t={t}, pt={data.pts[bad]}")
    R = np.zeros_like(alpha)
    R[:, 0] = 1.0 / A
    alpha_R = np.einsum("ij,ij->i", alpha, R)
    # i_R dalpha = R^t ((P_t - A_x) dx + (Q_t - A_y) dy), with P_t, Q_t from chi0' = chi1
    c1 = cfm.cutoffs.chi1(t)
    spatial_t = cfm.eps * c1 * (data.beta1 - data.beta0)
    A_grad = cfm.eps * c1 * grad_h
    contraction = R[:, :1] * np.abs(spatial_t - A_grad)
    return R, alpha_R, np.max(contraction, axis=1)


def reeb_field(cfm: ContactFormModel, t, pt) -> ReebSample:
    """``(1 / (1 + eps chi1(t) h), 0, 0)`` with ``alpha(R)`` and ``|i_R d alpha|`` certified."""
    pt = np.reshape(np.asarray(pt, dtype=float), (1, 2))
    data = cfm.spatial(pt)
    if not data.evaluable[0]:
        raise PointOutsideCharts(f"alpha is not evaluable at {pt[0]}")
    grad_h = exactness_gradients(cfm.model, data.charts[0], pt, 1.0)
    R, alpha_R, contraction = _reeb_from(cfm, t, data, grad_h)
    return ReebSample(R[0], float(alpha_R[0]), float(contraction[0]))


def contact_densities(cfm: ContactFormModel, ts, data: SpatialData):
    """Density of ``alpha ^ d alpha``: ``eps w (1 + eps chi1(t) h)``, shape ``(len(ts), m)``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    c1 = cfm.cutoffs.chi1(ts)[:, None]
    return cfm.eps * data.density[None, :] * (1.0 + cfm.eps * c1 * data.h[None, :])


def curl_density(cfm: ContactFormModel, t, pts, step=1e-4):
    """``A (Q_x - P_y) + P (A_y - Q_t) + Q (P_t - A_x)`` by central differences of alpha."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    m = len(pts)
    scale = step * np.maximum(1.0, np.max(np.abs(pts), axis=1))
    e = np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
    shifted = (pts[:, None, :] + scale[:, None, None] * e[None]).reshape(-1, 2)
    data = cfm.spatial(shifted)
    ht = step
    a_mid = alpha_from_spatial(cfm, t, data).reshape(m, 5, 3)
    a_tp = alpha_from_spatial(cfm, t + ht, data).reshape(m, 5, 3)[:, 0]
    a_tm = alpha_from_spatial(cfm, t - ht, data).reshape(m, 5, 3)[:, 0]
    A, P, Q = a_mid[:, 0].T
    dx = (a_mid[:, 1] - a_mid[:, 2]) / (2 * scale[:, None])
    dy = (a_mid[:, 3] - a_mid[:, 4]) / (2 * scale[:, None])
    dt = (a_tp - a_tm) / (2 * ht)
    return A * (dx[:, 2] - dy[:, 1]) + P * (dy[:, 0] - dt[:, 2]) + Q * (dt[:, 1] - dx[:, 0])


def contact_grid(model: TorusModel, nxy=50, nt=20, half_width=None):
    """Uniform ``nxy x nxy`` plane grid over ``[-half_width, half_width]^2`` and ``nt`` times in ``[-1, 1]``."""
    half_width = model.R_star if half_width is None else half_width
    g = np.linspace(-half_width, half_width, nxy)
    X, Y = np.meshgrid(g, g, indexing="ij")
    return np.linspace(-1.0, 1.0, nt), np.stack([X.ravel(), Y.ravel()], axis=1)


def verify_contact_condition(cfm: ContactFormModel, ts, pts, cross_check=8, data=None):
    """Minimum of the ``alpha ^ d alpha`` density over the evaluable part of the grid.

    Also certifies the Reeb field at every evaluable grid point and compares
    the density formula with :func:`curl_density` on ``cross_check`` points.
    """
    data = cfm.spatial(pts) if data is None else data
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    ok = data.evaluable
    sub = SpatialData(data.pts[ok], data.evaluable[ok], data.beta0[ok], data.beta1[ok],
                      data.h[ok], data.density[ok])
    dens = contact_densities(cfm, ts, sub)
    details = {
        "eps": cfm.eps,
        "source": cfm.source,
        "grid_points": int(len(ts) * len(pts)),
        "evaluated": int(dens.size),
        "skipped_plane_points": int(np.count_nonzero(~ok)),
        "h_abs_max": float(np.max(np.abs(sub.h))) if len(sub.h) else 0.0,
    }
    if dens.size == 0:
        return make_report("contact condition", [], 0.0, details=details)
    min_density = float(dens.min())
    details["min_density"] = min_density

    if cross_check and np.all(dens > 0):
        rng = np.random.default_rng(0)
        pick = rng.choice(len(sub.pts), size=min(cross_check, len(sub.pts)), replace=False)
        tpick = rng.choice(ts, size=len(pick))
        fd = np.array([curl_density(cfm, t, p)[0] for t, p in zip(tpick, sub.pts[pick])])
        formula = np.array([contact_densities(cfm, [t], _take(sub, [i]))[0, 0]
                            for t, i in zip(tpick, pick)])
        details["curl_cross_check_rel"] = float(np.max(np.abs(fd - formula) / np.abs(formula)))

    if np.all(dens > 0):
        grad_h = _grad_h(cfm, sub)
        worst_alpha, worst_contraction, worst_spatial = 0.0, 0.0, 0.0
        for t in ts:
            R, alpha_R, contraction = _reeb_from(cfm, t, sub, grad_h)
            worst_alpha = max(worst_alpha, float(np.max(np.abs(alpha_R - 1))))
            worst_contraction = max(worst_contraction, float(np.max(contraction)))
            worst_spatial = max(worst_spatial, float(np.max(np.abs(R[:, 1:]))))
        details.update({
            "reeb_alpha_defect": worst_alpha,
            "reeb_contraction_defect": worst_contraction,
            "reeb_spatial_max": worst_spatial,
        })
    # the report's defect is the negative part of the density
    rep = make_report("contact condition", [max(0.0, -min_density)], 0.0, details=details)
    rep.passed = min_density > 0
    rep.max_defect = -min_density
    return rep


def _take(data, idx):
    idx = np.asarray(idx)
    return SpatialData(data.pts[idx], data.evaluable[idx], data.beta0[idx], data.beta1[idx],
                       data.h[idx], data.density[idx])


def _grad_h(cfm, sub):
    grads = np.zeros_like(sub.pts)
    for ch, idx in cfm._groups(sub.pts):
        grads[idx] = exactness_gradients(cfm.model, ch, sub.pts[idx], 1.0)
    return grads


def density_positive(cfm: ContactFormModel, ts, data: SpatialData) -> bool:
    ok = data.evaluable
    sub = _take(data, np.flatnonzero(ok))
    return bool(np.all(contact_densities(cfm, ts, sub) > 0))


def critical_eps(cfm: ContactFormModel, ts, pts, lo=None, hi=1e6, rel_tol=1e-10):
    """Smallest ``eps`` at which the contact condition fails on the grid, by bisection.

    Returns ``inf`` when no failure occurs below ``hi``. The flow data are
    computed once: on the proxy neither ``h`` nor ``w`` depends on ``eps``,
    and on the model charts ``h`` vanishes.
    """
    data = cfm.spatial(pts)

    def fails(eps):
        trial = replace(cfm, model=cfm.model.with_(eps=eps))
        return not density_positive(trial, ts, data)

    lo = 1e-12 if lo is None else lo
    if not fails(hi):
        return float("inf")
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if fails(mid):
            hi = mid
        else:
            lo = mid
    return hi
