"""Construction parameters, charts and closed-form fields on the disk.

The plane is covered by three kinds of charts:

* the outer chart ``r >= r_sing`` with ``H = mu r^2 cos(n theta)`` and
  ``beta = 1/2 r^2 dtheta``;
* one square saddle chart per saddle ``p_k`` with ``H = a u v`` and
  ``beta = eps/2 (u dv - v du)`` in the offset coordinates ``(u, v) = x - p_k``;
* the smoothing chart inside ``D(r_sing)``, where ``H = mu Re(z^n - c z)`` and
  the 1-form has no closed form.

All chart 1-forms have constant area density, which the flow engine relies on.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateSaddle,
    InvalidModel,
    NoFormulaInSmoothingChart,
    PointOutsideCharts,
)

_FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)
# second derivatives difference an already-differenced gradient
_FD_STEP2 = np.finfo(float).eps ** 0.25


@dataclass(frozen=True)
class Tolerances:
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-12
    newton: float = 1e-11
    newton_maxiter: int = 50
    dedup: float = 1e-6
    quad: float = 1e-10
    pullback: float = 1e-6
    flow: float = 1e-6
    action: float = 1e-12
    degenerate: float = 1e-9
    identity: float = 1e-12
    df: float = 1e-6
    fd_step: float = _FD_STEP

    def to_dict(self):
        return asdict(self)


class RegionKind(enum.Enum):
    OUTER_EXACT = "OuterExact"
    SADDLE_CHART = "SaddleChart"
    POLY_SMOOTHING = "PolySmoothing"
    ANNULUS_VR = "Annulus_VR"
    NO_CHART = "NoChart"


@dataclass(frozen=True)
class Region:
    kind: RegionKind
    index: int | None = None

    def __str__(self):
        if self.index is None:
            return self.kind.value
        return f"{self.kind.value}({self.index})"


def _as_points(pts):
    arr = np.asarray(pts, dtype=float)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != 2:
        raise ValueError(f"expected plane points with 2 coordinates, got shape {arr.shape}")
    return arr, single


class Chart:
    """Closed-form data on one chart, vectorized over ``(m, 2)`` point arrays.

    Subclasses provide ``H`` and, where available, closed-form ``grad`` and
    ``hess``; otherwise central differences are used.
    """

    region: Region
    density_value: float

    def contains(self, pts):
        raise NotImplementedError

    def H(self, pts):
        raise NotImplementedError

    def grad(self, pts):
        pts = np.atleast_2d(pts)
        out = np.empty_like(pts)
        for i in range(2):
            h = _FD_STEP * np.maximum(1.0, np.abs(pts[:, i]))
            e = np.zeros(2)
            e[i] = 1.0
            out[:, i] = (self.H(pts + h[:, None] * e) - self.H(pts - h[:, None] * e)) / (2 * h)
        return out

    def hess(self, pts):
        pts = np.atleast_2d(pts)
        out = np.empty(pts.shape[:1] + (2, 2))
        for j in range(2):
            h = _FD_STEP2 * np.maximum(1.0, np.abs(pts[:, j]))
            e = np.zeros(2)
            e[j] = 1.0
            out[:, :, j] = (self.grad(pts + h[:, None] * e) - self.grad(pts - h[:, None] * e)) / (2 * h[:, None])
        return 0.5 * (out + np.swapaxes(out, 1, 2))

    def beta(self, pts):
        """The area-scaled 1-form (the one whose exterior derivative is the area form)."""
        raise NotImplementedError

    def beta_jacobian(self, pts):
        """``d(p, q)/d(x, y)`` of :meth:`beta`, shape ``(m, 2, 2)``."""
        raise NotImplementedError

    def density(self, pts):
        pts = np.atleast_2d(pts)
        return np.full(pts.shape[0], self.density_value)

    # X = (-H_y, H_x) / w solves i_X dbeta = -dH for dbeta = w dx^dy.
    def vector_field(self, pts):
        g = self.grad(pts)
        return np.stack([-g[:, 1], g[:, 0]], axis=1) / self.density_value

    def field_jacobian(self, pts):
        hs = self.hess(pts)
        out = np.empty_like(hs)
        out[:, 0, :] = -hs[:, 1, :]
        out[:, 1, :] = hs[:, 0, :]
        return out / self.density_value

    def beta_of_field(self, pts):
        b = self.beta(pts)
        X = self.vector_field(pts)
        return np.einsum("ij,ij->i", b, X)


class OuterChart(Chart):
    def __init__(self, n, mu, r_sing, bounded=True):
        self.n = n
        self.mu = mu
        self.r_sing = r_sing
        self.bounded = bounded
        self.region = Region(RegionKind.OUTER_EXACT)
        self.density_value = 1.0

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        if not self.bounded:
            return r > 0
        return r >= self.r_sing

    def H(self, pts):
        pts = np.atleast_2d(pts)
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        th = np.arctan2(pts[:, 1], pts[:, 0])
        return self.mu * r2 * np.cos(self.n * th)

    def _angular(self, pts):
        n = self.n
        th = np.arctan2(pts[:, 1], pts[:, 0])
        c, s = np.cos(th), np.sin(th)
        cn, sn = np.cos(n * th), np.sin(n * th)
        A = 2 * c * cn + n * s * sn
        B = 2 * s * cn - n * c * sn
        dA = (n * n - 2) * s * cn - n * c * sn
        dB = (2 - n * n) * c * cn - n * s * sn
        return c, s, A, B, dA, dB

    def grad(self, pts):
        pts = np.atleast_2d(pts)
        r = np.hypot(pts[:, 0], pts[:, 1])
        _, _, A, B, _, _ = self._angular(pts)
        return self.mu * np.stack([r * A, r * B], axis=1)

    def hess(self, pts):
        # grad = mu r (A(th), B(th)); d/dx = c d/dr - s/r d/dth, d/dy = s d/dr + c/r d/dth
        pts = np.atleast_2d(pts)
        c, s, A, B, dA, dB = self._angular(pts)
        out = np.empty((pts.shape[0], 2, 2))
        out[:, 0, 0] = c * A - s * dA
        out[:, 0, 1] = s * A + c * dA
        out[:, 1, 0] = c * B - s * dB
        out[:, 1, 1] = s * B + c * dB
        return self.mu * out

    def beta(self, pts):
        pts = np.atleast_2d(pts)
        return 0.5 * np.stack([-pts[:, 1], pts[:, 0]], axis=1)

    def beta_jacobian(self, pts):
        pts = np.atleast_2d(pts)
        out = np.zeros((pts.shape[0], 2, 2))
        out[:, 0, 1] = -0.5
        out[:, 1, 0] = 0.5
        return out


class SaddleChart(Chart):
    def __init__(self, index, center, half_width, a, eps):
        self.index = index
        self.center = np.asarray(center, dtype=float)
        self.half_width = half_width
        self.a = a
        self.eps = eps
        self.region = Region(RegionKind.SADDLE_CHART, index)
        self.density_value = eps

    def local(self, pts):
        return np.atleast_2d(pts) - self.center

    def contains(self, pts):
        uv = self.local(pts)
        return np.max(np.abs(uv), axis=1) <= self.half_width

    def H(self, pts):
        uv = self.local(pts)
        return self.a * uv[:, 0] * uv[:, 1]

    def grad(self, pts):
        uv = self.local(pts)
        return self.a * uv[:, ::-1].copy()

    def hess(self, pts):
        m = np.atleast_2d(pts).shape[0]
        out = np.zeros((m, 2, 2))
        out[:, 0, 1] = out[:, 1, 0] = self.a
        return out

    def unscaled_beta(self, pts):
        uv = self.local(pts)
        return 0.5 * np.stack([-uv[:, 1], uv[:, 0]], axis=1)

    def beta(self, pts):
        return self.eps * self.unscaled_beta(pts)

    def beta_jacobian(self, pts):
        m = np.atleast_2d(pts).shape[0]
        out = np.zeros((m, 2, 2))
        out[:, 0, 1] = -0.5 * self.eps
        out[:, 1, 0] = 0.5 * self.eps
        return out


class SmoothingChart(Chart):
    """Harmonic smoothing ``mu Re(z^n - c z)`` inside ``D(r_sing)``.

    With ``proxy=True`` the chart carries the stand-in form
    ``1/2 (x dy - y dx)`` on the whole plane, giving a globally coherent
    (H, beta) pair whose flow is exact symplectic but not adapted
    (``beta(X_H) != H``).
    """

    def __init__(self, n, mu, c, r_sing, proxy=False, escape_radius=None):
        self.n = n
        self.mu = mu
        self.c = c
        self.r_sing = r_sing
        self.proxy = proxy
        self.escape_radius = escape_radius
        self.region = Region(RegionKind.POLY_SMOOTHING)
        self.density_value = 1.0

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        if self.proxy:
            if self.escape_radius is not None:
                return np.hypot(pts[:, 0], pts[:, 1]) < self.escape_radius
            return np.all(np.isfinite(pts), axis=1)
        return np.hypot(pts[:, 0], pts[:, 1]) < self.r_sing

    def H(self, pts):
        pts = np.atleast_2d(pts)
        z = pts[:, 0] + 1j * pts[:, 1]
        return self.mu * np.real(z**self.n - self.c * z)

    # For holomorphic g: d/dx Re g = Re g', d/dy Re g = -Im g'.
    def grad(self, pts):
        pts = np.atleast_2d(pts)
        z = pts[:, 0] + 1j * pts[:, 1]
        d1 = self.n * z ** (self.n - 1) - self.c
        return self.mu * np.stack([d1.real, -d1.imag], axis=1)

    def hess(self, pts):
        pts = np.atleast_2d(pts)
        z = pts[:, 0] + 1j * pts[:, 1]
        d2 = self.n * (self.n - 1) * z ** (self.n - 2)
        out = np.empty((pts.shape[0], 2, 2))
        out[:, 0, 0] = d2.real
        out[:, 0, 1] = out[:, 1, 0] = -d2.imag
        out[:, 1, 1] = -d2.real
        return self.mu * out

    def _require_proxy(self):
        if not self.proxy:
            raise NoFormulaInSmoothingChart("beta has no closed form in the smoothing chart")

    def beta(self, pts):
        self._require_proxy()
        pts = np.atleast_2d(pts)
        return 0.5 * np.stack([-pts[:, 1], pts[:, 0]], axis=1)

    def beta_jacobian(self, pts):
        self._require_proxy()
        m = np.atleast_2d(pts).shape[0]
        out = np.zeros((m, 2, 2))
        out[:, 0, 1] = -0.5
        out[:, 1, 0] = 0.5
        return out

    def density(self, pts):
        self._require_proxy()
        return super().density(pts)

    def vector_field(self, pts):
        self._require_proxy()
        return super().vector_field(pts)


def default_c(n, r_sing):
    """Smoothing coefficient placing the saddle ring at radius ``r_sing / 2``."""
    return n * (0.5 * r_sing) ** (n - 1)


@dataclass(frozen=True)
class TorusModel:
    n: int = 3
    mu: float = 0.25
    eps: float = 0.5
    a: float = 1.0
    N: float = 1.0
    r_sing: float = 1.0
    R: float = 8.0
    R_star: float = 32.0
    c: float | None = None
    tol: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.c is None:
            object.__setattr__(self, "c", default_c(self.n, self.r_sing))
        if int(self.n) != self.n or self.n < 2:
            raise InvalidModel(f"n must be an integer >= 2, got {self.n}")
        for name in ("mu", "eps", "a", "N", "c"):
            if not getattr(self, name) > 0:
                raise InvalidModel(f"{name} must be positive")
        if not 0 < self.r_sing < self.R < self.R_star:
            raise InvalidModel("radii must satisfy 0 < r_sing < R < R_star")
        if self.saddle_radius >= self.r_sing:
            raise InvalidModel(
                f"saddle ring radius {self.saddle_radius:.6g} is not inside D(r_sing={self.r_sing})"
            )

    @property
    def saddle_radius(self):
        return (self.c / self.n) ** (1.0 / (self.n - 1))

    @property
    def saddle_centers(self):
        k = np.arange(self.n - 1)
        ang = 2 * np.pi * k / (self.n - 1)
        rho = self.saddle_radius
        return np.stack([rho * np.cos(ang), rho * np.sin(ang)], axis=1)

    @property
    def chart_half_width(self):
        rho = self.saddle_radius
        # keeps every square inside the open disk D(r_sing)
        fit = 0.9 * (self.r_sing - rho) / math.sqrt(2)
        if self.n - 1 < 2:
            return fit
        # axis-aligned squares are disjoint when separated in the sup norm
        c = self.saddle_centers
        gaps = np.max(np.abs(c[:, None, :] - c[None, :, :]), axis=2)
        dmin = float(np.min(gaps[~np.eye(len(c), dtype=bool)]))
        return min(0.4 * dmin, fit)

    @cached_property
    def outer_chart(self):
        return OuterChart(self.n, self.mu, self.r_sing)

    @cached_property
    def saddle_charts(self):
        hw = self.chart_half_width
        return tuple(
            SaddleChart(k + 1, p, hw, self.a, self.eps) for k, p in enumerate(self.saddle_centers)
        )

    @cached_property
    def smoothing_chart(self):
        return SmoothingChart(self.n, self.mu, self.c, self.r_sing)

    def proxy_chart(self, escape_radius=None):
        """Smoothing chart with the stand-in form; with ``escape_radius`` the
        chart is the open disk of that radius."""
        return SmoothingChart(self.n, self.mu, self.c, self.r_sing, proxy=True,
                              escape_radius=escape_radius)

    def extended_outer_chart(self):
        """Outer formulas on the punctured plane (the unsmoothed Hamiltonian)."""
        return OuterChart(self.n, self.mu, self.r_sing, bounded=False)

    def chart(self, region: Region) -> Chart:
        if region.kind is RegionKind.OUTER_EXACT or region.kind is RegionKind.ANNULUS_VR:
            return self.outer_chart
        if region.kind is RegionKind.SADDLE_CHART:
            return self.saddle_charts[region.index - 1]
        if region.kind is RegionKind.POLY_SMOOTHING:
            return self.smoothing_chart
        raise PointOutsideCharts(f"no chart for region {region}")

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        d = {k: getattr(self, k) for k in ("n", "mu", "eps", "a", "N", "r_sing", "R", "R_star", "c")}
        d["tolerances"] = self.tol.to_dict()
        return d


# --------------------------------------------------------------------------
# region classification
# --------------------------------------------------------------------------

def classify_many(model: TorusModel, pts):
    """Chart assignment for an ``(m, 2)`` array.

    Returns ``(kind_codes, index)`` where codes are 0 outer, 1 saddle,
    2 smoothing, -1 no chart; ``index`` is the saddle label or 0.
    """
    pts, _ = _as_points(pts)
    m = pts.shape[0]
    codes = np.full(m, -1, dtype=int)
    index = np.zeros(m, dtype=int)
    finite = np.all(np.isfinite(pts), axis=1)
    r = np.hypot(pts[:, 0], pts[:, 1])
    codes[finite & (r < model.r_sing)] = 2
    codes[finite & (r >= model.r_sing)] = 0
    for ch in model.saddle_charts:
        hit = finite & ch.contains(pts) & (codes != 1)
        codes[hit] = 1
        index[hit] = ch.index
    return codes, index


_CODE_KIND = {0: RegionKind.OUTER_EXACT, 1: RegionKind.SADDLE_CHART, 2: RegionKind.POLY_SMOOTHING}


def classify_region(model: TorusModel, pt) -> Region:
    """Priority: SaddleChart > OuterExact > PolySmoothing; NoChart for non-finite input."""
    codes, index = classify_many(model, np.reshape(np.asarray(pt, dtype=float), (1, 2)))
    code = int(codes[0])
    if code < 0:
        return Region(RegionKind.NO_CHART)
    if code == 1:
        return Region(RegionKind.SADDLE_CHART, int(index[0]))
    return Region(_CODE_KIND[code])


def in_annulus(model: TorusModel, pts, inner=None):
    """Membership in the annulus ``inner <= r <= R_star`` (``inner`` defaults to ``R``)."""
    pts, _ = _as_points(pts)
    r = np.hypot(pts[:, 0], pts[:, 1])
    lo = model.R if inner is None else inner
    return (r >= lo) & (r <= model.R_star)


def _chart_for_point(model, pt):
    region = classify_region(model, pt)
    if region.kind is RegionKind.NO_CHART:
        raise PointOutsideCharts(f"point {pt!r} lies in no chart")
    return model.chart(region)


# --------------------------------------------------------------------------
# fields
# --------------------------------------------------------------------------

def eval_H(model: TorusModel, pt) -> float:
    ch = _chart_for_point(model, pt)
    return float(ch.H(np.reshape(np.asarray(pt, dtype=float), (1, 2)))[0])


def eval_beta(model: TorusModel, pt):
    """Coefficients ``(p, q)`` of ``1/2 (x dy - y dx)`` in the chart containing ``pt``.

    In a saddle chart the coordinates are the chart offsets and the value
    carries no ``eps`` factor; the area-scaled form is ``eps`` times it.
    """
    pt = np.reshape(np.asarray(pt, dtype=float), (1, 2))
    ch = _chart_for_point(model, pt[0])
    if isinstance(ch, SmoothingChart):
        raise NoFormulaInSmoothingChart("beta is not given in closed form inside D(r_sing)")
    if isinstance(ch, SaddleChart):
        return ch.unscaled_beta(pt)[0]
    return ch.beta(pt)[0]


class PlaneField:
    """The Hamiltonian of a model, dispatched chart by chart."""

    def __init__(self, model: TorusModel):
        self.model = model

    def chart_at(self, pt) -> Chart:
        return _chart_for_point(self.model, pt)

    def __call__(self, pt):
        return eval_H(self.model, pt)

    def gradient(self, pt):
        pt = np.reshape(np.asarray(pt, dtype=float), (1, 2))
        return self.chart_at(pt[0]).grad(pt)[0]


class OneForm:
    """The area-scaled 1-form of a model (``eps``-scaled in saddle charts)."""

    def __init__(self, model: TorusModel):
        self.model = model

    def chart_at(self, pt) -> Chart:
        return _chart_for_point(self.model, pt)

    def __call__(self, pt):
        pt = np.reshape(np.asarray(pt, dtype=float), (1, 2))
        return self.chart_at(pt[0]).beta(pt)[0]

    def density(self, pt):
        pt = np.reshape(np.asarray(pt, dtype=float), (1, 2))
        return float(self.chart_at(pt[0]).density(pt)[0])


def saddle_points(model: TorusModel):
    """The ``n - 1`` roots of ``n z^(n-1) = c``, certified as nondegenerate saddles."""
    pts = model.saddle_centers
    ch = model.smoothing_chart
    hs = ch.hess(pts)
    det = hs[:, 0, 0] * hs[:, 1, 1] - hs[:, 0, 1] * hs[:, 1, 0]
    scale = np.sum(hs**2, axis=(1, 2))
    for k, (d, s) in enumerate(zip(det, scale)):
        if not d < -model.tol.degenerate * max(s, 1.0):
            raise DegenerateSaddle(f"saddle {k + 1} has Hessian determinant {d:.3e}")
    return pts


def sample_density_positive(beta: OneForm, pts) -> bool:
    """Sampled check that the area density of d(beta) is positive."""
    return all(beta.density(p) > 0 for p in np.atleast_2d(pts))
