"""Adaptive Dormand-Prince 5(4) integration of batched autonomous systems.

All trajectories in a batch share one step size; the error norm is the
worst component over the batch, so every trajectory meets the tolerance.
"""
from dataclasses import dataclass

import numpy as np

from .errors import StepFailure

# Dormand & Prince (1980), 5th order propagation with FSAL
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B - _B_LOW

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass
class IntegrationStats:
    accepted: int = 0
    rejected: int = 0
    evaluations: int = 0


def _initial_step(rhs, y0, f0, t_end, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    return min(abs(t_end), h)


def integrate(rhs, y0, t_end, rtol=1e-10, atol=1e-12, on_step=None, max_steps=200000):
    """Integrate ``y' = rhs(y)`` from 0 to ``t_end`` for a batch ``y0`` of shape ``(m, d)``.

    ``on_step(t, y)`` is called after every accepted step.

    Returns
    -------
    y : ndarray
        State at ``t_end``.
    stats : IntegrationStats
    """
    y = np.array(y0, dtype=float)
    stats = IntegrationStats()
    if t_end == 0:
        return y, stats
    direction = np.sign(t_end)
    span = abs(t_end)
    f = rhs(y)
    stats.evaluations += 1
    h = _initial_step(rhs, y, f, span, rtol, atol)
    t = 0.0
    k = [None] * 7
    while t < span:
        if stats.accepted + stats.rejected >= max_steps:
            raise StepFailure(f"exceeded {max_steps} steps at t={t:.6g}")
        last = t + h >= span
        if last:
            h = span - t
        if h <= 1e-14 * max(t, span):
            raise StepFailure(f"step size underflow at t={t:.6g}")
        hs = direction * h
        k[0] = f
        for i in range(1, 7):
            acc = sum(a * k[j] for j, a in enumerate(_A[i]) if a != 0.0)
            k[i] = rhs(y + hs * acc)
        stats.evaluations += 6
        y_new = y + hs * sum(b * k[j] for j, b in enumerate(_B) if b != 0.0)
        err = hs * sum(e * k[j] for j, e in enumerate(_E) if e != 0.0)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(np.abs(err) / scale)) if err.size else 0.0
        if not np.all(np.isfinite(y_new)):
            err_norm = np.inf
        if err_norm <= 1.0:
            t = span if last else t + h
            y = y_new
            f = k[6]
            stats.accepted += 1
            if on_step is not None:
                on_step(direction * t, y)
            factor = _MAX_FACTOR if err_norm == 0 else min(
                _MAX_FACTOR, _SAFETY * err_norm ** -0.2
            )
            h = h * max(factor, 1.0)
        else:
            stats.rejected += 1
            if not np.isfinite(err_norm):
                h *= _MIN_FACTOR
            else:
                h *= max(_MIN_FACTOR, _SAFETY * err_norm ** -0.2)
    return y, stats
