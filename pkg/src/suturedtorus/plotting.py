"""Static SVG figures: Hamiltonian level sets and the gluing diagram."""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .gluing import FAMILIES, GluingData  # noqa: E402
from .model import TorusModel  # noqa: E402

PLOT_KINDS = ("levelsets", "gluing")

_STYLE = {
    "svg.hashsalt": "suturedtorus",
    "svg.fonttype": "none",
    "path.simplify": False,
}

_COLORS = {
    "a_plus": "tab:red",
    "a_minus": "tab:orange",
    "b_plus": "tab:blue",
    "b_minus": "tab:cyan",
    "c_plus": "tab:green",
    "c_minus": "tab:olive",
}


def _to_svg(fig):
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def _piecewise_H(model: TorusModel, X, Y):
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    r = np.hypot(pts[:, 0], pts[:, 1])
    out = model.outer_chart.H(pts)
    inner = r < model.r_sing
    out[inner] = model.smoothing_chart.H(pts[inner])
    return out.reshape(X.shape)


def levelsets_svg(model: TorusModel, extent=None, resolution=301, levels=25):
    """Level sets of the unsmoothed outer Hamiltonian (left) and the smoothed one (right)."""
    extent = 2.0 * model.r_sing if extent is None else extent
    g = np.linspace(-extent, extent, resolution)
    X, Y = np.meshgrid(g, g)
    H_sing = model.outer_chart.H(np.stack([X.ravel(), Y.ravel()], axis=1)).reshape(X.shape)
    H = _piecewise_H(model, X, Y)
    bound = float(np.max(np.abs(H_sing)))
    lv = np.linspace(-bound, bound, levels)
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, 2, figsize=(9, 4.5))
        for ax, Z, title in ((axes[0], H_sing, "outer Hamiltonian"), (axes[1], H, "smoothed Hamiltonian")):
            cs = ax.contour(X, Y, Z, levels=lv, cmap="coolwarm", linewidths=0.8)
            cs.set_gid(f"contours-{title.split()[0]}")
            ax.add_patch(plt.Circle((0, 0), model.r_sing, fill=False, ls="--", lw=0.6, color="gray"))
            ax.set_aspect("equal")
            ax.set_title(title)
        sp = model.saddle_centers
        axes[1].plot(sp[:, 0], sp[:, 1], "k+", ms=8, gid="saddles")
        fig.suptitle(f"n = {model.n}")
        return _to_svg(fig)


def gluing_svg(gd: GluingData):
    """Arc families with the regions ``P_plus``, ``P_minus`` and ``D`` shaded."""
    model = gd.model
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(6, 6))
        ax.fill(gd.D[:, 0], gd.D[:, 1], color="0.9", gid="region-D", zorder=0)
        ax.fill(gd.P_plus[:, 0], gd.P_plus[:, 1], color="tab:red", alpha=0.15, gid="region-P_plus")
        ax.fill(gd.P_minus[:, 0], gd.P_minus[:, 1], color="tab:blue", alpha=0.15, gid="region-P_minus")
        for name in FAMILIES:
            for k, arc in enumerate(gd.arcs[name]):
                (line,) = ax.plot(arc[:, 0], arc[:, 1], color=_COLORS[name], lw=1.2,
                                  label=name if k == 0 else None)
                line.set_gid(f"arc-{name}-{k}")
        th = np.linspace(0, 2 * np.pi, 361)
        for r, style in ((model.r_sing, ":"), (model.R, "--")):
            ax.plot(r * np.cos(th), r * np.sin(th), style, color="gray", lw=0.6)
        ax.set_aspect("equal")
        ax.legend(loc="upper right", fontsize=7)
        ax.set_title(f"gluing data, n = {model.n}")
        return _to_svg(fig)
