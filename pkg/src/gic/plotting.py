"""Figures written next to the CLI's delimited output.

Uses the object-oriented Agg canvas directly, so no global pyplot state is
touched and repeated renders of the same data are byte-identical.
"""

from __future__ import annotations

import os

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .corners import RegionBoundary
from .transport import TriangularMap, jacobian_diagonal

__all__ = ["plot_region", "plot_knothe"]

_METADATA = {
    ".png": {"Software": None},
    ".pdf": {"Creator": None, "Producer": None, "CreationDate": None},
    ".svg": {"Creator": None, "Date": None},
}


def _save(fig: Figure, path) -> None:
    ext = os.path.splitext(str(path))[1].lower()
    if ext not in _METADATA:
        raise ValueError(f"unsupported figure format {ext!r}; use .png, .pdf or .svg")
    FigureCanvasAgg(fig)
    kwargs = {"metadata": _METADATA[ext]}
    if ext == ".svg":
        import matplotlib

        with matplotlib.rc_context({"svg.hashsalt": "gic"}):
            fig.savefig(path, **kwargs)
    else:
        fig.savefig(path, dpi=120, **kwargs)


def plot_region(boundary: RegionBoundary, path, units: str = "nats") -> None:
    """Outer bound polyline; uncertified segments dashed, corner points circled."""
    rows = boundary.rows(units)
    fig = Figure(figsize=(4.5, 4.0))
    ax = fig.add_subplot()
    for (x0, y0, cert), (x1, y1, _) in zip(rows[:-1], rows[1:]):
        ax.plot([x0, x1], [y0, y1], color="k", linestyle="-" if cert else "--", linewidth=1.4)
    corners = rows[1:3]
    ax.plot([r[0] for r in corners], [r[1] for r in corners], "o", markerfacecolor="none",
            markeredgecolor="C3", markersize=8)
    ax.set_xlim(0, None)
    ax.set_ylim(0, None)
    ax.set_xlabel(f"R1 [{units}]")
    ax.set_ylabel(f"R2 [{units}]")
    ax.set_title(f"{boundary.regime.value.replace('_', ' ')} interference")
    fig.tight_layout()
    _save(fig, path)


def plot_knothe(tmap: TriangularMap, path) -> None:
    """Each map component along its own axis (other source coordinates at the mean)
    together with its diagonal Jacobian entry."""
    d = tmap.dim
    fig = Figure(figsize=(4.0 * d, 5.5))
    z = np.linspace(-4.0, 4.0, 401)
    for k in range(d):
        pts = np.tile(tmap.mu, (z.size, 1))
        pts[:, k] = tmap.mu[k] + tmap.sigma * z
        vals = tmap.component(k, pts)
        diag = jacobian_diagonal(tmap, pts)[:, k]
        top = fig.add_subplot(2, d, k + 1)
        top.plot(pts[:, k], vals, color="C0", label=f"F{k + 1}")
        top.plot(pts[:, k], pts[:, k], color="0.6", linestyle=":", label="identity")
        top.set_title(f"coordinate {k + 1}")
        top.legend(loc="upper left", fontsize=8)
        bottom = fig.add_subplot(2, d, d + k + 1, sharex=top)
        bottom.plot(pts[:, k], diag, color="C1")
        bottom.axhline(1.0, color="0.6", linestyle=":")
        bottom.set_xlabel("source coordinate")
        bottom.set_ylabel(f"dF{k + 1}/dy{k + 1}")
    fig.tight_layout()
    _save(fig, path)
