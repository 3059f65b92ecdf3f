"""Figures for reports: circle families, webs and meshes.

All functions draw with the non-interactive Agg backend and write a PNG.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .families import CircleFamily, circle_at  # noqa: E402
from .io import PALETTE  # noqa: E402
from .param import Mesh  # noqa: E402
from .webs import WebInstance  # noqa: E402


def _axes(title: str):
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(projection="3d")
    ax.set_title(title)
    return fig, ax


def _equal(ax, pts: np.ndarray) -> None:
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    if len(pts) == 0:
        return
    lo, hi = np.percentile(pts, 2, axis=0), np.percentile(pts, 98, axis=0)
    c, h = 0.5 * (lo + hi), 0.55 * float(np.max(hi - lo)) + 1e-9
    ax.set_xlim(c[0] - h, c[0] + h)
    ax.set_ylim(c[1] - h, c[1] + h)
    ax.set_zlim(c[2] - h, c[2] + h)


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def plot_mesh(mesh: Mesh, path, title: str = "cyclide") -> Path:
    fig, ax = _axes(title)
    V, T = mesh.vertices, mesh.triangles
    if len(T):
        ax.plot_trisurf(V[:, 0], V[:, 1], V[:, 2], triangles=T, color="#9ecae1", alpha=0.6, linewidth=0.1, edgecolor="#3182bd")
        _equal(ax, V)
    return _save(fig, path)


def plot_families(
    fams: list[CircleFamily], path, mesh: Mesh | None = None, per_family: int = 8, n: int = 96, arcs=()
) -> Path:
    """A few circles of every family, optionally over a translucent mesh.

    ``arcs`` are extra ``(n, 3)`` polylines drawn in black, such as the
    boundary of a designed patch.
    """
    fig, ax = _axes("circle families")
    pts = []
    if mesh is not None and len(mesh.triangles):
        V = mesh.vertices
        ax.plot_trisurf(V[:, 0], V[:, 1], V[:, 2], triangles=mesh.triangles, color="#dddddd", alpha=0.25, linewidth=0)
        pts.append(V)
    for F in fams:
        color = PALETTE[F.id % len(PALETTE)]
        for k in range(per_family):
            s = np.tan(-np.pi / 2 + (k + 0.5) * np.pi / per_family)
            c = circle_at(F, s)
            if not c.is_real():
                continue
            xyz = c.sample(n)
            xyz = xyz[np.all(np.isfinite(xyz), axis=1)] if len(xyz) else xyz
            if len(xyz) < 2:
                continue
            ax.plot(xyz[:, 0], xyz[:, 1], xyz[:, 2], color=color, lw=1.0, label=f"family {F.id}" if k == 0 else None)
            pts.append(xyz)
    for a in arcs:
        ax.plot(a[:, 0], a[:, 1], a[:, 2], color="k", lw=2.0)
    if pts:
        _equal(ax, np.vstack(pts))
        ax.legend(loc="upper left", fontsize=8)
    return _save(fig, path)


def plot_web(web: WebInstance, path, n: int = 96) -> Path:
    fig, ax = _axes(f"{web.type} web on families {web.triple}")
    nodes = web.node_array()
    for fid, xyz in web.polylines(n):
        xyz = xyz[np.all(np.isfinite(xyz), axis=1)]
        if len(xyz) >= 2:
            ax.plot(xyz[:, 0], xyz[:, 1], xyz[:, 2], color=PALETTE[fid % len(PALETTE)], lw=0.8)
    if len(nodes):
        ax.scatter(nodes[:, 0], nodes[:, 1], nodes[:, 2], s=6, color="k")
        _equal(ax, nodes)
    return _save(fig, path)
