"""Hexagonal 3-webs of circles on a cyclide.

Three circle families are classified from their cone structure, the
hexagonal closure condition is checked numerically, and discrete webs
are marched on the lattice ``node(u, v) = c2[u] ^ c1[v]`` whose third
family curves are ``c3[u - v]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Literal

import numpy as np

from .cyclide import Cyclide, from_pencil
from .families import CircleFamily, FamilyError, circle_through_point, intersect_circles
from .moebius import MCircle, point_along

WebType = Literal["Type1", "Type2", "Type3", "Type4", "Type5", "NonWeb"]
WEB_TYPES: tuple[WebType, ...] = ("Type1", "Type2", "Type3", "Type4", "Type5", "NonWeb")


class WebError(ValueError):
    pass


class UnsupportedTripleError(WebError):
    """Three single families: no cyclide carries them."""


class MarchingError(WebError):
    """The construction left the real part of the surface."""


def _partners(a: CircleFamily, b: CircleFamily) -> bool:
    return a.partner == b.id and b.partner == a.id


def classify_triple(f1: CircleFamily, f2: CircleFamily, f3: CircleFamily) -> WebType:
    """Web type of three families of one cyclide.

    Raises
    ------
    WebError
        If a family is repeated.
    UnsupportedTripleError
        If all three families are single.
    """
    fams = (f1, f2, f3)
    if len({f.id for f in fams}) != 3:
        raise WebError("the three families must be distinct")
    singles = [f for f in fams if f.is_single]
    others = [f for f in fams if not f.is_single]
    if len(singles) == 3:
        raise UnsupportedTripleError("three single families do not occur on one cyclide")
    if len(singles) == 2:
        return "Type5"
    if len(singles) == 1:
        return "Type3" if _partners(*others) else "Type4"
    pair = next(((a, b) for a, b in combinations(fams, 2) if _partners(a, b)), None)
    if pair is None:
        return "Type1"
    return "Type2" if pair[0].kind == "special" else "NonWeb"


def census(fams: list[CircleFamily]) -> dict[tuple[int, int, int], WebType]:
    """Web type of every triple (three-single triples are skipped)."""
    out = {}
    for tri in combinations(fams, 3):
        try:
            out[tuple(f.id for f in tri)] = classify_triple(*tri)
        except UnsupportedTripleError:
            continue
    return out


# -- marching primitives -------------------------------------------------------


def _meet(a: MCircle, b: MCircle, near: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Intersection of two circles closest to ``near``."""
    try:
        pts = intersect_circles(a, b, tol)
    except ValueError as exc:
        raise MarchingError("coincident circles") from exc
    pts = [p for p in pts if np.all(np.isfinite(p))]
    if not pts:
        raise MarchingError("circles do not meet in a real point")
    return min(pts, key=lambda p: float(np.linalg.norm(p - near)))


def _through(F: CircleFamily, x: np.ndarray, tol: float = 1e-6) -> MCircle:
    try:
        return circle_through_point(F, x, tol)[1]
    except (FamilyError, ValueError) as exc:
        raise MarchingError(str(exc)) from exc


def closure_defect(D: Cyclide, triple, O, A1) -> float:
    """``|A7 - A1|`` of the hexagon started at ``O`` with ``A1`` on the family-1 circle.

    ``D`` is used to validate the seeds; the families carry their pencil.

    Raises
    ------
    MarchingError
        If an intersection is not real on the way.
    """
    F1, F2, F3 = triple
    O = np.asarray(O, dtype=float)
    A1 = np.asarray(A1, dtype=float)
    for name, x in (("O", O), ("A1", A1)):
        if float(D.residual(x)) > 1e-7:
            raise WebError(f"{name} is not on the cyclide")
    if np.linalg.norm(A1 - O) == 0.0:
        return 0.0
    k = {1: _through(F1, O), 2: _through(F2, O), 3: _through(F3, O)}
    fam = {1: F1, 2: F2, 3: F3}
    A = A1
    # l2 -> k3, l1 -> k2, l3 -> k1, twice
    for step, target in ((2, 3), (1, 2), (3, 1), (2, 3), (1, 2), (3, 1)):
        A = _meet(_through(fam[step], A), k[target], A)
    return float(np.linalg.norm(A - A1))


# -- seeds ----------------------------------------------------------------------


def _tangent(c: MCircle, x: np.ndarray) -> np.ndarray:
    v = c.view
    if v.kind == "line":
        return v.direction
    if v.kind != "circle":
        raise MarchingError("circle has no real points")
    t = np.cross(v.normal, x - v.center)
    return t / np.linalg.norm(t)


def transversality(triple, x) -> float:
    """Smallest ``|sin|`` of the angles between the three circles through ``x``."""
    tans = [_tangent(_through(F, x), x) for F in triple]
    return min(float(np.linalg.norm(np.cross(a, b))) for a, b in combinations(tans, 2))


def circle_perimeter(c: MCircle) -> float:
    v = c.view
    return float(2 * np.pi * v.radius) if v.kind == "circle" else float("inf")


def default_seed(D: Cyclide, triple, N: int, candidates: np.ndarray | None = None):
    """Seed ``(O, A1, delta)``.

    ``O`` maximizes :func:`transversality` over candidate surface points
    (mesh vertices by default), preferring points away from infinity;
    ``A1`` is at arc length ``delta = perimeter / (3 N)`` along ``k1``.
    """
    if candidates is None:
        from .param import sample_mesh

        candidates = sample_mesh(D, 12).vertices
    scale = surface_scale(candidates)
    best, bx = -1.0, None
    for x in candidates:
        if np.linalg.norm(x) > 10 * scale:
            continue
        try:
            tr = transversality(triple, x)
        except (MarchingError, ValueError):
            continue
        if tr > best + 1e-12:
            best, bx = tr, x
    if bx is None:
        raise MarchingError("no admissible seed point")
    k1 = _through(triple[0], bx)
    per = circle_perimeter(k1)
    delta = per / (3 * N) if np.isfinite(per) else scale / (3 * N)
    return bx, point_along(k1, bx, delta), delta


def surface_scale(pts) -> float:
    pts = np.asarray(pts, dtype=float)
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    if len(pts) == 0:
        return 1.0
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


# -- discrete webs ------------------------------------------------------------


@dataclass
class WebInstance:
    """A discrete web: circles ``c1[v]``, ``c2[u]``, ``c3[w]`` and lattice nodes."""

    triple: tuple[int, int, int]
    type: WebType
    O: np.ndarray
    A1: np.ndarray
    N: int
    circles: dict[int, dict[int, MCircle]] = field(default_factory=dict)
    nodes: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    complete: bool = True
    message: str = ""
    sigma: float | None = None
    iterations: int = 0
    closed: bool = False

    def circle_list(self) -> list[tuple[int, float]]:
        """``(family id, s)`` for every circle, ordered by role and index."""
        out = []
        for role in (1, 2, 3):
            for idx in sorted(self.circles.get(role, {})):
                c = self.circles[role][idx]
                out.append((self.triple[role - 1], float(c.s) if c.s is not None else float("nan")))
        return out

    def polylines(self, n: int = 64) -> list[tuple[int, np.ndarray]]:
        """Sampled circles as ``(family id, points)``."""
        out = []
        for role in (1, 2, 3):
            for idx in sorted(self.circles.get(role, {})):
                pts = self.circles[role][idx].sample(n)
                if len(pts):
                    out.append((self.triple[role - 1], pts))
        return out

    def node_array(self) -> np.ndarray:
        return np.array([self.nodes[k] for k in sorted(self.nodes)]).reshape(-1, 3)

    def incidence_defect(self) -> float:
        """Largest distance of a node from the third circle ``c3[u - v]`` through it, in the 5-space."""
        from .moebius import normalize, stereo_lift

        worst = 0.0
        c3 = self.circles.get(3, {})
        for (u, v), x in self.nodes.items():
            w = u - v
            if w in c3:
                X = normalize(stereo_lift(x))
                worst = max(worst, float(np.max(np.abs(c3[w].hyperplanes @ X))))
        return worst


def _march(fams, O, A1, n1: int, n2: int, n3: tuple[int, int], full: bool):
    """Core lattice marching; returns ``(circles, nodes)`` or raises MarchingError.

    ``c2[0..n2]`` and ``c3[0..n2]`` come from the strip along ``k1``;
    ``c1[0..n1]`` from the diagonal ``c2[j] ^ k3``.  With ``full`` every
    node ``c2[u] ^ c1[v]`` is computed.
    """
    F1, F2, F3 = fams
    c1 = {0: _through(F1, O)}
    c2 = {0: _through(F2, O)}
    c3 = {0: _through(F3, O)}
    node = {(0, 0): O, (1, 0): A1}
    c2[1] = _through(F2, A1)
    c3[1] = _through(F3, A1)
    # node(1, 1) = c2[1] ^ c3[0]; c1[1] through it
    node[(1, 1)] = _meet(c2[1], c3[0], 2 * A1 - O)
    c1[1] = _through(F1, node[(1, 1)])
    top = max(n1, n2)
    for u in range(1, top):
        # strip along k1: node(u+1, 1) = c1[1] ^ c3[u], then c2[u+1] and node(u+1, 0)
        pred = node[(u, 1)] + node[(u, 0)] - node[(u - 1, 0)]
        node[(u + 1, 1)] = _meet(c1[1], c3[u], pred)
        c2[u + 1] = _through(F2, node[(u + 1, 1)])
        pred = node[(u, 0)] + node[(u + 1, 1)] - node[(u, 1)]
        node[(u + 1, 0)] = _meet(c2[u + 1], c1[0], pred)
        c3[u + 1] = _through(F3, node[(u + 1, 0)])
        # column u+1 up to the diagonal, then node(u+1, u+1) = c2[u+1] ^ k3
        for v in range(2, u + 1):
            pred = node[(u + 1, v - 1)] + node[(u, v)] - node[(u, v - 1)]
            node[(u + 1, v)] = _meet(c2[u + 1], c1[v], pred)
        pred = node[(u + 1, u)] + node[(u, u)] - node[(u, u - 1)]
        node[(u + 1, u + 1)] = _meet(c2[u + 1], c3[0], pred)
        c1[u + 1] = _through(F1, node[(u + 1, u + 1)])
    if full:
        # rows above the diagonal, right to left
        for v in range(1, n1 + 1):
            for u in range(min(v, n2 + 1) - 1, -1, -1):
                pred = node[(u + 1, v)] + node[(u, v - 1)] - node[(u + 1, v - 1)]
                node[(u, v)] = _meet(c2[u], c1[v], pred)
        for w in range(1, n3[1] + 1):
            c3[-w] = _through(F3, node[(0, w)])
    c1 = {k: v for k, v in c1.items() if k <= n1}
    c2 = {k: v for k, v in c2.items() if k <= n2}
    c3 = {k: v for k, v in c3.items() if -n3[1] <= k <= n3[0]}
    node = {k: v for k, v in node.items() if k[0] <= n2 and k[1] <= n1}
    return {1: c1, 2: c2, 3: c3}, node


def discrete_web(D: Cyclide, triple, O=None, A1=None, N: int = 6) -> WebInstance:
    """Discrete web with ``N`` circles per family.

    The lattice spans ``0 <= v <= u <= N - 1``: ``c1[0..N-1]``,
    ``c2[0..N-1]``, ``c3[0..N-1]``, every node on the three circles
    through it.  If marching fails the partial web is returned with
    ``complete = False``.

    Raises
    ------
    WebError
        For a NonWeb triple or ``N < 1``.
    """
    if N < 1:
        raise WebError("N must be positive")
    wt = classify_triple(*triple)
    if wt == "NonWeb":
        raise WebError("the triple does not form a 3-web")
    if O is None or A1 is None:
        O, A1, _ = default_seed(D, triple, N)
    O = np.asarray(O, float)
    A1 = np.asarray(A1, float)
    inst = WebInstance(tuple(f.id for f in triple), wt, O, A1, N)
    try:
        circles, nodes = _march(triple, O, A1, N - 1, max(N - 1, 1), (N - 1, 0), full=False)
    except MarchingError as exc:
        inst.complete = False
        inst.message = str(exc)
        return inst
    nodes = {k: x for k, x in nodes.items() if k[1] <= k[0] <= N - 1}
    circles[2] = {k: c for k, c in circles[2].items() if k <= N - 1}
    inst.circles = circles
    inst.nodes = nodes
    return inst


def _family_angle(F: CircleFamily, x: np.ndarray) -> float:
    from .moebius import normalize, stereo_lift

    return F.angle_of(normalize(stereo_lift(x)))


def _sigma(F1: CircleFamily, c1: dict[int, MCircle], nodes, n: int) -> float:
    """Unwrapped family-1 parameter of ``c1[n]`` in units of a full turn of the family."""
    phis = [_family_angle(F1, nodes[(v, v)]) for v in range(n + 1)]
    total = 0.0
    for a, b in zip(phis, phis[1:]):
        d = (b - a + np.pi / 2) % np.pi - np.pi / 2
        total += d
    return abs(total) / np.pi


def finite_web(
    D: Cyclide,
    triple,
    N: int = 12,
    tol_sigma: float = 1e-6,
    O=None,
    delta: float | None = None,
    max_iter: int = 50,
) -> WebInstance:
    """A discrete web closing up around a ring-shaped cyclide.

    ``delta = |O A1|`` is rescaled by secant steps on ``log sigma`` until
    the ``N``-th family-1 circle returns to ``k1`` (``|sigma - 1| <= tol_sigma``).
    The returned web has the full ``N x N`` torus of nodes.

    Raises
    ------
    WebError
        For a NonWeb triple, a non-ring surface or no convergence.
    """
    wt = classify_triple(*triple)
    if wt == "NonWeb":
        raise WebError("the triple does not form a 3-web")
    from .param import sample_mesh

    # coarse meshes can miss thin handles, so the topology test uses res 32
    if sample_mesh(D, 32).euler_characteristic != 0:
        raise WebError("finite webs need a ring-shaped surface")
    if O is None:
        O, _, d0 = default_seed(D, triple, N)
    else:
        O = np.asarray(O, float)
        d0 = circle_perimeter(_through(triple[0], O)) / (3 * N)
    delta = d0 if delta is None else delta
    F1 = triple[0]
    k1 = _through(F1, O)

    def run(dl):
        A1 = point_along(k1, O, dl)
        circles, nodes = _march(triple, O, A1, N, N, (N, 0), full=False)
        return A1, circles, nodes, _sigma(F1, circles[1], nodes, N)

    hist: list[tuple[float, float]] = []
    sigma = None
    it = 0
    for it in range(1, max_iter + 1):
        try:
            A1, circles, nodes, sigma = run(delta)
        except MarchingError as exc:
            raise WebError(f"marching failed at delta={delta:.6g}: {exc}") from exc
        hist.append((np.log(delta), np.log(sigma)))
        if abs(sigma - 1.0) <= tol_sigma:
            break
        if len(hist) >= 2 and hist[-1][1] != hist[-2][1]:
            (x0, y0), (x1, y1) = hist[-2], hist[-1]
            x2 = x1 - y1 * (x1 - x0) / (y1 - y0)
            delta = float(np.exp(np.clip(x2, x1 - 1.0, x1 + 1.0)))
        else:
            delta = delta / sigma
    else:
        raise WebError(f"sigma iteration did not converge (sigma={sigma})")
    inst = WebInstance(tuple(f.id for f in triple), wt, O, A1, N, sigma=sigma, iterations=it)
    try:
        circles, nodes = _march(triple, O, A1, N, N, (N, N), full=True)
    except MarchingError as exc:
        inst.complete = False
        inst.message = str(exc)
        return inst
    inst.circles = circles
    inst.nodes = nodes
    inst.closed = True
    return inst


def closure_errors(web: WebInstance) -> tuple[float, float]:
    """Distances between the first and the ``(N+1)``-th curve rows/columns of nodes."""
    N = web.N
    e1 = max(float(np.linalg.norm(web.nodes[(u, N)] - web.nodes[(u, 0)])) for u in range(N + 1))
    e2 = max(float(np.linalg.norm(web.nodes[(N, v)] - web.nodes[(0, v)])) for v in range(N + 1))
    return e1, e2


def web_mesh(web: WebInstance, merge_tol: float | None = None):
    """Triangulation of the web lattice with coincident nodes merged.

    Triangles are ``(u,v),(u+1,v),(u+1,v+1)`` and ``(u,v),(u+1,v+1),(u,v+1)``;
    their edges follow ``c1``, ``c2`` and ``c3``.  Nodes closer than
    ``merge_tol`` (default: a tenth of the shortest lattice edge) are merged.

    Returns
    -------
    vertices : ndarray, triangles : ndarray, euler : int
    """
    keys = sorted(web.nodes)
    pts = np.array([web.nodes[k] for k in keys])
    if merge_tol is None:
        lengths = [
            float(np.linalg.norm(web.nodes[(u + du, v + dv)] - x))
            for (u, v), x in web.nodes.items()
            for du, dv in ((1, 0), (0, 1), (1, 1))
            if (u + du, v + dv) in web.nodes
        ]
        lengths = [d for d in lengths if d > 0.0]
        merge_tol = 0.1 * min(lengths) if lengths else 0.0
    ids: dict[tuple[int, int], int] = {}
    reps: list[np.ndarray] = []
    for k, x in zip(keys, pts):
        for i, r in enumerate(reps):
            if np.linalg.norm(x - r) <= merge_tol:
                ids[k] = i
                break
        else:
            ids[k] = len(reps)
            reps.append(x)
    tris = []
    for (u, v) in keys:
        a, b, c, d = (u, v), (u + 1, v), (u + 1, v + 1), (u, v + 1)
        if b in ids and c in ids:
            tris.append((ids[a], ids[b], ids[c]))
        if c in ids and d in ids:
            tris.append((ids[a], ids[c], ids[d]))
    tri = np.array([t for t in tris if len(set(t)) == 3], dtype=int)
    uniq = {tuple(sorted(t)) for t in tri.tolist()}
    tri = np.array(sorted(uniq), dtype=int)
    edges = {tuple(sorted(e)) for t in tri.tolist() for e in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2]))}
    used = len(np.unique(tri))
    return np.array(reps), tri, int(used - len(edges) + len(tri))


def node_residual(D: Cyclide, web: WebInstance) -> float:
    pts = web.node_array()
    return float(np.max(D.residual(pts))) if len(pts) else 0.0


def families_pencil_cyclide(fams: list[CircleFamily]) -> Cyclide:
    """The cyclide the families were extracted from."""
    return from_pencil(fams[0].pencil)
