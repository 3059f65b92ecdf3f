"""Square-root-rational parametrization and triangulated sampling of a cyclide.

A real cone ``C = A - t J`` of the pencil with a point vertex ``V``
projects the lifted surface onto the quadric ``D`` cut by ``C`` in a
hyperplane ``H``.  A quadratic chart of ``D`` followed by the inverse
projection (solving a quadratic along the line through ``V``) gives

    x = (X1 + X2 sqrt(P), Y1 + Y2 sqrt(P), Z1 + Z2 sqrt(P)) / (W1 + W2 sqrt(P))

with polynomials of total degree at most 4 in the chart parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import algebra
from .algebra import J
from .cyclide import Cyclide, Pencil, to_pencil
from .moebius import INF, minkowski
from .tolerance import DEFAULT, Tolerance

MapCase = Literal["vertex_on_sigma", "vertex_outside", "vertex_inside"]

DEG = 4


class ParamError(ValueError):
    pass


class EmptySurfaceError(ParamError):
    """The cyclide has no real points to sample."""


# -- bivariate polynomials as (DEG+1, DEG+1) ascending coefficient arrays --


def _pmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[0] + b.shape[0] - 1
    out = np.zeros((n, n))
    for i, j in zip(*np.nonzero(a)):
        out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
    return out


def _pad(a: np.ndarray, n: int = DEG + 1) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape[0] > n:
        if np.any(a[n:]) or np.any(a[:, n:]):
            raise ParamError("polynomial exceeds the degree bound")
        return a[:n, :n].copy()
    out = np.zeros((n, n))
    out[: a.shape[0], : a.shape[1]] = a
    return out


def total_degree(c: np.ndarray, rel: float = 1e-13) -> int:
    """Total degree of a coefficient array (``-1`` for the zero polynomial)."""
    c = np.asarray(c)
    m = np.max(np.abs(c)) if c.size else 0.0
    if m == 0.0:
        return -1
    i, j = np.nonzero(np.abs(c) > rel * m)
    return int(np.max(i + j))


def _vec_form(M: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``sum_ij M_ij a_i b_j`` for polynomial vectors ``a``, ``b``."""
    out = np.zeros((a.shape[1] + b.shape[1] - 1,) * 2)
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            if M[i, j] != 0.0:
                out += M[i, j] * _pmul(a[i], b[j])
    return out


@dataclass(frozen=True)
class SqrtRationalMap:
    """``x(s, t) = (X1 + X2 r, Y1 + Y2 r, Z1 + Z2 r) / (W1 + W2 r)``, ``r = +-sqrt(P)``.

    Each polynomial is a ``(5, 5)`` array ``c[i, j]`` of the monomial
    ``s**i t**j``.  ``t_root`` and ``V`` record the cone used.
    """

    X1: np.ndarray
    X2: np.ndarray
    Y1: np.ndarray
    Y2: np.ndarray
    Z1: np.ndarray
    Z2: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    P: np.ndarray
    case: MapCase
    t_root: float
    V: np.ndarray = field(repr=False)

    def polynomials(self) -> dict[str, np.ndarray]:
        names = ("X1", "X2", "Y1", "Y2", "Z1", "Z2", "W1", "W2", "P")
        return {n: getattr(self, n) for n in names}

    @property
    def is_rational(self) -> bool:
        return self.case == "vertex_on_sigma"


@dataclass(frozen=True)
class _Setup:
    """Cone data shared by the map and the mesher."""

    t: float
    C: np.ndarray
    V: np.ndarray
    vv: float
    case: MapCase
    B: np.ndarray  # 5x4 basis of H
    w: np.ndarray  # eigenvalues of the restricted form
    U: np.ndarray  # eigenvectors (H coordinates)

    def lift(self, q: np.ndarray, sign: float = 1.0):
        """Points of Sigma over ``q`` (rows, 5-space); returns ``(X, P)``."""
        q = np.atleast_2d(q)
        qq = np.einsum("ni,ij,nj->n", q, J, q)
        if self.case == "vertex_on_sigma":
            qv = q @ (J @ self.V)
            X = 2.0 * qv[:, None] * q - qq[:, None] * self.V[None, :]
            return X, np.ones(len(q))
        P = -self.vv * qq
        r = sign * np.sqrt(np.maximum(P, 0.0))
        X = self.vv * q + r[:, None] * self.V[None, :]
        return X, P


def _choose_cone(P: Pencil, tol: Tolerance) -> _Setup:
    best = None
    for e in P.eigen(tol):
        C = P.member(e.t)
        ns = algebra.null_space(C, tol.zero)
        if len(ns) != 1:
            continue
        V = ns[0]
        vv = minkowski(V, V)
        on = abs(vv) <= 1e3 * tol.zero
        if on:
            H = algebra.kernel(V[None, :])
        else:
            H = algebra.kernel((J @ V)[None, :])
        CH = algebra.sym(H.T @ C @ H)
        w, U = np.linalg.eigh(CH)
        thr = tol.zero * np.max(np.abs(w))
        npos, nneg = int(np.sum(w > thr)), int(np.sum(w < -thr))
        if npos + nneg != 4 or npos == 0 or nneg == 0:
            continue
        case: MapCase = "vertex_on_sigma" if on else ("vertex_outside" if vv > 0 else "vertex_inside")
        key = (1 if on else 0, abs(vv))
        if best is None or key > best[0]:
            best = (key, _Setup(e.t, C, V, 0.0 if on else vv, case, H, w, U))
    if best is None:
        raise ParamError("no real cone with a point vertex and a real base quadric")
    return best[1]


def _real_point(w: np.ndarray) -> np.ndarray:
    """A real zero of ``sum w_i y_i^2`` in eigen-coordinates."""
    i = int(np.argmax(w))
    j = int(np.argmin(w))
    y = np.zeros(len(w))
    y[i] = 1.0 / np.sqrt(w[i])
    y[j] = 1.0 / np.sqrt(-w[j])
    return y / np.linalg.norm(y)


def parametrize(P: Pencil, tol: Tolerance = DEFAULT) -> SqrtRationalMap:
    """Square-root-rational map of the real cyclide carried by ``P``.

    The cone is chosen deterministically: a vertex on Sigma if there is one
    (the map is then rational), otherwise the vertex farthest from Sigma.

    Raises
    ------
    ParamError
        If no real cone with a point vertex has a real base quadric.
    """
    S = _choose_cone(P, tol)
    # eigen-coordinates z of H: y = U z, form diag(w)
    p0 = _real_point(S.w)
    comp = algebra.kernel(p0[None, :])  # 4x3 orthonormal complement
    u0, u1, u2 = comp.T
    d = np.zeros((4, 2, 2))
    d[:, 0, 0] = u0
    d[:, 1, 0] = u1
    d[:, 0, 1] = u2
    W = np.diag(S.w)
    dCd = _vec_form(W, d, d)
    pCd = _vec_form(W, _const_vec(p0), d)
    qz = np.array([dCd * p0[k] - 2.0 * _pmul(pCd, d[k]) for k in range(4)])
    # back to the 5-space
    M = S.B @ S.U
    q = np.einsum("ik,kab->iab", M, qz)
    qq = _vec_form(J, q, q)
    if S.case == "vertex_on_sigma":
        qv = np.einsum("i,iab->ab", J @ S.V, q)
        X = np.array([2.0 * _pmul(qv, q[i]) - S.V[i] * qq for i in range(5)])
        R = np.zeros((5,) + X.shape[1:])
        Pp = np.zeros_like(qq)
        Pp[0, 0] = 1.0
    else:
        X = S.vv * q
        R = np.zeros((5, 1, 1))
        R[:, 0, 0] = S.V
        Pp = -S.vv * qq
    scale = max(np.max(np.abs(X)), 1e-300)
    X = X / scale
    R = R / scale
    pscale = max(np.max(np.abs(Pp)), 1e-300)
    # sqrt(P) scales by sqrt(pscale); fold that into the radical part
    Pp = Pp / pscale
    R = R * np.sqrt(pscale)
    polys = [
        X[0], R[0], X[1], R[1], X[2], R[2], X[4] - X[3], R[4] - R[3], Pp,
    ]
    polys = [_pad(p) for p in polys]
    return SqrtRationalMap(*polys, case=S.case, t_root=S.t, V=S.V)


def _const_vec(v: np.ndarray) -> np.ndarray:
    out = np.zeros((len(v), 1, 1))
    out[:, 0, 0] = v
    return out


def eval_map(m: SqrtRationalMap, s, t, branch: int = 1):
    """Evaluate the map at ``(s, t)``.

    Returns a point of R^3, :data:`INF` when the denominator vanishes, or
    ``None`` where ``P < 0`` (no real point).
    """
    Pv = float(npoly.polyval2d(s, t, m.P))
    if Pv < 0.0:
        return None
    r = (1.0 if branch >= 0 else -1.0) * np.sqrt(Pv)
    ev = lambda c: float(npoly.polyval2d(s, t, c))  # noqa: E731
    num = np.array([ev(m.X1) + r * ev(m.X2), ev(m.Y1) + r * ev(m.Y2), ev(m.Z1) + r * ev(m.Z2)])
    den = ev(m.W1) + r * ev(m.W2)
    if abs(den) <= 1e-14 * max(np.max(np.abs(num)), 1e-300):
        return INF.copy()
    return num / den


def angle_grid(n: int = 32) -> np.ndarray:
    """Chart values ``s = tan(theta)`` at ``n`` equally spaced midpoints of ``(-pi/2, pi/2)``."""
    theta = -np.pi / 2 + (np.arange(n) + 0.5) * np.pi / n
    return np.tan(theta)


def grid_points(m: SqrtRationalMap, n: int = 32) -> np.ndarray:
    """All finite real points of both branches over the ``n x n`` angle grid."""
    g = angle_grid(n)
    pts = []
    for s in g:
        for t in g:
            for b in (1, -1):
                x = eval_map(m, s, t, b)
                if x is not None and np.all(np.isfinite(x)):
                    pts.append(x)
                if m.is_rational:
                    break
    return np.array(pts).reshape(-1, 3)


# -- meshing ----------------------------------------------------------------


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh; ``tags[k] = (a, b, branch)`` records the base
    parameters of vertex ``k`` (``branch = 0`` on the seam ``P = 0``)."""

    vertices: np.ndarray
    triangles: np.ndarray
    tags: np.ndarray

    @property
    def euler_characteristic(self) -> int:
        tri = self.triangles
        edges = np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
        ne = len(np.unique(edges, axis=0))
        used = len(np.unique(tri))
        return int(used - ne + len(tri))

    def boundary_edges(self) -> int:
        tri = self.triangles
        edges = np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        return int(np.sum(counts == 1))


def _icosphere(level: int):
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    V = [np.array(v, float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}
        new = []

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = V[a] + V[b]
                V.append(m / np.linalg.norm(m))
                cache[key] = len(V) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.array(V), np.array(faces)


class _Base:
    """Triangulated base quadric: params, vertex ids and branch flips per corner."""

    def __init__(self, S: _Setup, res: int):
        self.S = S
        w = S.w
        M = S.B @ S.U
        order = np.argsort(-w)
        npos = int(np.sum(w > 0))
        self.ruled = npos == 2
        if self.ruled:
            p = order[:2]
            n = order[2:]
            scale = np.zeros((4, 4))
            scale[p, [0, 1]] = 1.0 / np.sqrt(w[p])
            scale[n, [2, 3]] = 1.0 / np.sqrt(-w[n])
            self.T = M @ scale
            N = max(4, res + res % 2)
            self.N = N
        else:
            # the odd one out carries the homogenizing coordinate
            odd = order[0] if npos == 1 else order[3]
            rest = [i for i in order if i != odd]
            scale = np.zeros((4, 4))
            for k, i in enumerate(rest):
                scale[i, k] = 1.0 / np.sqrt(abs(w[i]))
            scale[odd, 3] = 1.0 / np.sqrt(abs(w[odd]))
            self.T = M @ scale
            level = int(np.clip(np.ceil(np.log2(max(res, 4) / 4.0)), 1, 6))
            self.sphere_v, self.sphere_f = _icosphere(level)

    def q(self, param: np.ndarray) -> np.ndarray:
        param = np.atleast_2d(param)
        if self.ruled:
            a, b = param[:, 0], param[:, 1]
            z = np.column_stack([np.cos(a), np.sin(a), np.cos(b), np.sin(b)])
        else:
            u = param / np.linalg.norm(param, axis=1, keepdims=True)
            z = np.column_stack([u, np.ones(len(u))])
        return z @ self.T.T

    def interp(self, p1, p2, lam):
        p = (1 - lam) * p1 + lam * p2
        if not self.ruled:
            p = p / np.linalg.norm(p)
        return p

    def tag(self, param) -> tuple[float, float]:
        if self.ruled:
            return float(param[0] % (2 * np.pi)), float(param[1] % (2 * np.pi))
        x, y, z = param / np.linalg.norm(param)
        return float(np.arccos(np.clip(z, -1, 1))), float(np.arctan2(y, x) % (2 * np.pi))

    def vertices(self):
        """Canonical base vertices: list of params."""
        if self.ruled:
            N = self.N
            h = N // 2
            return [np.array([2 * np.pi * i / N, 2 * np.pi * j / N]) for i in range(h) for j in range(N)]
        return list(self.sphere_v)

    def triangles(self):
        """Yield ``(params(3), ids(3), flips(3))``."""
        if not self.ruled:
            for f in self.sphere_f:
                yield self.sphere_v[list(f)], tuple(int(i) for i in f), (0, 0, 0)
            return
        N = self.N
        h = N // 2

        def canon(i, j):
            flip = 0
            if i >= h:
                i -= h
                j += h
                flip = 1
            return i * N + (j % N), flip

        def corner(i, j):
            vid, fl = canon(i, j)
            return np.array([2 * np.pi * i / N, 2 * np.pi * j / N]), vid, fl

        for i in range(h):
            for j in range(N):
                c00, c10, c11, c01 = corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)
                for tri in ((c00, c10, c11), (c00, c11, c01)):
                    yield np.array([c[0] for c in tri]), tuple(c[1] for c in tri), tuple(c[2] for c in tri)


def sample_mesh(D: Cyclide, res: int = 32, tol: Tolerance = DEFAULT) -> Mesh:
    """Triangulate the real cyclide.

    Both square-root branches are meshed over the base quadric, clipped to
    ``P >= 0``; the branches share their vertices on the seam ``P = 0``.

    Raises
    ------
    ValueError
        If ``res < 4``.
    EmptySurfaceError
        If the real surface is empty.
    """
    if res < 4:
        raise ValueError("res must be at least 4")
    P = to_pencil(D)
    for e in P.eigen(tol):
        inr = algebra.inertia(P.member(e.t), tol.zero)
        if inr.n_plus == 0 or inr.n_minus == 0:
            # a semidefinite cone confines the real points to its kernel
            raise EmptySurfaceError("the cyclide has no real surface points")
    try:
        S = _choose_cone(P, tol)
    except ParamError as exc:
        raise EmptySurfaceError(str(exc)) from exc
    base = _Base(S, res)
    rational = S.case == "vertex_on_sigma"
    branches = (1,) if rational else (1, -1)

    bverts = base.vertices()
    qv = base.q(np.array(bverts))
    _, Pv = S.lift(qv)
    pscale = max(float(np.max(np.abs(Pv))), 1e-300)
    seam_eps = 1e-12 * pscale
    if not rational and np.all(Pv < -seam_eps):
        raise EmptySurfaceError("the cyclide has no real points")

    verts: list[np.ndarray] = []
    tags: list[tuple[float, float, int]] = []
    index: dict = {}

    def point_id(key, X, tag):
        if key not in index:
            index[key] = len(verts)
            verts.append(X)
            tags.append(tag)
        return index[key]

    def vertex_id(vid, branch):
        Pi = Pv[vid]
        if not rational and abs(Pi) <= seam_eps:
            key = ("v", vid, 0)
            X, _ = S.lift(qv[vid], 1.0)
            return point_id(key, X[0], base.tag(bverts[vid]) + (0,))
        X, _ = S.lift(qv[vid], float(branch))
        return point_id(("v", vid, branch), X[0], base.tag(bverts[vid]) + (branch,))

    def cut_id(ida, pa, idb, pb):
        key = ("e",) + tuple(sorted((ida, idb)))
        if key in index:
            return index[key]
        lo, hi = 0.0, 1.0  # P(lo) >= 0 > P(hi)
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            _, Pm = S.lift(base.q(base.interp(pa, pb, mid)))
            if Pm[0] >= 0.0:
                lo = mid
            else:
                hi = mid
        prm = base.interp(pa, pb, lo)
        X, _ = S.lift(base.q(prm), 1.0)
        return point_id(key, X[0], base.tag(prm) + (0,))

    tris: list[tuple[int, int, int]] = []
    for params, ids, flips in base.triangles():
        vals = Pv[list(ids)]
        inside = [rational or v >= -seam_eps for v in vals]
        if not any(inside):
            continue
        for br in branches:
            poly: list[int] = []
            for k in range(3):
                a, b = k, (k + 1) % 3
                bra = br if (rational or flips[a] == 0) else -br
                if inside[a]:
                    poly.append(vertex_id(ids[a], bra))
                if inside[a] != inside[b]:
                    ia, ib = (a, b) if inside[a] else (b, a)
                    poly.append(cut_id(ids[ia], params[ia], ids[ib], params[ib]))
            clean = [v for i, v in enumerate(poly) if v != poly[i - 1]]
            if len(clean) < 3:
                continue
            for k in range(1, len(clean) - 1):
                tri = (clean[0], clean[k], clean[k + 1])
                if len(set(tri)) == 3:
                    tris.append(tri)
    if not tris:
        raise EmptySurfaceError("the cyclide has no real points")
    if rational:
        tris = list(dict.fromkeys(tris))

    X = np.array(verts)
    w = X[:, 4] - X[:, 3]
    big = np.abs(w) <= 1e-10 * np.linalg.norm(X, axis=1)
    xyz = np.full((len(X), 3), np.inf)
    xyz[~big] = X[~big, :3] / w[~big, None]
    tri = np.array(tris, dtype=int)
    keep = np.all(np.isfinite(xyz[tri]).all(axis=2), axis=1)
    tri = tri[keep]
    used = np.unique(tri)
    remap = -np.ones(len(X), dtype=int)
    remap[used] = np.arange(len(used))
    return Mesh(xyz[used], remap[tri], np.array(tags, dtype=float)[used])


def mesh_residual(D: Cyclide, mesh: Mesh) -> float:
    """Largest scale-free residual over the mesh vertices."""
    return float(np.max(D.residual(mesh.vertices))) if len(mesh.vertices) else 0.0
