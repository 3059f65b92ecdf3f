"""Forward design of cyclides.

Circles orthogonal to a sphere ``B`` have their polar lines in the polar
hyperplane of ``B*``.  Three such polar lines span a ruled quadric; its
polar dual is a cone of the pencil, which fixes the cyclide.  Canal
cyclides come the same way from a conic of sphere poles in a plane.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import algebra
from .algebra import J
from .cyclide import Cyclide, Pencil, from_pencil, to_pencil
from .families import Conic
from .moebius import (
    E3,
    MCircle,
    MSphere,
    circle_through_points,
    extended_stereo,
    inversion_matrix,
    invert_point,
    minkowski,
    normalize,
    stereo_lift,
)
from .tolerance import DEFAULT, Tolerance


class DesignError(ValueError):
    pass


class DesignWarning(UserWarning):
    pass


# -- ruled quadrics -----------------------------------------------------------


def _quadric_row(x: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(len(x))
    w = np.where(i == j, 1.0, 2.0)
    return w * x[i] * x[j]


def _sym_from_upper(v: np.ndarray, n: int) -> np.ndarray:
    M = np.zeros((n, n))
    M[np.triu_indices(n)] = v
    return M + M.T - np.diag(np.diag(M))


def skewness(l1, l2) -> float:
    """``|det|`` of the orthonormalized spanning vectors; zero iff the lines meet."""
    Q1, _ = np.linalg.qr(np.column_stack(l1))
    Q2, _ = np.linalg.qr(np.column_stack(l2))
    return float(abs(np.linalg.det(np.column_stack([Q1, Q2]))))


def ruled_quadric_through_lines(lines, tol: Tolerance = DEFAULT) -> np.ndarray:
    """The quadric of projective 3-space containing three pairwise skew lines.

    Parameters
    ----------
    lines : sequence of three pairs of homogeneous 4-vectors
        Each pair spans one line.

    Returns
    -------
    ndarray (4, 4)
        Symmetric matrix, max-abs entry 1.

    Raises
    ------
    DesignError
        If two lines meet (or coincide).
    """
    lines = [tuple(np.asarray(v, dtype=float) for v in ln) for ln in lines]
    if len(lines) != 3:
        raise DesignError("exactly three lines are required")
    for a in range(3):
        for b in range(a + 1, 3):
            if skewness(lines[a], lines[b]) <= 1e-12:
                raise DesignError(f"lines {a} and {b} are not skew")
    rows = []
    for p, q in lines:
        p = p / np.linalg.norm(p)
        q = q / np.linalg.norm(q)
        for x in (p, q, p + q):
            rows.append(_quadric_row(x))
    _, s, Vt = np.linalg.svd(np.array(rows))
    Q = _sym_from_upper(Vt[-1], 4)
    return Q / np.max(np.abs(Q))


def ruled_quadric_through_affine_lines(lines, tol: Tolerance = DEFAULT) -> np.ndarray:
    """As :func:`ruled_quadric_through_lines` for lines ``(point, direction)`` of R^3.

    The result acts on ``(x, y, z, 1)``.
    """
    hom = []
    for p, d in lines:
        hom.append((np.append(np.asarray(p, float), 1.0), np.append(np.asarray(d, float), 0.0)))
    return ruled_quadric_through_lines(hom, tol)


# -- dual cones ---------------------------------------------------------------


def _dual_cone(Qstar: np.ndarray, W: np.ndarray, vertex: np.ndarray) -> np.ndarray:
    """Cone whose tangent hyperplanes have poles on ``{W c : c^T Qstar c = 0}``.

    ``W`` spans the polar subspace of the vertex subspace (columns of
    ``vertex``).
    """
    k = W.shape[1]
    U = algebra.kernel(vertex.T)  # Euclidean complement of the vertex space
    M = U.T @ J @ W
    G = M @ np.linalg.inv(Qstar) @ M.T
    R = np.linalg.inv(np.column_stack([U, vertex]))[:k]
    C = R.T @ G @ R
    return algebra.sym(C / np.max(np.abs(C)))


def _polar_basis(vertex: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``{Y : <Y, v> = 0 for all vertex columns v}``."""
    return algebra.kernel((J @ vertex).T)


# -- three circles --------------------------------------------------------------


@dataclass(frozen=True)
class DesignInputThreeCircles:
    B: MSphere
    k1: MCircle
    k2: MCircle
    k3: MCircle

    @property
    def circles(self) -> tuple[MCircle, MCircle, MCircle]:
        return self.k1, self.k2, self.k3


def orthogonality_defect(c: MCircle, B: MSphere) -> float:
    """``max |h . B*|`` over the unit hyperplanes of ``c`` (zero iff ``c`` is orthogonal to ``B``)."""
    V = normalize(B.penta)
    return float(np.max(np.abs(c.hyperplanes @ V)))


def _inversion_for_plane(inp: DesignInputThreeCircles) -> np.ndarray:
    """Inversion in the unit sphere one unit off the plane ``B`` above the circles' centroid."""
    lam, n, d = inp.B.coefficients
    nn = float(np.linalg.norm(n))
    n = n / nn
    d = d / nn
    pts = []
    for c in inp.circles:
        v = c.view
        if v.kind == "circle":
            pts.append(v.center)
        elif v.kind == "point":
            pts.append(v.center)
    cen = np.mean(pts, axis=0) if pts else -d * n
    # foot of the centroid on B, then one unit along the normal
    foot = cen - (cen @ n + d) * n
    return inversion_matrix(MSphere.from_center(foot + n, 1.0))


def _transform_circle(c: MCircle, M: np.ndarray) -> MCircle:
    Minv_t = np.linalg.inv(M).T
    return MCircle(Minv_t @ c.h1, Minv_t @ c.h2)


def cyclide_from_three_circles(inp: DesignInputThreeCircles, tol: Tolerance = DEFAULT) -> Cyclide:
    """Cyclide containing three circles orthogonal to a common sphere ``B``.

    ``B`` may be a sphere, an imaginary sphere or a plane.  For a plane the
    configuration is first moved by an inversion onto a sphere and the
    result is moved back.

    Raises
    ------
    DesignError
        If a circle is far from orthogonal to ``B``, if two circles are
        co-spherical, or if ``B`` is a point sphere.

    Warns
    -----
    DesignWarning
        For near-violations (relative defect above ``tol.design``); the
        polar lines are then projected onto the polar hyperplane of ``B*``.
    """
    V = normalize(inp.B.penta)
    if abs(minkowski(V, V)) <= 1e3 * tol.zero:
        raise DesignError("B is a point sphere")
    for i, c in enumerate(inp.circles):
        e = orthogonality_defect(c, inp.B)
        if e > 1e3 * tol.design:
            raise DesignError(f"circle k{i + 1} is not orthogonal to B (defect {e:.3g})")
        if e > tol.design:
            warnings.warn(f"circle k{i + 1} is only nearly orthogonal to B (defect {e:.3g})", DesignWarning)
    if inp.B.is_plane():
        M = _inversion_for_plane(inp)
        moved = DesignInputThreeCircles(
            MSphere(M @ inp.B.penta), *(_transform_circle(c, M) for c in inp.circles)
        )
        D_moved = _three_circles_core(moved, tol)
        back = to_pencil(D_moved).transformed(np.linalg.inv(M))
        return from_pencil(back).normalized()
    return _three_circles_core(inp, tol)


def _three_circles_core(inp: DesignInputThreeCircles, tol: Tolerance) -> Cyclide:
    V = normalize(inp.B.penta)
    vv = minkowski(V, V)
    W = _polar_basis(V[:, None])  # 5x4
    lines = []
    for c in inp.circles:
        pts = []
        for h in (c.h1, c.h2):
            Y = J @ h
            Y = Y - (minkowski(Y, V) / vv) * V
            pts.append(W.T @ Y)
        lines.append(tuple(pts))
    for a in range(3):
        for b in range(a + 1, 3):
            s = skewness(lines[a], lines[b])
            if s <= 1e-12:
                raise DesignError(f"circles k{a + 1} and k{b + 1} lie on a common sphere")
            if s <= tol.design:
                warnings.warn(f"circles k{a + 1} and k{b + 1} are nearly co-spherical", DesignWarning)
    Qstar = ruled_quadric_through_lines(lines, tol)
    C = _dual_cone(Qstar, W, V[:, None])
    return from_pencil(Pencil(C)).normalized()


# -- boundary quad --------------------------------------------------------------


@dataclass(frozen=True)
class DesignInputQuad:
    corners: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    B: MSphere
    P: np.ndarray


@dataclass(frozen=True)
class QuadDesign:
    cyclide: Cyclide
    boundary: tuple[MCircle, MCircle, MCircle, MCircle]
    arcs: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    through_P: MCircle


def _sphere_through(c: MCircle, x) -> np.ndarray:
    """Hyperplane of the sphere containing ``c`` and the point ``x``."""
    X = normalize(stereo_lift(x))
    ker = algebra.kernel(np.vstack([c.plane_basis.T, X]))
    if ker.shape[1] != 1:
        raise DesignError("point lies on the circle")
    return ker[:, 0]


def arc_between(c: MCircle, x1, x2, avoid, n: int = 64) -> np.ndarray:
    """Points of the arc of ``c`` from ``x1`` to ``x2`` that does not contain ``avoid``."""
    a1 = c.angle_of(stereo_lift(x1))
    a2 = c.angle_of(stereo_lift(x2))
    av = c.angle_of(stereo_lift(avoid))
    span = (a2 - a1) % (2 * np.pi)
    if (av - a1) % (2 * np.pi) < span:
        span -= 2 * np.pi
    ang = a1 + np.linspace(0.0, span, n)
    X = c.lift_at(ang)
    return np.array([extended_stereo(X[:, i]) for i in range(n)])


def cyclide_from_quad(inp: DesignInputQuad, tol: Tolerance = DEFAULT) -> QuadDesign:
    """Cyclide patch bounded by four circles through consecutive corners.

    Each boundary circle passes through two consecutive corners and the
    mirror image of the first in ``B``, so it is orthogonal to ``B``.  The
    extra point ``P`` fixes the cyclide.

    Raises
    ------
    DesignError
        If consecutive corners coincide, the corners are concyclic, a
        corner lies on ``B``, or ``P`` lies on a boundary circle.
    """
    Pc = [np.asarray(p, dtype=float) for p in inp.corners]
    x = np.asarray(inp.P, dtype=float)
    scale = max(max(np.linalg.norm(p) for p in Pc), 1.0)
    for a in range(4):
        if np.linalg.norm(Pc[a] - Pc[(a + 1) % 4]) <= tol.design * scale:
            raise DesignError(f"corners {a + 1} and {(a + 1) % 4 + 1} coincide")
    lifts = np.array([normalize(stereo_lift(p)) for p in Pc])
    sv = np.linalg.svd(lifts, compute_uv=False)
    if sv[3] <= tol.design * sv[0]:
        # all boundary circles would then lie on one sphere
        raise DesignError("the four corners are concyclic")
    refl = [invert_point(inp.B, p) for p in Pc]
    for a in range(4):
        if np.linalg.norm(refl[a] - Pc[a]) <= tol.design * scale:
            raise DesignError(f"corner {a + 1} lies on B")
    ks = []
    for a in range(4):
        b = (a + 1) % 4
        try:
            ks.append(circle_through_points(Pc[a], Pc[b], refl[a]))
        except ValueError as exc:
            raise DesignError(f"boundary circle {a + 1} is degenerate") from exc
    for i, c in enumerate(ks):
        if c.contains(normalize(stereo_lift(x)), tol.design):
            raise DesignError(f"P lies on boundary circle {i + 1}")
    k = MCircle(_sphere_through(ks[0], x), _sphere_through(ks[2], x))
    D = cyclide_from_three_circles(DesignInputThreeCircles(inp.B, ks[1], ks[3], k), tol)
    arcs = tuple(arc_between(ks[a], Pc[a], Pc[(a + 1) % 4], refl[a]) for a in range(4))
    return QuadDesign(D, tuple(ks), arcs, k)


# -- canal cyclides ---------------------------------------------------------------


def canal_cyclide(g: Conic, b: MCircle, tol: Tolerance = DEFAULT) -> Cyclide:
    """Envelope of the spheres centered on the conic ``g`` and orthogonal to ``b``.

    Raises
    ------
    DesignError
        If ``g`` is degenerate or ``b`` does not lie in the plane of ``g``.
    """
    if g.matrix is None:
        raise DesignError("g must be a conic, not a line")
    G = algebra.sym(g.matrix)
    if abs(np.linalg.det(G)) <= tol.design * np.max(np.abs(G)) ** 3:
        raise DesignError("g is a degenerate conic")
    W = b.plane_basis  # 5x3; poles of spheres orthogonal to b
    H = E3 @ W  # homogeneous centers
    F = np.zeros((4, 3))
    F[:3, 0] = g.e1
    F[:3, 1] = g.e2
    F[:3, 2] = g.origin
    F[3, 2] = 1.0
    T, *_ = np.linalg.lstsq(F, H, rcond=None)
    if np.linalg.norm(F @ T - H) > 1e3 * tol.design * np.linalg.norm(H):
        raise DesignError("b does not lie in the plane of g")
    if abs(np.linalg.det(T)) <= tol.design * np.max(np.abs(T)) ** 3:
        raise DesignError("the plane of b passes through infinity of the sphere model")
    Qc = algebra.sym(T.T @ G @ T)
    vertex = np.column_stack([J @ b.h1, J @ b.h2])
    C = _dual_cone(Qc, W, vertex)
    return from_pencil(Pencil(C)).normalized()


def conic_circle(center, radius: float, normal=(0.0, 0.0, 1.0)) -> Conic:
    """Circle as a :class:`Conic` in the plane through ``center`` with the given normal."""
    n = np.asarray(normal, float)
    n = n / np.linalg.norm(n)
    e1 = np.cross(n, [1.0, 0.0, 0.0])
    if np.linalg.norm(e1) < 1e-8:
        e1 = np.cross(n, [0.0, 1.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return Conic(np.asarray(center, float), e1, e2, np.diag([1.0, 1.0, -radius * radius]))


def conic_ellipse(center, a: float, b: float, e1=(1.0, 0.0, 0.0), e2=(0.0, 1.0, 0.0)) -> Conic:
    return Conic(np.asarray(center, float), np.asarray(e1, float), np.asarray(e2, float), np.diag([1 / a**2, 1 / b**2, -1.0]))


def planar_circle(center, r2: float, normal=(0.0, 0.0, 1.0)) -> MCircle:
    """Circle ``|x - center|^2 = r2`` in the plane through ``center`` with the given normal.

    ``r2`` may be zero (point circle) or negative (imaginary circle).
    """
    c = np.asarray(center, float)
    n = np.asarray(normal, float)
    n = n / np.linalg.norm(n)
    return MCircle(MSphere.plane(n, float(n @ c)).hyperplane, MSphere.from_center(c, r2).hyperplane)
