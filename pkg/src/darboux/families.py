"""Real circle families of a Darboux cyclide.

Every family comes from a quadratic cone ``C = A - t J`` of the pencil that
carries 2-planes: signature ``(2, 2, 1)`` gives a paired pair of families,
``(2, 1, 2)`` or ``(1, 2, 2)`` a single family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import algebra
from .algebra import J, Inertia
from .cyclide import Cyclide, Pencil, from_pencil, is_trivial, pencil_is_reducible
from .moebius import (
    E3,
    MCircle,
    MSphere,
    extended_stereo,
    minkowski,
    normalize,
    stereo_lift,
)
from .tolerance import DEFAULT, Tolerance


class FamilyError(ValueError):
    pass


class UnsupportedPencilError(FamilyError):
    """Pencil structure the extraction does not handle."""


FamilyClass = Literal["paired", "special", "single"]


@dataclass(frozen=True)
class ConeDatum:
    t: float
    C: np.ndarray
    inertia: Inertia
    vertex: tuple[np.ndarray, ...]

    @property
    def is_line(self) -> bool:
        return len(self.vertex) == 2


@dataclass(frozen=True)
class CircleFamily:
    """One plane family of a cone, ``P_branch(s)`` in the normal form of ``K``.

    ``s`` lives on the projective line; :meth:`hyperplanes_at` takes the
    angle ``phi`` with ``s = tan(phi)``, so a family is periodic in ``phi``
    with period ``pi``.
    """

    id: int
    cone: ConeDatum
    K: np.ndarray
    k: np.ndarray
    branch: int
    kind: FamilyClass
    partner: int | None = None
    pencil: Pencil | None = field(default=None, repr=False, compare=False)

    @property
    def is_single(self) -> bool:
        return self.kind == "single"

    def _coeffs(self):
        k1, k2, k3, k4 = self.k
        if self.branch == 1:
            u1 = np.array([k1, 0.0, -k3, 0.0, 0.0])
            v1 = np.array([0.0, k2, 0.0, -k4, 0.0])
            u2 = np.array([0.0, -k2, 0.0, -k4, 0.0])
            v2 = np.array([k1, 0.0, k3, 0.0, 0.0])
        else:
            u1 = np.array([k1, 0.0, -k3, 0.0, 0.0])
            v1 = np.array([0.0, -k2, 0.0, -k4, 0.0])
            u2 = np.array([0.0, k2, 0.0, -k4, 0.0])
            v2 = np.array([k1, 0.0, k3, 0.0, 0.0])
        # h1 = c u1 + s v1, h2 = c u2 + s v2 (y-coordinates); X-coords via K
        return [self.K @ w for w in (u1, v1, u2, v2)]

    def hyperplanes_at(self, phi: float) -> tuple[np.ndarray, np.ndarray]:
        u1, v1, u2, v2 = self._coeffs()
        c, s = np.cos(phi), np.sin(phi)
        return c * u1 + s * v1, c * u2 + s * v2

    def circle_at_angle(self, phi: float) -> MCircle:
        h1, h2 = self.hyperplanes_at(phi)
        return MCircle(h1, h2, family=self.id, s=float(np.tan(phi)))

    def angle_of(self, X) -> float:
        """Parameter angle of the plane of this family through ``X``, in ``[0, pi)``."""
        u1, v1, u2, v2 = self._coeffs()
        X = np.asarray(X, dtype=float)
        rows = np.array([[u1 @ X, v1 @ X], [u2 @ X, v2 @ X]])
        i = int(np.argmax(np.linalg.norm(rows, axis=1)))
        a, b = rows[i]
        if np.hypot(a, b) <= 1e-12 * np.linalg.norm(X) * np.linalg.norm(self.k):
            raise FamilyError("family plane is degenerate at this point")
        # c a + s b = 0
        phi = float(np.arctan2(-a, b)) % np.pi
        c, s = np.cos(phi), np.sin(phi)
        other = rows[1 - i]
        if abs(c * other[0] + s * other[1]) > 1e-6 * np.linalg.norm(X) * np.linalg.norm(self.k):
            raise FamilyError("point is not on the cyclide")
        return phi


def s_to_angle(s) -> float:
    return np.pi / 2 if np.isinf(s) else float(np.arctan(s)) % np.pi


def circle_at(F: CircleFamily, s) -> MCircle:
    """Circle of the family at parameter ``s`` (``s = inf`` allowed)."""
    c = F.circle_at_angle(s_to_angle(s))
    return MCircle(c.h1, c.h2, family=F.id, s=float(s))


def circle_through_point(F: CircleFamily, x, tol: float = 1e-7) -> tuple[float, MCircle]:
    """The circle of ``F`` through the surface point ``x``.

    Raises
    ------
    FamilyError
        If ``x`` is off the cyclide (``tol`` is the scale-free residual) or
        the family plane is undetermined there.
    """
    if F.pencil is not None:
        D = from_pencil(F.pencil)
        if float(D.residual(x)) > tol:
            raise FamilyError("point is not on the cyclide")
    X = normalize(stereo_lift(x))
    phi = F.angle_of(X)
    s = np.inf if abs(phi - np.pi / 2) < 1e-15 else float(np.tan(phi))
    c = F.circle_at_angle(phi)
    return s, MCircle(c.h1, c.h2, family=F.id, s=s)


def extract_families(P: Pencil, tol: Tolerance = DEFAULT) -> list[CircleFamily]:
    """All real circle families of the cyclide carried by ``P``.

    Raises
    ------
    FamilyError
        If the cyclide is trivial or reducible.
    """
    D = from_pencil(P)
    if is_trivial(D, tol.zero):
        raise FamilyError("trivial cyclide (sphere or plane)")
    if pencil_is_reducible(P, tol):
        raise FamilyError("reducible cyclide")
    fams: list[CircleFamily] = []
    for e in P.eigen(tol):
        C = P.member(e.t)
        inr = algebra.inertia(C, tol.zero)
        if (inr.n_plus, inr.n_minus, inr.n_zero) not in {(2, 2, 1), (2, 1, 2), (1, 2, 2)}:
            continue
        K, d = algebra.congruence_diagonalize(C, tol.zero)
        k = np.sqrt(np.abs(d[:4]))
        zero_slots = np.abs(d[:4]) <= tol.coincide * np.max(np.abs(d))
        k[zero_slots] = 0.0
        vertex = tuple(K[:, j] for j in range(5) if (j == 4 or (j < 4 and zero_slots[j])))
        cone = ConeDatum(e.t, C, inr, vertex)
        if inr.n_zero == 1:
            V = vertex[0]
            special = abs(minkowski(V, V)) <= 1e3 * tol.zero
            kind: FamilyClass = "special" if special else "paired"
            i = len(fams)
            fams.append(CircleFamily(i, cone, K, k, 1, kind, i + 1, P))
            fams.append(CircleFamily(i + 1, cone, K, k, 2, kind, i, P))
        else:
            fams.append(CircleFamily(len(fams), cone, K, k, 1, "single", None, P))
    if len(fams) > 6:
        raise UnsupportedPencilError("more than six families found; pencil is degenerate")
    return fams


def families_of(D: Cyclide, tol: Tolerance = DEFAULT) -> list[CircleFamily]:
    from .cyclide import to_pencil

    return extract_families(to_pencil(D), tol)


def intersect_circles(c1: MCircle, c2: MCircle, tol: float = 1e-8) -> list[np.ndarray]:
    """Common points of two M-circles, as points of R^3.

    Two planes of P^4 meet in a point (returned iff on Sigma) or, for
    co-spherical circles, in a line, which meets Sigma in 0 or 2 points
    (a tangency is returned twice).

    Raises
    ------
    ValueError
        If the circles coincide.
    """
    H = np.vstack([c1.hyperplanes, c2.hyperplanes])
    _, s, Vt = np.linalg.svd(H)
    rank = int(np.sum(s > tol * s[0]))
    ker = Vt[rank:]
    if ker.shape[0] >= 3:
        raise ValueError("identical circles")
    if ker.shape[0] == 1:
        X = ker[0]
        if abs(minkowski(X, X)) <= 1e3 * tol:
            return [extended_stereo(X)]
        return []
    p, q = ker
    G = np.array([[minkowski(p, p), minkowski(p, q)], [minkowski(p, q), minkowski(q, q)]])
    g, U = np.linalg.eigh(G)
    if g[0] > tol or g[1] < -tol:
        return []
    a, b = np.sqrt(max(-g[0], 0.0)), np.sqrt(max(g[1], 0.0))
    out = []
    for sgn in (1.0, -1.0):
        w = U[:, 0] * b + sgn * U[:, 1] * a
        X = w[0] * p + w[1] * q
        out.append(extended_stereo(X))
    return out


@dataclass(frozen=True)
class AxisGeometry:
    """Sphere ``B`` orthogonal to a paired pair and the quadric of circle axes.

    ``G`` is the 4x4 matrix of the axis quadric in homogeneous R^3
    coordinates, or ``None`` when ``B`` is a plane and the axes are the
    tangents of a conic in ``B`` (``degenerate`` is then True).
    """

    B: MSphere
    G: np.ndarray | None
    degenerate: bool


def _polar_dual_matrix(C: np.ndarray) -> np.ndarray:
    """Point quadric of the poles (w.r.t. Sigma) of the tangent hyperplanes of ``C``."""
    return J @ np.linalg.pinv(C, rcond=1e-10) @ J


def family_axis_geometry(F1: CircleFamily, F2: CircleFamily) -> AxisGeometry:
    if F1.partner != F2.id or F2.partner != F1.id:
        raise FamilyError("families are not a paired pair")
    V = F1.cone.vertex[0]
    B = MSphere(V)
    Zv = minkowski(np.array([0, 0, 0, 1.0, 1.0]), V)
    if abs(Zv) <= 1e-9:
        return AxisGeometry(B, None, True)
    D = _polar_dual_matrix(F1.cone.C)
    T = _hyperplane_chart(V)
    G = T.T @ D @ T
    return AxisGeometry(B, 0.5 * (G + G.T), False)


def _hyperplane_chart(V: np.ndarray) -> np.ndarray:
    """5x4 map from homogeneous R^3 points to the polar hyperplane of ``V``.

    The point ``(x, w)`` goes to ``xi + mu Z`` with ``xi = (x, 0, w)`` and
    ``mu`` chosen so that the result is conjugate to ``V``.
    """
    Zp = np.array([0, 0, 0, 1.0, 1.0])
    Xi = np.zeros((5, 4))
    Xi[0, 0] = Xi[1, 1] = Xi[2, 2] = 1.0
    Xi[4, 3] = 1.0
    JV = J @ V
    mu = -(JV @ Xi) / float(JV @ Zp)
    return Xi + np.outer(Zp, mu)


@dataclass(frozen=True)
class Conic:
    """Conic in a plane of R^3, or a straight line when degenerate."""

    origin: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    matrix: np.ndarray | None
    line: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def is_line(self) -> bool:
        return self.line is not None

    def sample(self, n: int = 64) -> np.ndarray:
        if self.line is not None:
            p, d = self.line
            return p + np.linspace(-1, 1, n)[:, None] * d
        pts = []
        M = self.matrix
        w, U = np.linalg.eigh(M)
        pos = w > 0
        if pos.sum() not in (1, 2):
            return np.zeros((0, 3))
        # diagonal form: sum w_i y_i^2 = 0 with y = U^T (u, v, 1)
        if pos.sum() == 1:
            w, U = -w, U
        order = np.argsort(w)  # one negative, two positive
        i0, i1, i2 = order
        for a in np.linspace(0, 2 * np.pi, n, endpoint=False):
            y = np.zeros(3)
            y[i0] = 1.0 / np.sqrt(-w[i0])
            y[i1] = np.cos(a) / np.sqrt(w[i1])
            y[i2] = np.sin(a) / np.sqrt(w[i2])
            h = U @ y
            if abs(h[2]) < 1e-12:
                continue
            u, v = h[0] / h[2], h[1] / h[2]
            pts.append(self.origin + u * self.e1 + v * self.e2)
        return np.array(pts)


@dataclass(frozen=True)
class CanalGeometry:
    g: Conic
    b: MCircle
    rotational: bool


def canal_geometry(F: CircleFamily) -> CanalGeometry:
    """Center conic ``g`` and orthogonal circle ``b`` of a single family."""
    if not F.is_single:
        raise FamilyError("family is not single")
    v1, v2 = F.cone.vertex
    b = MCircle(J @ v1, J @ v2)
    W = b.plane_basis
    Dm = _polar_dual_matrix(F.cone.C)
    Qc = W.T @ Dm @ W
    H = E3 @ W  # 4x3: plane coordinates -> homogeneous R^3
    U, sv, _ = np.linalg.svd(H)
    rotational = bool(sv[2] <= 1e-10 * sv[0])
    if rotational:
        # the plane of c passes through Z: all centers lie on a line
        img = U[:, :2]
        i = int(np.argmax(np.abs(img[3])))
        hp = img[:, i] / img[3, i]
        hd = img[:, 1 - i] - img[3, 1 - i] * hp
        d = hd[:3] / np.linalg.norm(hd[:3])
        line = (hp[:3], d)
        return CanalGeometry(Conic(hp[:3], d, np.zeros(3), None, line=line), b, True)
    # plane of g: affine frame from H
    h3 = H[3]
    c0 = h3 / float(h3 @ h3)
    o = extended_stereo(W @ c0)
    K = algebra.kernel(h3[None, :])
    e1 = H[:3] @ K[:, 0]
    e2 = H[:3] @ K[:, 1]
    # (u, v, 1) -> c = K (u, v) + c0, modulo scale
    T = np.column_stack([K[:, 0], K[:, 1], c0])
    G = T.T @ Qc @ T
    return CanalGeometry(Conic(o, e1, e2, 0.5 * (G + G.T)), b, False)


def family_summary(F: CircleFamily) -> dict:
    return {
        "id": F.id,
        "t": F.cone.t,
        "inertia": list(F.cone.inertia),
        "class": F.kind,
        "branch": F.branch,
        "partner": F.partner,
    }
