"""Spherical model of 3D Moebius geometry.

Points of R^3 (plus the ideal point) live on the quadric
``Sigma: X1^2 + X2^2 + X3^2 + X4^2 - X5^2 = 0`` of the projective 4-space.
M-spheres are hyperplanes, represented by their poles (pentaspherical
coordinates); M-circles are 2-planes, stored as two hyperplanes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, NamedTuple

import numpy as np

from .algebra import J, kernel
from .tolerance import DEFAULT

Z = np.array([0.0, 0.0, 0.0, 1.0, 1.0])
Z.setflags(write=False)

INF = np.full(3, np.inf)


class NotOnSphereError(ValueError):
    pass


def normalize(X) -> np.ndarray:
    """Unit 5-norm, first nonzero coordinate positive."""
    X = np.asarray(X, dtype=float)
    n = np.linalg.norm(X)
    if n == 0.0:
        raise ValueError("zero homogeneous vector")
    X = X / n
    i = int(np.argmax(np.abs(X) > 1e-12))
    return X if X[i] > 0 else -X


def proj_equal(X, Y, tol: float = 1e-9) -> bool:
    X, Y = normalize(X), normalize(Y)
    return bool(min(np.linalg.norm(X - Y), np.linalg.norm(X + Y)) <= tol)


def minkowski(A, B) -> float:
    """``<A, B> = a1 b1 + ... + a4 b4 - a5 b5``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return float(A[:4] @ B[:4] - A[4] * B[4])


def is_infinite(x) -> bool:
    return bool(np.any(np.isinf(np.asarray(x, dtype=float))))


def stereo_lift(x) -> np.ndarray:
    """Homogeneous lift ``(2x, 2y, 2z, |x|^2 - 1, |x|^2 + 1)`` onto Sigma.

    The ideal point (any infinite coordinate) maps to ``Z``.  The result is
    not normalized, so it is polynomial in ``x``.
    """
    x = np.asarray(x, dtype=float)
    if is_infinite(x):
        return Z.copy()
    r2 = float(x @ x)
    return np.array([2 * x[0], 2 * x[1], 2 * x[2], r2 - 1.0, r2 + 1.0])


def on_sigma(X, tol: float | None = None) -> bool:
    tol = DEFAULT.zero if tol is None else tol
    X = np.asarray(X, dtype=float)
    return abs(minkowski(X, X)) <= tol * float(X @ X)


def stereo_project(X, tol: float = 1e-7) -> np.ndarray:
    """Stereographic projection from ``Z``; returns :data:`INF` at ``Z``.

    Raises
    ------
    NotOnSphereError
        If ``X`` is not on Sigma within ``tol`` (relative).
    """
    X = np.asarray(X, dtype=float)
    if not on_sigma(X, tol):
        raise NotOnSphereError("point is not on the Moebius sphere")
    return extended_stereo(X)


def extended_stereo(X) -> np.ndarray:
    """Central projection from ``Z`` onto ``x4 = 0``."""
    X = np.asarray(X, dtype=float)
    w = X[4] - X[3]
    if abs(w) <= 1e-13 * np.linalg.norm(X):
        return INF.copy()
    return X[:3] / w


def hom3(X) -> np.ndarray:
    """Homogeneous R^3 image ``(X1, X2, X3, X5 - X4)`` of the central projection."""
    X = np.asarray(X, dtype=float)
    return np.array([X[0], X[1], X[2], X[4] - X[3]])


# Matrix of ``hom3`` (4x5).
E3 = np.array(
    [
        [1.0, 0, 0, 0, 0],
        [0, 1.0, 0, 0, 0],
        [0, 0, 1.0, 0, 0],
        [0, 0, 0, -1.0, 1.0],
    ]
)


SphereKind = Literal["real", "null", "imaginary", "plane"]


@dataclass(frozen=True)
class MSphere:
    """M-sphere ``lam |x|^2 + a x + b y + c z + d = 0`` via its pole.

    ``penta = (a, b, c, lam - d, -lam - d)`` up to scale; the carrying
    hyperplane of Sigma has coefficient vector ``J @ penta``.
    """

    penta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "penta", normalize(self.penta))

    @classmethod
    def from_equation(cls, lam, abc, d) -> "MSphere":
        a, b, c = np.asarray(abc, dtype=float)
        return cls(np.array([a, b, c, lam - d, -lam - d]))

    @classmethod
    def from_center(cls, m, r2) -> "MSphere":
        """Sphere ``|x - m|^2 = r2`` (``r2 < 0`` gives an imaginary sphere)."""
        m = np.asarray(m, dtype=float)
        return cls.from_equation(1.0, -2.0 * m, float(m @ m) - r2)

    @classmethod
    def plane(cls, normal, offset) -> "MSphere":
        """Plane ``normal . x = offset``."""
        return cls.from_equation(0.0, np.asarray(normal, dtype=float), -float(offset))

    @classmethod
    def point(cls, x) -> "MSphere":
        """Null sphere at ``x``."""
        return cls(J @ stereo_lift(x))

    @classmethod
    def from_hyperplane(cls, h) -> "MSphere":
        return cls(J @ np.asarray(h, dtype=float))

    @property
    def hyperplane(self) -> np.ndarray:
        return J @ self.penta

    @property
    def coefficients(self) -> tuple[float, np.ndarray, float]:
        """``(lam, (a, b, c), d)`` at the stored scale."""
        p = self.penta
        lam = 0.5 * (p[3] - p[4])
        d = -0.5 * (p[3] + p[4])
        return lam, p[:3].copy(), d

    @property
    def norm2(self) -> float:
        return minkowski(self.penta, self.penta)

    def is_plane(self, tol: float | None = None) -> bool:
        tol = DEFAULT.zero if tol is None else tol
        lam, _, _ = self.coefficients
        return abs(lam) <= tol

    def kind(self, tol: float | None = None) -> SphereKind:
        tol = DEFAULT.zero if tol is None else tol
        if self.is_plane(tol):
            return "plane"
        n = self.norm2
        if n > tol:
            return "real"
        if n < -tol:
            return "imaginary"
        return "null"

    @property
    def center(self) -> np.ndarray:
        """Midpoint (extended stereographic image of the pole)."""
        return extended_stereo(self.penta)

    @property
    def radius2(self) -> float:
        lam, abc, d = self.coefficients
        if lam == 0.0:
            return float("inf")
        m = -abc / (2.0 * lam)
        return float(m @ m - d / lam)

    def evaluate(self, x) -> float:
        lam, abc, d = self.coefficients
        x = np.asarray(x, dtype=float)
        return float(lam * (x @ x) + abc @ x + d)

    def real_representer(self) -> "MSphere":
        r2 = self.radius2
        return MSphere.from_center(self.center, abs(r2))


def orthogonal(S1: MSphere, S2: MSphere, tol: float | None = None) -> bool:
    tol = DEFAULT.zero if tol is None else tol
    return abs(minkowski(S1.penta, S2.penta)) <= tol * np.linalg.norm(S1.penta) * np.linalg.norm(S2.penta)


PencilClass = Literal["elliptic", "parabolic", "hyperbolic"]


def _orthonormal_pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    B, _ = np.linalg.qr(np.column_stack([p, q]))
    return B[:, 0], B[:, 1]


def classify_pencil_line(p, q, tol: float | None = None) -> PencilClass:
    """Classify the line through ``p`` and ``q`` against Sigma.

    Elliptic if it misses Sigma, parabolic if tangent, hyperbolic if secant.
    """
    tol = DEFAULT.zero if tol is None else tol
    e, f = _orthonormal_pair(p, q)
    G = np.array([[minkowski(e, e), minkowski(e, f)], [minkowski(e, f), minkowski(f, f)]])
    det = float(np.linalg.det(G))
    if det > tol:
        return "elliptic"
    if det < -tol:
        return "hyperbolic"
    return "parabolic"


def inversion_matrix(B: MSphere) -> np.ndarray:
    """Harmonic homology with center ``B*`` and axis the polar hyperplane of ``B*``."""
    b = B.penta
    n = minkowski(b, b)
    if abs(n) <= DEFAULT.zero:
        raise ValueError("inversion in a null sphere is undefined")
    return np.eye(5) - 2.0 * np.outer(b, J @ b) / n


def inversion(B: MSphere, X) -> np.ndarray:
    return inversion_matrix(B) @ np.asarray(X, dtype=float)


def invert_point(B: MSphere, x) -> np.ndarray:
    """Euclidean image of ``x`` under the inversion in ``B``."""
    return extended_stereo(inversion(B, stereo_lift(x)))


def is_moebius_matrix(M, tol: float = 1e-9) -> bool:
    """True iff ``M^T J M = lam J`` for some ``lam != 0``."""
    M = np.asarray(M, dtype=float)
    G = M.T @ J @ M
    lam = float(np.trace(J @ G)) / 5.0
    scale = max(float(np.max(np.abs(G))), np.finfo(float).tiny)
    if abs(lam) <= tol * scale:
        return False
    return bool(np.max(np.abs(G - lam * J)) <= tol * scale)


class CircleView(NamedTuple):
    kind: Literal["circle", "line", "point", "imaginary"]
    center: np.ndarray | None = None
    radius: float | None = None
    normal: np.ndarray | None = None
    direction: np.ndarray | None = None


@dataclass(frozen=True)
class MCircle:
    """M-circle as the 2-plane ``{h1 . X = 0, h2 . X = 0}`` of P^4.

    The plane is the source of truth; the Euclidean view is derived.
    """

    h1: np.ndarray
    h2: np.ndarray
    family: int | None = field(default=None, compare=False)
    s: float | None = field(default=None, compare=False)

    def __post_init__(self):
        H = np.vstack([np.asarray(self.h1, float), np.asarray(self.h2, float)])
        Q, R = np.linalg.qr(H.T)
        if abs(R[1, 1]) <= 1e-12 * abs(R[0, 0]):
            raise ValueError("circle hyperplanes are linearly dependent")
        object.__setattr__(self, "h1", Q[:, 0])
        object.__setattr__(self, "h2", Q[:, 1])

    @property
    def hyperplanes(self) -> np.ndarray:
        return np.vstack([self.h1, self.h2])

    @cached_property
    def plane_basis(self) -> np.ndarray:
        """5x3 orthonormal basis of the 2-plane."""
        return kernel(self.hyperplanes, 1e-12)

    @property
    def polar_line(self) -> tuple[np.ndarray, np.ndarray]:
        return J @ self.h1, J @ self.h2

    def pencil_class(self, tol: float | None = None) -> PencilClass:
        return classify_pencil_line(*self.polar_line, tol=tol)

    def is_real(self, tol: float | None = None) -> bool:
        return self.pencil_class(tol) == "elliptic"

    def contains(self, X, tol: float = 1e-9) -> bool:
        X = normalize(X)
        return bool(np.max(np.abs(self.hyperplanes @ X)) <= tol)

    @cached_property
    def frame(self) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
        """Minkowski-orthonormal ``(f, e1, e2)`` of the plane, ``<f,f> = -1``.

        Points ``f + cos(a) e1 + sin(a) e2`` run through the circle on Sigma.
        ``None`` unless the circle is real.
        """
        W = self.plane_basis
        G = W.T @ J @ W
        g, U = np.linalg.eigh(0.5 * (G + G.T))
        if not (g[0] < 0 < g[1]):
            return None
        vecs = [W @ U[:, i] / np.sqrt(abs(g[i])) for i in range(3)]
        return vecs[0], vecs[1], vecs[2]

    def lift_at(self, angle) -> np.ndarray:
        f, e1, e2 = self._frame_or_raise()
        a = np.asarray(angle, dtype=float)
        return f[:, None] * np.ones_like(a) + np.outer(e1, np.cos(a)) + np.outer(e2, np.sin(a))

    def angle_of(self, X) -> float:
        f, e1, e2 = self._frame_or_raise()
        X = np.asarray(X, dtype=float)
        # X ~ f + cos e1 + sin e2 up to scale; <X, f> = -scale
        sc = -minkowski(X, f)
        return float(np.arctan2(minkowski(X, e2) / sc, minkowski(X, e1) / sc))

    def _frame_or_raise(self):
        fr = self.frame
        if fr is None:
            raise ValueError("circle has no real points")
        return fr

    def sample(self, n: int = 64) -> np.ndarray:
        """``n`` points of the circle in R^3 (ideal point skipped)."""
        X = self.lift_at(np.linspace(0.0, 2 * np.pi, n, endpoint=False))
        pts = np.array([extended_stereo(X[:, i]) for i in range(X.shape[1])])
        return pts[np.all(np.isfinite(pts), axis=1)]

    @cached_property
    def view(self) -> CircleView:
        cls = self.pencil_class()
        if cls == "hyperbolic":
            return CircleView("imaginary")
        S1 = MSphere.from_hyperplane(self.h1)
        S2 = MSphere.from_hyperplane(self.h2)
        l1, a1, d1 = S1.coefficients
        l2, a2, d2 = S2.coefficients
        # plane of the circle: eliminate |x|^2
        if abs(l1) < abs(l2):
            l1, a1, d1, l2, a2, d2 = l2, a2, d2, l1, a1, d1
        n = l1 * a2 - l2 * a1
        e = l1 * d2 - l2 * d1
        if abs(l1) <= 1e-12 * max(np.linalg.norm(a1), 1.0):
            # both are planes: a line through infinity
            dirn = np.cross(a1, a2)
            if np.linalg.norm(dirn) <= 1e-12 * np.linalg.norm(a1) * np.linalg.norm(a2):
                return CircleView("point", center=INF.copy())
            dirn /= np.linalg.norm(dirn)
            A = np.vstack([a1, a2])
            p0 = np.linalg.lstsq(A, -np.array([d1, d2]), rcond=None)[0]
            return CircleView("line", center=p0, direction=dirn)
        m = -a1 / (2 * l1)
        r2 = float(m @ m - d1 / l1)
        nn = float(n @ n)
        nunit = n / np.sqrt(nn)
        dist = (float(n @ m) + e) / np.sqrt(nn)
        c = m - dist * nunit
        rad2 = r2 - dist**2
        if cls == "parabolic" or abs(rad2) <= 1e-12 * max(1.0, r2):
            return CircleView("point", center=c, normal=nunit)
        return CircleView("circle", center=c, radius=float(np.sqrt(rad2)), normal=nunit)


def circle_from_spheres(S1: MSphere, S2: MSphere) -> MCircle:
    try:
        return MCircle(S1.hyperplane, S2.hyperplane)
    except ValueError as exc:
        raise ValueError("spheres are dependent") from exc


def circle_through_points(p1, p2, p3) -> MCircle:
    """The M-circle through three distinct points of R^3 (or the ideal point)."""
    L = np.vstack([normalize(stereo_lift(p)) for p in (p1, p2, p3)])
    K = kernel(L, 1e-10)
    if K.shape[1] != 2:
        raise ValueError("points do not determine a unique circle")
    return MCircle(K[:, 0], K[:, 1])


def point_along(circle: MCircle, x, arc: float) -> np.ndarray:
    """Move ``x`` along ``circle`` by Euclidean arc length ``arc``."""
    v = circle.view
    x = np.asarray(x, dtype=float)
    if v.kind == "line":
        return x + arc * v.direction
    if v.kind != "circle":
        raise ValueError("circle has no real arc")
    u = x - v.center
    ang = arc / v.radius
    w = np.cross(v.normal, u)
    return v.center + np.cos(ang) * u + np.sin(ang) * w
