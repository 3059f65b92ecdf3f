"""Darboux cyclides and their pencils of quadrics.

A cyclide ``lam |x|^4 + |x|^2 L.x + Q(x) = 0`` lifts to the carrier of the
pencil ``X^T (A - t J) X = 0`` of quadrics through the Moebius sphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import algebra
from .algebra import J, Inertia
from .moebius import MSphere, minkowski, stereo_lift
from .tolerance import DEFAULT, Tolerance

_E = np.array([0.0, 0.0, 0.0, 1.0, 1.0])
_F = np.array([0.0, 0.0, 0.0, -1.0, 1.0])


class DegenerateCyclideError(ValueError):
    pass


@dataclass(frozen=True)
class Cyclide:
    """Coefficients of ``lam r^4 + r^2 L.x + x^T Qquad x + Qlin.x + Qconst``."""

    lam: float
    L: np.ndarray
    Qquad: np.ndarray
    Qlin: np.ndarray
    Qconst: float

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "L", np.asarray(self.L, dtype=float).reshape(3))
        object.__setattr__(self, "Qquad", algebra.sym(np.asarray(self.Qquad, dtype=float).reshape(3, 3)))
        object.__setattr__(self, "Qlin", np.asarray(self.Qlin, dtype=float).reshape(3))
        object.__setattr__(self, "Qconst", float(self.Qconst))

    @classmethod
    def from_vector(cls, v) -> "Cyclide":
        """Inverse of :meth:`vector`."""
        v = np.asarray(v, dtype=float)
        q = np.zeros((3, 3))
        q[np.triu_indices(3)] = v[4:10]
        q = 0.5 * (q + q.T)
        q[np.diag_indices(3)] = v[[4, 7, 9]]
        return cls(v[0], v[1:4], q, v[10:13], v[13])

    def vector(self) -> np.ndarray:
        """The 14 monomial coefficients.

        Order: lam, L (3), Qquad upper triangle as coefficients of
        ``xx, xy, xz, yy, yz, zz`` (off-diagonal doubled), Qlin (3), Qconst.
        """
        q = self.Qquad
        quad = [q[0, 0], 2 * q[0, 1], 2 * q[0, 2], q[1, 1], 2 * q[1, 2], q[2, 2]]
        return np.concatenate([[self.lam], self.L, quad, self.Qlin, [self.Qconst]])

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.vector())))

    def normalized(self) -> "Cyclide":
        """Rescaled so the max-abs coefficient is 1."""
        s = self.scale
        if s == 0.0:
            raise DegenerateCyclideError("all coefficients vanish")
        return Cyclide(self.lam / s, self.L / s, self.Qquad / s, self.Qlin / s, self.Qconst / s)

    def eval(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        val = (
            self.lam * r2**2
            + r2 * (x @ self.L)
            + np.einsum("...i,ij,...j->...", x, self.Qquad, x)
            + x @ self.Qlin
            + self.Qconst
        )
        return val if np.ndim(val) else float(val)

    def residual(self, x) -> np.ndarray | float:
        """Scale-free residual ``|D(x)| / (max|coeff| (1 + |x|^2)^2)``."""
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        return np.abs(self.eval(x)) / (self.scale * (1.0 + r2) ** 2)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        return (
            4 * self.lam * r2 * x
            + 2 * x * (x @ self.L)
            + r2 * self.L
            + 2 * self.Qquad @ x
            + self.Qlin
        )

    def project(self, x, iters: int = 30) -> np.ndarray:
        """Newton projection of a nearby point onto the zero set."""
        x = np.array(x, dtype=float)
        for _ in range(iters):
            g = self.gradient(x)
            gg = float(g @ g)
            if gg == 0.0:
                break
            step = self.eval(x) / gg * g
            x = x - step
            if np.linalg.norm(step) < 1e-15 * max(1.0, np.linalg.norm(x)):
                break
        return x

    @classmethod
    def fit(cls, points) -> "Cyclide":
        """Least-squares cyclide through sample points (SVD null vector)."""
        pts = np.asarray(points, dtype=float)
        x, y, z = pts.T
        r2 = x * x + y * y + z * z
        one = np.ones_like(x)
        M = np.column_stack([r2**2, r2 * x, r2 * y, r2 * z, x * x, x * y, x * z, y * y, y * z, z * z, x, y, z, one])
        scale = np.max(np.abs(M), axis=0)
        scale[scale == 0] = 1.0
        _, _, Vt = np.linalg.svd(M / scale)
        return cls.from_vector(Vt[-1] / scale).normalized()


@dataclass(frozen=True)
class Pencil:
    """Pencil ``A - t J`` with ``J = diag(1, 1, 1, 1, -1)``."""

    A: np.ndarray

    def __post_init__(self):
        A = algebra.sym(self.A)
        if A.shape != (5, 5):
            raise ValueError("pencil matrix must be 5x5")
        resid = A - (np.trace(J @ A) / 5.0) * J
        if np.max(np.abs(resid)) <= 1e-12 * max(np.max(np.abs(A)), 1e-300):
            raise DegenerateCyclideError("A is proportional to J")
        object.__setattr__(self, "A", A)

    def member(self, t: float) -> np.ndarray:
        return self.A - t * J

    def transformed(self, M) -> "Pencil":
        """Pencil of the image under the Moebius map ``X -> M X``."""
        Minv = np.linalg.inv(np.asarray(M, dtype=float))
        return Pencil(Minv.T @ self.A @ Minv)

    def eigen(self, tol: Tolerance = DEFAULT) -> list[algebra.PencilEigen]:
        roots = algebra.real_roots(algebra.char_poly(self.A), tol.root_cluster)
        return algebra.refine_eigenvalues(self.A, roots)

    def cone_inertias(self, tol: Tolerance = DEFAULT) -> list[tuple[float, Inertia]]:
        return [(e.t, algebra.inertia(self.member(e.t), tol.zero)) for e in self.eigen(tol)]


def to_pencil(D: Cyclide) -> Pencil:
    """The quadric ``Gamma`` of the lifted cyclide, made trace-orthogonal to J."""
    A = np.zeros((5, 5))
    lam, l, q, ql, q0 = D.lam, D.L, D.Qquad, D.Qlin, D.Qconst
    # lam (X5+X4)^2
    A += lam * np.outer(_E, _E)
    # (X5+X4) (l . Xbar)
    lv = np.concatenate([l, [0.0, 0.0]])
    A += 0.5 * (np.outer(_E, lv) + np.outer(lv, _E))
    # Xbar^T q Xbar
    A[:3, :3] += q
    # (ql . Xbar)(X5 - X4)
    qv = np.concatenate([ql, [0.0, 0.0]])
    A += 0.5 * (np.outer(_F, qv) + np.outer(qv, _F))
    # q0 (X5 - X4)^2
    A += q0 * np.outer(_F, _F)
    A -= (np.trace(A @ J) / 5.0) * J
    return Pencil(A)


def from_pencil(P: Pencil | np.ndarray) -> Cyclide:
    """Cyclide obtained by substituting the stereographic lift into ``X^T A X``."""
    A = P.A if isinstance(P, Pencil) else algebra.sym(P)
    Ae = A @ _E
    Af = A @ _F
    lam = float(_E @ Ae)
    L = 4.0 * Ae[:3]
    Qquad = 4.0 * A[:3, :3] + 2.0 * float(_E @ Af) * np.eye(3)
    Qlin = 4.0 * Af[:3]
    Qconst = float(_F @ Af)
    D = Cyclide(lam, L, Qquad, Qlin, Qconst)
    if D.scale <= 1e-12 * max(float(np.max(np.abs(A))), 1e-300):
        raise DegenerateCyclideError("A is proportional to J")
    return D


CyclideClass = Literal["trivial", "reducible", "irreducible"]


def is_trivial(D: Cyclide, tol: float | None = None) -> bool:
    tol = DEFAULT.zero if tol is None else tol
    s = D.scale
    if s == 0.0:
        raise DegenerateCyclideError("all coefficients vanish")
    a = np.trace(D.Qquad) / 3.0
    return bool(
        abs(D.lam) <= tol * s
        and np.max(np.abs(D.L)) <= tol * s
        and np.max(np.abs(D.Qquad - a * np.eye(3))) <= tol * s
    )


def classify(D: Cyclide, tol: Tolerance = DEFAULT) -> CyclideClass:
    """Trivial, reducible or irreducible.

    Reducible when some cone of the pencil has rank <= 2 (a sphere pair)
    or is semidefinite (the real carrier is at most a curve).
    """
    if is_trivial(D, tol.zero):
        return "trivial"
    P = to_pencil(D)
    return "reducible" if pencil_is_reducible(P, tol) else "irreducible"


def pencil_is_reducible(P: Pencil, tol: Tolerance = DEFAULT) -> bool:
    for t, inr in P.cone_inertias(tol):
        if inr.n_zero >= 3 or inr.n_plus == 0 or inr.n_minus == 0:
            return True
    return False


def symmetry_spheres(P: Pencil, tol: Tolerance = DEFAULT) -> list[MSphere]:
    """Spheres ``B_i`` with ``B_i* = V_i`` for simple eigenvalues off Sigma."""
    out = []
    for e in P.eigen(tol):
        if e.multiplicity != 1:
            continue
        ns = algebra.null_space(P.member(e.t), tol.zero)
        if len(ns) != 1:
            continue
        V = ns[0]
        if abs(minkowski(V, V)) <= tol.zero:
            continue
        out.append(MSphere(V))
    return out


def quadric_residual(P: Pencil, x) -> float:
    X = stereo_lift(x)
    X = X / np.linalg.norm(X)
    return algebra.eval_quadric(P.A, X) / max(float(np.max(np.abs(P.A))), 1e-300)


# Presets used by the CLI and the tests.


def torus(R: float = 2.0, r: float = 1.0) -> Cyclide:
    """Ring torus ``(|x|^2 + R^2 - r^2)^2 = 4 R^2 (x^2 + y^2)`` about the z-axis."""
    c = R * R - r * r
    return Cyclide(1.0, np.zeros(3), np.diag([2 * c - 4 * R * R, 2 * c - 4 * R * R, 2 * c]), np.zeros(3), c * c)


def six_family_pencil() -> Pencil:
    return Pencil(np.diag([-2.0, -1.0, 1.0, 2.0, 0.0]))


def quadric(M4) -> Cyclide:
    """Cyclide of a quadric ``(x, 1)^T M4 (x, 1) = 0`` (``lam = L = 0``)."""
    M4 = algebra.sym(M4)
    return Cyclide(0.0, np.zeros(3), M4[:3, :3], 2 * M4[:3, 3], M4[3, 3])
