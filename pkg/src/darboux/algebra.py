"""Linear algebra on the homogeneous 5-space.

Pencils ``A - t J`` of symmetric 5x5 matrices, their characteristic
polynomial, real root isolation with multiplicities, inertia and
congruence normal forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

from .tolerance import DEFAULT

J = np.diag([1.0, 1.0, 1.0, 1.0, -1.0])
J.setflags(write=False)


class Inertia(NamedTuple):
    n_plus: int
    n_minus: int
    n_zero: int


def sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def char_poly(A, Jm=J) -> Polynomial:
    """Return ``det(A - t Jm)`` as a polynomial in ``t``.

    Uses the Faddeev-LeVerrier recursion on ``Jm^{-1} A``, which is exact
    in rational arithmetic and well behaved for 5x5 float input.
    """
    A = np.asarray(A, dtype=float)
    Jm = np.asarray(Jm, dtype=float)
    n = A.shape[0]
    M = np.linalg.solve(Jm, A)
    # det(t I - M) = sum c_k t^k
    c = np.zeros(n + 1)
    c[n] = 1.0
    Mk = np.zeros_like(M)
    for k in range(1, n + 1):
        Mk = M @ Mk + c[n - k + 1] * np.eye(n)
        c[n - k] = -np.trace(M @ Mk) / k
    # det(A - tJ) = det(J) det(M - tI) = det(J) (-1)^n det(tI - M)
    scale = np.linalg.det(Jm) * (-1.0) ** n
    return Polynomial(scale * c)


def _trim(c: np.ndarray, thr: float) -> np.ndarray:
    c = np.array(c, dtype=float)
    c[np.abs(c) <= thr] = 0.0
    nz = np.nonzero(c)[0]
    if len(nz) == 0:
        return np.zeros(1)
    return c[: nz[-1] + 1]


def _normalized(c: np.ndarray) -> np.ndarray:
    m = np.max(np.abs(c))
    return c / m if m > 0 else c


def _approx_gcd(a: np.ndarray, b: np.ndarray, rel: float) -> np.ndarray:
    """Euclid with relative trimming of remainders; returns a monic gcd."""
    a = _normalized(a)
    b = _normalized(b)
    while len(b) > 1:
        _, r = P.polydiv(a, b)
        r = _trim(r, rel * max(1.0, np.max(np.abs(a))))
        if len(r) == 1 and r[0] == 0.0:
            return b / b[-1]
        a, b = b, _normalized(r)
    return np.ones(1)


def _sturm_sequence(q: np.ndarray, rel: float) -> list[np.ndarray]:
    seq = [_normalized(q), _normalized(P.polyder(q))]
    while len(seq[-1]) > 1:
        _, r = P.polydiv(seq[-2], seq[-1])
        r = _trim(-r, rel * np.max(np.abs(seq[-2])))
        if len(r) == 1 and r[0] == 0.0:
            break
        seq.append(r / np.max(np.abs(r)))
    return seq


def _variations(seq: list[np.ndarray], x: float) -> int:
    vals = [P.polyval(x, s) for s in seq]
    signs = [np.sign(v) for v in vals if v != 0.0]
    return int(sum(1 for u, v in zip(signs, signs[1:]) if u != v))


def _refine(q: np.ndarray, lo: float, hi: float) -> float:
    flo = P.polyval(lo, q)
    for _ in range(200):
        if hi - lo <= 1e-13 * max(1.0, abs(lo), abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        fm = P.polyval(mid, q)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    dq = P.polyder(q)
    for _ in range(3):
        d = P.polyval(x, dq)
        if d == 0.0:
            break
        step = P.polyval(x, q) / d
        if abs(step) > (hi - lo) + 1e-12:
            break
        x -= step
    return float(x)


def _isolate(q: np.ndarray, rel: float) -> list[float]:
    """Real roots of a square-free polynomial via Sturm bisection."""
    if len(q) <= 1:
        return []
    seq = _sturm_sequence(q, rel)
    bound = 1.0 + np.max(np.abs(q[:-1] / q[-1]))
    lo, hi = -bound * 1.01 - 1e-3, bound * 1.01 + 1e-3
    stack = [(lo, hi, _variations(seq, lo), _variations(seq, hi))]
    roots = []
    while stack:
        a, b, va, vb = stack.pop()
        n = va - vb
        if n <= 0:
            continue
        if n == 1 and np.sign(P.polyval(a, q)) != np.sign(P.polyval(b, q)):
            roots.append(_refine(q, a, b))
            continue
        if b - a < 1e-11 * max(1.0, abs(a)):
            roots.extend([0.5 * (a + b)] * n)
            continue
        m = 0.5 * (a + b)
        if P.polyval(m, q) == 0.0:
            m += 1e-3 * (b - a)
        vm = _variations(seq, m)
        stack.append((a, m, va, vm))
        stack.append((m, b, vm, vb))
    return sorted(roots)


def real_roots(p, tol: float | None = None) -> list[tuple[float, int]]:
    """Real roots of ``p`` with multiplicities, ascending.

    Parameters
    ----------
    p : Polynomial or array_like
        Polynomial (ascending coefficients when array-like).
    tol : float, optional
        Cluster tolerance factor; roots closer than
        ``tol * (1 + max|coeff|)`` are merged (coefficients scaled to
        max-abs 1).

    Raises
    ------
    ValueError
        If ``p`` vanishes identically at tolerance.
    """
    c = p.coef if isinstance(p, Polynomial) else np.asarray(p, dtype=float)
    if c.size == 0 or np.max(np.abs(c)) == 0.0:
        raise ValueError("zero polynomial")
    tol = DEFAULT.root_cluster if tol is None else tol
    c = _trim(_normalized(c), 1e-14)
    return _real_roots(c, tol * 2.0)


def _real_roots(c: np.ndarray, cluster: float) -> list[tuple[float, int]]:
    if len(c) <= 1:
        return []
    g = _approx_gcd(c, P.polyder(c), 1e-11)
    q, _ = P.polydiv(c, g) if len(g) > 1 else (c, None)
    simple = _isolate(_normalized(q), 1e-13)
    sub = _real_roots(_normalized(g), cluster) if len(g) > 1 else []
    out: list[list] = []
    for r in simple:
        if out and abs(r - out[-1][0]) <= cluster * max(1.0, abs(r)):
            out[-1][1] += 1
            continue
        out.append([r, 1])
    for item in out:
        for r, m in sub:
            if abs(r - item[0]) <= max(cluster, 1e-6) * max(1.0, abs(r)):
                item[1] += m
                break
    return [(float(r), int(m)) for r, m in out]


def _scale(C: np.ndarray) -> float:
    return max(float(np.max(np.abs(C))), np.finfo(float).tiny)


def inertia(C, tol: float | None = None) -> Inertia:
    """Counts of positive, negative and zero eigenvalues.

    ``tol`` is relative to the largest eigenvalue magnitude.
    """
    tol = DEFAULT.zero if tol is None else tol
    w = np.linalg.eigvalsh(sym(C))
    thr = tol * max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    return Inertia(int(np.sum(w > thr)), int(np.sum(w < -thr)), int(np.sum(np.abs(w) <= thr)))


class SignatureError(ValueError):
    """Raised when a matrix does not have a signature carrying planes."""


def congruence_diagonalize(C, tol: float | None = None):
    """Congruence normal form ``K^T C K = diag(k1^2, k2^2, -k3^2, -k4^2, 0)``.

    ``K`` is orthogonal.  Positives come first, negatives next, zeros last,
    each group by decreasing magnitude.  For signature ``(2, 1, 2)`` the
    slot ``k4`` is zero; for ``(1, 2, 2)`` the slot ``k2`` is zero.

    Returns
    -------
    K : ndarray (5, 5)
    d : ndarray (5,)
    """
    C = sym(C)
    tol = DEFAULT.zero if tol is None else tol
    w, U = np.linalg.eigh(C)
    thr = tol * max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    pos = sorted(np.nonzero(w > thr)[0], key=lambda i: -abs(w[i]))
    neg = sorted(np.nonzero(w < -thr)[0], key=lambda i: -abs(w[i]))
    zer = sorted(np.nonzero(np.abs(w) <= thr)[0], key=lambda i: -abs(w[i]))
    sig = (len(pos), len(neg), len(zer))
    if sig == (2, 2, 1):
        order = [pos[0], pos[1], neg[0], neg[1], zer[0]]
    elif sig == (2, 1, 2):
        order = [pos[0], pos[1], neg[0], zer[0], zer[1]]
    elif sig == (1, 2, 2):
        order = [pos[0], zer[0], neg[0], neg[1], zer[1]]
    else:
        raise SignatureError(f"signature {sig} carries no plane family")
    K = U[:, order].copy()
    for j in range(5):
        i = int(np.argmax(np.abs(K[:, j])))
        if K[i, j] < 0:
            K[:, j] *= -1.0
    d = w[order].copy()
    d[[k for k, i in enumerate(order) if i in zer]] = 0.0
    return K, d


def null_space(C, tol: float | None = None) -> list[np.ndarray]:
    """Orthonormal kernel basis; its size is the zero count of :func:`inertia`."""
    C = sym(C)
    tol = DEFAULT.zero if tol is None else tol
    w, U = np.linalg.eigh(C)
    thr = tol * max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    out = []
    for i in np.nonzero(np.abs(w) <= thr)[0]:
        v = U[:, i].copy()
        j = int(np.argmax(np.abs(v)))
        out.append(v if v[j] > 0 else -v)
    return out


def eval_quadric(C, X) -> float:
    X = np.asarray(X, dtype=float)
    return float(X @ np.asarray(C, dtype=float) @ X)


def kernel(M, rel: float = 1e-9) -> np.ndarray:
    """Columns spanning the right kernel of a (possibly rectangular) matrix."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    _, s, Vt = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rel * max(smax, np.finfo(float).tiny)))
    return Vt[rank:].T


@dataclass(frozen=True)
class PencilEigen:
    """A real root of ``det(A - tJ)`` refined against the matrix."""

    t: float
    multiplicity: int


def refine_eigenvalues(A, roots: list[tuple[float, int]], Jm=J) -> list[PencilEigen]:
    """Polish polynomial roots with the eigenvalues of ``Jm^{-1} A``.

    Multiple roots of the characteristic polynomial are only accurate to
    roughly ``eps**(1/m)``; the mean of the ``m`` nearest matrix
    eigenvalues is accurate to machine precision for semisimple and
    defective eigenvalues alike.
    """
    ev = np.linalg.eigvals(np.linalg.solve(np.asarray(Jm, float), np.asarray(A, float)))
    out = []
    for r, m in roots:
        near = ev[np.argsort(np.abs(ev - r))[:m]]
        out.append(PencilEigen(float(np.mean(near).real), m))
    return out
