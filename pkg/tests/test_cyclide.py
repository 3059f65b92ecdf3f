import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from darboux.algebra import J
from darboux.cyclide import (
    Cyclide,
    DegenerateCyclideError,
    Pencil,
    classify,
    from_pencil,
    is_trivial,
    quadric,
    quadric_residual,
    symmetry_spheres,
    to_pencil,
)
from darboux.moebius import inversion_matrix, minkowski, stereo_lift


def unit_sphere():
    return Cyclide(0.0, np.zeros(3), np.eye(3), np.zeros(3), -1.0)


def test_torus_coefficients_expand_the_implicit_equation(ring_torus):
    D = ring_torus
    assert D.lam == 1.0 and np.allclose(D.L, 0)
    assert np.allclose(D.Qquad, np.diag([-10.0, -10.0, 6.0]))
    assert D.Qconst == 9.0
    rng = np.random.default_rng(3)
    for x in rng.normal(size=(20, 3)):
        r2 = x @ x
        assert np.isclose(D.eval(x), (r2 + 3) ** 2 - 16 * (x[0] ** 2 + x[1] ** 2))


def test_eval_examples(ring_torus):
    S = Cyclide(0.0, np.zeros(3), np.eye(3), [-2.0, 0, 0], 0.0)  # |x - (1,0,0)|^2 = 1
    assert S.eval([0, 0, 0]) == 0.0
    assert abs(unit_sphere().eval([1, 0, 0])) == 0.0
    assert ring_torus.eval([3, 0, 0]) == 0.0
    assert ring_torus.eval([0, 0, 0]) == 9.0


def test_vector_round_trip():
    rng = np.random.default_rng(0)
    v = rng.normal(size=14)
    assert np.allclose(Cyclide.from_vector(v).vector(), v)


def test_unit_sphere_is_trivial():
    D = unit_sphere()
    assert is_trivial(D)
    assert classify(D) == "trivial"


def test_x4_hyperplane_quadric_gives_a_trivial_cyclide():
    # Gamma: (X5 - X4) X4 = 0 contains the hyperplane X4 = 0; D is 2 (|x|^2 - 1)
    F = np.array([0.0, 0.0, 0.0, -1.0, 1.0])
    e4 = np.eye(5)[3]
    D = from_pencil(Pencil(0.5 * (np.outer(F, e4) + np.outer(e4, F))))
    assert is_trivial(D)
    assert np.isclose(D.eval([0, 0, 1]), 0.0)


def test_concentric_spheres_are_reducible():
    # (r^2 - 1)(r^2 - 4) = r^4 - 5 r^2 + 4
    D = Cyclide(1.0, np.zeros(3), -5 * np.eye(3), np.zeros(3), 4.0)
    assert classify(D) == "reducible"


def test_six_family_cyclide_is_irreducible(six_cyclide):
    assert classify(six_cyclide) == "irreducible"


def test_pencil_round_trip_is_projective(six_pencil):
    P2 = to_pencil(from_pencil(six_pencil))
    # the two pencils are the same projective line: A2 = a A + b J
    M = np.column_stack([six_pencil.A.ravel(), J.ravel()])
    coef, *_ = np.linalg.lstsq(M, P2.A.ravel(), rcond=None)
    assert np.allclose(M @ coef, P2.A.ravel(), atol=1e-12)
    assert abs(coef[0]) > 0


@given(st.integers(0, 100_000))
def test_cyclide_round_trip_up_to_scale(seed):
    rng = np.random.default_rng(seed)
    D = Cyclide.from_vector(rng.normal(size=14))
    if D.scale == 0:
        return
    D2 = from_pencil(to_pencil(D))
    a, b = D.vector(), D2.vector()
    k = (a @ b) / (b @ b)
    assert np.allclose(a, k * b, atol=1e-12 * np.abs(a).max())


@given(st.integers(0, 100_000))
def test_lifted_points_satisfy_the_pencil(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(5, 5))
    P = Pencil(A + A.T)
    D = from_pencil(P)
    x = rng.normal(size=3)
    X = stereo_lift(x)
    assert np.isclose(X @ P.A @ X, D.eval(x), rtol=1e-9, atol=1e-9 * D.scale * (1 + x @ x) ** 2)


def test_from_pencil_rejects_multiples_of_J():
    with pytest.raises(DegenerateCyclideError):
        Pencil(3.0 * J)


def test_six_family_symmetry_spheres_are_pairwise_orthogonal(six_pencil):
    S = symmetry_spheres(six_pencil)
    assert len(S) == 5
    kinds = [s.kind() for s in S]
    assert kinds.count("imaginary") == 1
    for i in range(5):
        for j in range(i + 1, 5):
            assert abs(minkowski(S[i].penta, S[j].penta)) < 1e-12


def test_torus_has_one_isolated_symmetry_vertex(ring_torus):
    # the two double eigenvalues carry vertex lines, not isolated vertices
    S = symmetry_spheres(to_pencil(ring_torus))
    assert len(S) == 1
    assert S[0].kind() == "imaginary"


def test_symmetry_spheres_of_random_pencil_fix_the_carrier():
    rng = np.random.default_rng(11)
    A = rng.normal(size=(5, 5))
    P = Pencil(A + A.T)
    for B in symmetry_spheres(P):
        M = inversion_matrix(B)
        # the inversion maps the pencil to itself
        A2 = M.T @ P.A @ M
        coef, *_ = np.linalg.lstsq(np.column_stack([P.A.ravel(), J.ravel()]), A2.ravel(), rcond=None)
        assert np.allclose(coef[0] * P.A + coef[1] * J, A2, atol=1e-9 * np.abs(A2).max())


def test_quadric_residual_on_torus(ring_torus):
    P = to_pencil(ring_torus)
    assert abs(quadric_residual(P, [3.0, 0.0, 0.0])) < 1e-15
    assert abs(quadric_residual(P, [0.0, 2.0, 1.0])) < 1e-15


def test_residual_is_scale_free(ring_torus):
    D = ring_torus
    D10 = Cyclide(*(10 * np.asarray(c) for c in (D.lam, D.L, D.Qquad, D.Qlin, D.Qconst)))
    x = np.array([0.3, 1.2, -0.7])
    assert np.isclose(D.residual(x), D10.residual(x))


def test_fit_recovers_torus(ring_torus):
    rng = np.random.default_rng(5)
    u, v = rng.uniform(0, 2 * np.pi, (2, 60))
    pts = np.column_stack([(2 + np.cos(v)) * np.cos(u), (2 + np.cos(v)) * np.sin(u), np.sin(v)])
    F = Cyclide.fit(pts)
    a, b = ring_torus.normalized().vector(), F.vector()
    assert np.allclose(np.abs(a), np.abs(b), atol=1e-8)


def test_quadric_preset():
    D = quadric(np.diag([1.0, 2.0, 3.0, -1.0]))
    assert D.lam == 0.0
    assert np.isclose(D.eval([1, 0, 0]), 0.0)
