import warnings

import numpy as np
import pytest

from darboux.cyclide import torus
from darboux.design import (
    DesignError,
    DesignInputQuad,
    DesignInputThreeCircles,
    DesignWarning,
    canal_cyclide,
    conic_circle,
    conic_ellipse,
    cyclide_from_quad,
    cyclide_from_three_circles,
    orthogonality_defect,
    planar_circle,
    ruled_quadric_through_affine_lines,
)
from darboux.families import Conic, circle_at, families_of, family_axis_geometry, intersect_circles
from darboux.moebius import MSphere, invert_point, normalize

Z0 = MSphere.plane([0.0, 0.0, 1.0], 0.0)


def proportional(a, b, rtol=1e-6) -> bool:
    a, b = np.asarray(a).ravel(), np.asarray(b).ravel()
    k = (a @ b) / (b @ b)
    return bool(np.max(np.abs(a - k * b)) <= rtol * np.max(np.abs(a)))


def on_lines(Q, lines, n=5) -> float:
    worst = 0.0
    for p, d in lines:
        for u in np.linspace(-2, 2, n):
            x = np.append(np.asarray(p) + u * np.asarray(d), 1.0)
            worst = max(worst, abs(x @ Q @ x))
    return worst


def surface_points(D, per_family=8, n=16) -> np.ndarray:
    pts = []
    for F in families_of(D):
        for s in np.tan(np.linspace(-1.4, 1.4, per_family)):
            c = circle_at(F, s)
            if c.is_real():
                pts.append(c.sample(n))
    pts = np.vstack(pts)
    return pts[np.linalg.norm(pts, axis=1) < 1e3]


def half_circles():
    return (
        planar_circle([0.0, 0.0, 0.0], 1.0, [0.0, 1.0, 0.0]),
        planar_circle([2.0, 0.5, 0.0], 1.5, [1.0, 0.2, 0.0]),
        planar_circle([0.5, 2.5, 0.0], 0.8, [0.3, -1.0, 0.0]),
    )


@pytest.fixture(scope="module")
def villarceau(torus_families):
    V1, V2 = [f for f in torus_families if f.kind == "paired"]
    return V1, V2, family_axis_geometry(V1, V2).B


# -- ruled quadrics ----------------------------------------------------------------


def test_hyperboloid_from_three_rulings():
    th = [0.0, 2.1, 4.0]
    lines = [([np.cos(a), np.sin(a), 0.0], [-np.sin(a), np.cos(a), 1.0]) for a in th]
    Q = ruled_quadric_through_affine_lines(lines)
    assert proportional(Q, np.diag([1.0, 1.0, -1.0, -1.0]), 1e-12)
    assert on_lines(Q, lines) < 1e-12


def test_saddle_from_three_rulings():
    lines = [([a, 0.0, 0.0], [0.0, 1.0, a]) for a in (-1.0, 0.5, 2.0)]
    Q = ruled_quadric_through_affine_lines(lines)
    assert on_lines(Q, lines) < 1e-12
    # z = x y
    S = np.zeros((4, 4))
    S[0, 1] = S[1, 0] = 0.5
    S[2, 3] = S[3, 2] = -0.5
    assert proportional(Q, S, 1e-12)


def test_intersecting_lines_are_rejected():
    lines = [([0, 0, 0], [1, 0, 0]), ([0, 0, 0], [0, 1, 0]), ([0, 0, 1], [1, 1, 0])]
    with pytest.raises(DesignError):
        ruled_quadric_through_affine_lines(lines)


# -- three circles -------------------------------------------------------------------


def test_three_villarceau_circles_reproduce_the_torus(villarceau, ring_torus):
    V1, _, B = villarceau
    ks = [circle_at(V1, s) for s in (-0.8, 0.3, 2.0)]
    D = cyclide_from_three_circles(DesignInputThreeCircles(B, *ks))
    assert proportional(D.vector(), ring_torus.vector(), 1e-6)


def test_half_circles_over_a_plane():
    ks = half_circles()
    D = cyclide_from_three_circles(DesignInputThreeCircles(Z0, *ks))
    for c in ks:
        assert np.max(D.residual(c.sample(64))) <= 1e-7


def test_designed_cyclide_is_symmetric_in_B():
    D = cyclide_from_three_circles(DesignInputThreeCircles(Z0, *half_circles()))
    pts = surface_points(D, per_family=12)[:200]
    assert len(pts) == 200
    img = np.array([invert_point(Z0, x) for x in pts])
    assert np.max(D.residual(img)) <= 1e-7


def test_axis_sphere_round_trip():
    D = cyclide_from_three_circles(DesignInputThreeCircles(Z0, *half_circles()))
    fams = families_of(D)
    found = False
    for F in fams:
        if F.kind in ("paired", "special") and F.id < F.partner:
            B = family_axis_geometry(F, fams[F.partner]).B
            found |= proportional(normalize(B.penta), normalize(Z0.penta), 1e-8)
    assert found


def test_co_spherical_circles_are_rejected():
    k1 = planar_circle([0.0, 0.0, 0.0], 1.0, [1.0, 0.0, 0.0])
    k2 = planar_circle([0.0, 0.0, 0.0], 1.0, [0.0, 1.0, 0.0])
    k3 = planar_circle([3.0, 0.0, 0.0], 1.0, [1.0, 0.0, 0.0])
    with pytest.raises(DesignError, match="common sphere"):
        cyclide_from_three_circles(DesignInputThreeCircles(Z0, k1, k2, k3))


def test_non_orthogonal_circle_is_rejected():
    k1, k2, _ = half_circles()
    flat = planar_circle([0.0, 0.0, 1.0], 1.0, [0.0, 0.0, 1.0])
    with pytest.raises(DesignError, match="not orthogonal"):
        cyclide_from_three_circles(DesignInputThreeCircles(Z0, k1, k2, flat))


def test_nearly_orthogonal_circle_warns():
    k1, k2, k3 = half_circles()
    tilted = planar_circle([0.5, 2.5, 1e-6], 0.8, [0.3, -1.0, 0.0])
    assert 1e-7 < orthogonality_defect(tilted, Z0) < 1e-4
    with pytest.warns(DesignWarning):
        D = cyclide_from_three_circles(DesignInputThreeCircles(Z0, k1, k2, tilted))
    assert np.max(D.residual(k1.sample(32))) <= 1e-5


def test_point_sphere_is_rejected():
    with pytest.raises(DesignError, match="point sphere"):
        cyclide_from_three_circles(DesignInputThreeCircles(MSphere.from_center([0, 0, 0], 0.0), *half_circles()))


# -- quads ------------------------------------------------------------------------


def torus_quad(villarceau):
    V1, V2, B = villarceau
    ref = np.array([2.85, 0.87, 0.17])

    def meet(s, u):
        pts = intersect_circles(circle_at(V1, s), circle_at(V2, u))
        return min(pts, key=lambda p: np.linalg.norm(p - ref))

    corners = (meet(0.2, 0.1), meet(0.2, 0.5), meet(0.6, 0.5), meet(0.6, 0.1))
    return DesignInputQuad(corners, B, meet(0.4, 0.3))


def test_quad_from_torus_reproduces_it(villarceau, ring_torus):
    q = cyclide_from_quad(torus_quad(villarceau))
    assert proportional(q.cyclide.vector(), ring_torus.vector(), 1e-6)


def test_quad_boundary_lies_on_the_patch_and_is_orthogonal_to_B():
    inp = DesignInputQuad(
        ([0.0, 0.0, 1.0], [2.0, 0.0, 1.2], [2.2, 1.8, 0.9], [0.1, 2.0, 1.1]), Z0, np.array([1.1, 1.0, 1.6])
    )
    q = cyclide_from_quad(inp)
    D = q.cyclide
    assert D.residual(inp.P) <= 1e-7
    for c in q.boundary:
        assert orthogonality_defect(c, Z0) <= 1e-12
        assert np.max(D.residual(c.sample(64))) <= 1e-7
    for arc, a, b in zip(q.arcs, inp.corners, inp.corners[1:] + inp.corners[:1]):
        assert np.allclose(arc[0], a) and np.allclose(arc[-1], b)
        assert np.max(D.residual(arc)) <= 1e-7


def test_symmetric_quad_gives_a_symmetric_patch():
    # a kite over z = 0, mirror symmetric in x = 0 with P on the mirror plane
    corners = ([0.0, -1.0, 1.0], [1.0, 0.0, 1.2], [0.0, 1.5, 0.9], [-1.0, 0.0, 1.2])
    q = cyclide_from_quad(DesignInputQuad(corners, Z0, np.array([0.0, 0.2, 1.5])))
    pts = surface_points(q.cyclide)
    mirrored = pts * [-1.0, 1.0, 1.0]
    assert np.max(q.cyclide.residual(mirrored)) <= 1e-7


def test_planar_square_is_concyclic():
    square = ([0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0])
    with pytest.raises(DesignError, match="concyclic"):
        cyclide_from_quad(DesignInputQuad(square, Z0, np.array([0.5, 0.5, 1.5])))


def test_quad_errors():
    good = ([0.0, 0.0, 1.0], [2.0, 0.0, 1.2], [2.2, 1.8, 0.9], [0.1, 2.0, 1.1])
    with pytest.raises(DesignError, match="coincide"):
        cyclide_from_quad(DesignInputQuad((good[0], good[0], good[2], good[3]), Z0, np.array([1.0, 1.0, 1.0])))
    with pytest.raises(DesignError, match="on B"):
        cyclide_from_quad(DesignInputQuad((good[0], good[1], good[2], [0.1, 2.0, 0.0]), Z0, np.array([1.0, 1.0, 1.5])))
    with pytest.raises(DesignError, match="boundary circle"):
        cyclide_from_quad(DesignInputQuad(good, Z0, np.array(good[0])))


# -- canal cyclides ----------------------------------------------------------------------


def test_canal_through_a_point_is_a_horn_torus():
    D = canal_cyclide(conic_circle([0, 0, 0], 2.0), planar_circle([0, 0, 0], 0.0))
    assert D.residual([0.0, 0.0, 0.0]) <= 1e-12
    assert proportional(D.vector(), torus(2.0, 2.0).vector(), 1e-9)
    # every sphere of the family is tangent to the envelope along a circle:
    # the sphere |x - (2, 0, 0)| = 2 meets the surface in the meridian y = 0
    u = np.linspace(0, 2 * np.pi, 24)
    meridian = np.column_stack([2 + 2 * np.cos(u), 0 * u, 2 * np.sin(u)])
    assert np.max(D.residual(meridian)) <= 1e-12


def test_canal_with_an_imaginary_circle_passes_through_two_points():
    D = canal_cyclide(conic_circle([0, 0, 0], 2.0), planar_circle([0, 0, 0], -1.0))
    assert D.residual([0.0, 0.0, 1.0]) <= 1e-12 and D.residual([0.0, 0.0, -1.0]) <= 1e-12
    assert any(F.is_single for F in families_of(D))


def test_canal_from_ellipse_and_real_circle():
    D = canal_cyclide(conic_ellipse([0, 0, 0], 3.0, 2.0), planar_circle([0, 0, 0], 1.0))
    singles = [F for F in families_of(D) if F.is_single]
    assert 1 <= len(singles) <= 2
    pts = surface_points(D)
    assert np.max(D.residual(pts)) <= 1e-9


def test_canal_errors():
    b = planar_circle([0, 0, 0], 1.0)
    flat = Conic(np.zeros(3), np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.diag([1.0, 0.0, -1.0]))
    with pytest.raises(DesignError, match="degenerate"):
        canal_cyclide(flat, b)
    with pytest.raises(DesignError, match="plane of g"):
        canal_cyclide(conic_circle([0, 0, 0], 2.0), planar_circle([0, 0, 1.0], 1.0))


def test_no_warning_for_clean_input():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cyclide_from_three_circles(DesignInputThreeCircles(Z0, *half_circles()))
