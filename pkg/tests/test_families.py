import numpy as np
import pytest
from conftest import random_diagonalizable_pencil, random_irreducible_pencils
from hypothesis import given
from hypothesis import strategies as st

from darboux.cyclide import Cyclide, Pencil, from_pencil, quadric, to_pencil
from darboux.design import canal_cyclide, conic_circle, orthogonality_defect, planar_circle
from darboux.families import (
    FamilyError,
    canal_geometry,
    circle_at,
    circle_through_point,
    extract_families,
    families_of,
    family_axis_geometry,
    family_summary,
    intersect_circles,
)
from darboux.moebius import MSphere, inversion_matrix, normalize, stereo_lift

angles = st.floats(-np.pi / 2 + 1e-3, np.pi / 2 - 1e-3)


def inverted_hyperboloid() -> Cyclide:
    P = to_pencil(quadric(np.diag([1.0, 0.25, -1.0, -1.0])))
    return from_pencil(P.transformed(inversion_matrix(MSphere.from_center([0.3, 0.5, 2.0], 4.0))))


def circle_residual(D, c, n=32) -> float:
    return float(np.max(D.residual(c.sample(n))))


def test_six_family_extraction(six_families):
    assert len(six_families) == 6
    ts = sorted({round(f.cone.t, 12) for f in six_families})
    assert np.allclose(ts, [-1.0, 0.0, 1.0])
    assert all(f.kind == "paired" for f in six_families)
    for f in six_families:
        assert six_families[f.partner].partner == f.id
        assert tuple(f.cone.inertia) == (2, 2, 1)


def test_torus_families(torus_families, ring_torus):
    kinds = sorted(f.kind for f in torus_families)
    assert kinds == ["paired", "paired", "single", "single"]
    for F in torus_families:
        for s in (-2.0, 0.0, 0.5, 3.0):
            assert circle_residual(ring_torus, circle_at(F, s)) < 1e-12


def test_rotational_ellipsoid_has_one_single_family():
    fams = families_of(quadric(np.diag([1.0, 1.0, 0.25, -1.0])))
    assert [f.kind for f in fams] == ["single"]


def test_trivial_and_reducible_inputs_are_rejected():
    with pytest.raises(FamilyError):
        families_of(Cyclide(0.0, np.zeros(3), np.eye(3), np.zeros(3), -1.0))
    with pytest.raises(FamilyError):
        families_of(Cyclide(1.0, np.zeros(3), -5 * np.eye(3), np.zeros(3), 4.0))


def test_six_family_circle_lies_on_the_quartic(six_families, six_cyclide):
    F = next(f for f in six_families if abs(f.cone.t) < 1e-12)
    assert circle_residual(six_cyclide, circle_at(F, 0.0), 64) <= 1e-8


@given(angles, st.integers(0, 5))
def test_every_circle_of_every_family_lies_on_the_cyclide(phi, i):
    P = Pencil(np.diag([-2.0, -1.0, 1.0, 2.0, 0.0]))
    F = extract_families(P)[i]
    assert circle_residual(from_pencil(P), circle_at(F, np.tan(phi))) < 1e-10


def test_torus_single_families_are_meridians_and_parallels(torus_families):
    mer = next(f for f in torus_families if f.is_single and f.cone.t > 0)
    for s in (-1.0, 0.0, 0.3, 5.0):
        v = circle_at(mer, s).view
        assert v.kind == "circle" and np.isclose(v.radius, 1.0)
        assert np.isclose(np.linalg.norm(v.center[:2]), 2.0) and abs(v.center[2]) < 1e-12


def test_circle_through_point_inverts_circle_at(six_families, six_cyclide):
    F = six_families[2]
    c = circle_at(F, 0.7)
    for x in c.sample(5):
        s, c2 = circle_through_point(F, x)
        assert np.isclose(s, 0.7)
        assert all(c2.contains(normalize(stereo_lift(y)), 1e-8) for y in c.sample(8))


def test_torus_meridian_through_outer_equator(torus_families):
    mer = next(f for f in torus_families if f.is_single and f.cone.t > 0)
    _, c = circle_through_point(mer, [3.0, 0.0, 0.0])
    v = c.view
    assert np.allclose(np.abs(v.normal), [0, 1, 0])
    assert np.allclose(v.center, [2, 0, 0])


def test_circle_through_off_surface_point_fails(torus_families):
    with pytest.raises(FamilyError):
        circle_through_point(torus_families[0], [0.0, 0.0, 0.0])


def test_non_partner_circles_meet_once(six_families):
    F1, F2 = six_families[0], six_families[2]
    _, c1 = circle_through_point(F1, circle_at(F2, 0.4).sample(7)[3])
    pts = intersect_circles(c1, circle_at(F2, 0.4))
    assert len(pts) == 1


def test_villarceau_circles_of_opposite_families_meet_twice(torus_families):
    V1, V2 = [f for f in torus_families if f.kind == "paired"]
    x = circle_at(V1, 0.2).sample(9)[2]
    _, c2 = circle_through_point(V2, x)
    pts = intersect_circles(circle_at(V1, 0.2), c2)
    assert len(pts) == 2
    assert min(np.linalg.norm(p - x) for p in pts) < 1e-9


def test_parallel_circles_of_one_family_are_disjoint(torus_families, six_families):
    for F in (torus_families[0], torus_families[3], six_families[1]):
        assert intersect_circles(circle_at(F, 0.1), circle_at(F, 1.3)) == []


def test_axis_sphere_of_six_family_pair_is_imaginary(six_families):
    F1 = next(f for f in six_families if abs(f.cone.t) < 1e-12)
    ax = family_axis_geometry(F1, six_families[F1.partner])
    assert ax.B.kind() == "imaginary"


def test_inverted_hyperboloid_has_a_special_pair():
    D = inverted_hyperboloid()
    fams = families_of(D)
    special = [f for f in fams if f.kind == "special"]
    assert len(special) == 2
    ax = family_axis_geometry(special[0], special[1])
    assert ax.B.kind() == "null"


def test_paired_circles_are_orthogonal_to_their_sphere(torus_families, six_families):
    fams = torus_families + six_families
    for F in fams:
        if F.is_single:
            continue
        B = family_axis_geometry(F, [g for g in fams if g.pencil is F.pencil][F.partner]).B
        for s in (-3.0, -0.5, 0.0, 0.9, 4.0):
            assert orthogonality_defect(circle_at(F, s), B) < 1e-12


def test_torus_canal_geometry(torus_families):
    mer = next(f for f in torus_families if f.is_single and f.cone.t > 0)
    par = next(f for f in torus_families if f.is_single and f.cone.t < 0)
    g = canal_geometry(mer)
    assert not g.rotational
    core = g.g.sample(32)
    assert np.allclose(np.linalg.norm(core[:, :2], axis=1), 2.0)
    assert np.allclose(core[:, 2], 0.0, atol=1e-12)
    r = canal_geometry(par)
    assert r.rotational and r.g.is_line
    assert np.allclose(np.abs(r.g.line[1]), [0, 0, 1])


def test_cone_type_canal_cyclide_has_an_imaginary_circle():
    # spheres centered on a circle of radius 2 through (0, 0, +-1)
    D = canal_cyclide(conic_circle([0, 0, 0], 2.0), planar_circle([0, 0, 0], -1.0))
    for p in ([0, 0, 1.0], [0, 0, -1.0]):
        assert D.residual(p) < 1e-12
    singles = [f for f in families_of(D) if f.is_single]
    assert any(canal_geometry(f).b.view.kind == "imaginary" for f in singles)


def test_family_summary_fields(torus_families):
    s = family_summary(torus_families[1])
    assert set(s) == {"id", "t", "inertia", "class", "branch", "partner"}
    assert s["partner"] == 2


# -- random pencils --------------------------------------------------------------


@pytest.fixture(scope="module")
def random_pencils():
    return random_irreducible_pencils(100, seed=3)


def test_at_most_six_families(random_pencils):
    for P in random_pencils:
        assert len(extract_families(P)) <= 6


def test_extreme_eigenvalues_never_pair(random_pencils):
    for P in random_pencils:
        ts = [e.t for e in P.eigen()]
        for F in extract_families(P):
            if F.kind != "single":
                assert min(ts) < F.cone.t < max(ts)


def test_random_non_partner_circles_meet_in_one_point(random_pencils):
    rng = np.random.default_rng(9)
    done = 0
    for _ in range(500):
        P = random_diagonalizable_pencil(rng)
        fams = extract_families(P)
        D = from_pencil(P)
        pairs = [(a, b) for a in fams for b in fams if a.id < b.id and a.partner != b.id]
        if not pairs:
            continue
        a, b = pairs[rng.integers(len(pairs))]
        cb = circle_at(b, np.tan(rng.uniform(-1.5, 1.5)))
        if not cb.is_real():
            continue
        pts = cb.sample(16)
        pts = pts[np.linalg.norm(pts, axis=1) < 50]
        if len(pts) == 0:
            continue
        x = pts[rng.integers(len(pts))]
        try:
            _, ca = circle_through_point(a, x)
        except FamilyError:
            continue
        got = intersect_circles(ca, cb)
        assert len(got) == 1
        assert np.linalg.norm(got[0] - x) <= 1e-6 * (1 + np.linalg.norm(x))
        assert D.residual(got[0]) < 1e-8
        done += 1
        if done == 50:
            break
    assert done == 50
