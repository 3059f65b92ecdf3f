import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from darboux.cyclide import Pencil, classify, from_pencil, six_family_pencil, torus
from darboux.families import extract_families, families_of
from darboux.moebius import MSphere, inversion_matrix

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_pencil(rng: np.random.Generator) -> Pencil:
    A = rng.normal(size=(5, 5))
    return Pencil(A + A.T)


def random_irreducible_pencils(n: int, seed: int = 0) -> list[Pencil]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        P = random_pencil(rng)
        if classify(from_pencil(P)) == "irreducible":
            out.append(P)
    return out


def random_diagonalizable_pencil(rng: np.random.Generator) -> Pencil:
    """A six-family pencil with random eigenvalues, moved by two random inversions."""
    a = np.sort(rng.uniform(-3, 3, 4))
    P = Pencil(np.diag([*a, -rng.uniform(a[1], a[2])]))
    for _ in range(2):
        S = MSphere.from_center(rng.normal(size=3), rng.uniform(1.0, 3.0))
        P = P.transformed(inversion_matrix(S))
    return P


@pytest.fixture(scope="session")
def six_pencil():
    return six_family_pencil()


@pytest.fixture(scope="session")
def six_cyclide(six_pencil):
    return from_pencil(six_pencil)


@pytest.fixture(scope="session")
def six_families(six_pencil):
    return extract_families(six_pencil)


@pytest.fixture(scope="session")
def ring_torus():
    return torus(2.0, 1.0)


@pytest.fixture(scope="session")
def torus_families(ring_torus):
    return families_of(ring_torus)
