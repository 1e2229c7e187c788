"""Shared fixtures: the standard fan/polytope corpus used across tests."""

from fractions import Fraction
from itertools import combinations

import pytest

from toriq.fans import Fan
from toriq.polytopes import FacetPresentation


def pn_fan(n: int) -> Fan:
    """Fan of n-dimensional projective space."""
    rays = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    rays.append((-1,) * n)
    return Fan(n, tuple(rays), tuple(combinations(range(n + 1), n)))


def p1p1_fan() -> Fan:
    return Fan(2, ((1, 0), (0, 1), (-1, 0), (0, -1)), ((0, 1), (1, 2), (2, 3), (0, 3)))


def hirzebruch_fan(a: int) -> Fan:
    return Fan(2, ((1, 0), (0, 1), (-1, a), (0, -1)), ((0, 1), (1, 2), (2, 3), (0, 3)))


def blowup_p1p1_fan() -> Fan:
    """The quadric surface blown up in one invariant point; the fifth ray is
    the exceptional one."""
    return Fan(
        2,
        ((1, 0), (0, 1), (-1, 0), (0, -1), (-1, -1)),
        ((0, 1), (1, 2), (2, 4), (3, 4), (0, 3)),
    )


def singular_mfs_fan() -> Fan:
    """Rank-3 simplicial non-smooth fan of a Picard-rank-2 fiber space over
    the projective line (rays 0,1 are the sections; 2,3,4 span the fiber)."""
    return Fan(
        3,
        ((1, 0, 0), (-1, 0, 1), (0, 0, -1), (0, 1, 2), (0, -1, 0)),
        ((0, 3, 4), (0, 2, 4), (0, 2, 3), (1, 3, 4), (1, 2, 4), (1, 2, 3)),
    )


def hexagon() -> FacetPresentation:
    normals = ((-1, -1), (0, -1), (1, 0), (1, 1), (0, 1), (-1, 0))
    return FacetPresentation(2, normals, (1,) * 6, irredundant=True)


def unit_square() -> FacetPresentation:
    return FacetPresentation(
        2, ((1, 0), (0, 1), (-1, 0), (0, -1)), (0, 0, 1, 1), irredundant=True
    )


def simplex_polytope(n: int, a) -> FacetPresentation:
    normals = tuple(tuple(1 if j == i else 0 for j in range(n)) for i in range(n))
    normals += ((-1,) * n,)
    return FacetPresentation(n, normals, (0,) * n + (a,), irredundant=True)


BLOWUP_RAYS = ((1, 0), (0, 1), (-1, 0), (0, -1), (-1, -1))


def blowup_polytope(constants) -> FacetPresentation:
    return FacetPresentation(2, BLOWUP_RAYS, tuple(constants), irredundant=True)


@pytest.fixture(scope="session")
def p2():
    return pn_fan(2)


@pytest.fixture(scope="session")
def p3():
    return pn_fan(3)


@pytest.fixture(scope="session")
def p4():
    return pn_fan(4)


@pytest.fixture(scope="session")
def p1p1():
    return p1p1_fan()


@pytest.fixture(scope="session")
def bl_p1p1():
    return blowup_p1p1_fan()


@pytest.fixture(scope="session")
def singular_fan():
    return singular_mfs_fan()


@pytest.fixture(scope="session")
def corpus_fans(p2, p3, p4, p1p1, bl_p1p1, singular_fan):
    return [p2, p3, p1p1, hirzebruch_fan(1), bl_p1p1, singular_fan]


@pytest.fixture(scope="session")
def corpus_polytopes():
    return [
        simplex_polytope(2, 2),
        simplex_polytope(3, 5),
        unit_square(),
        hexagon(),
        blowup_polytope((2, 1, 2, 1, Fraction(5, 2))),
        blowup_polytope((6, 5, 6, 5, 2)),
        blowup_polytope((2, 5, 5, 1, Fraction(1, 2))),
    ]
