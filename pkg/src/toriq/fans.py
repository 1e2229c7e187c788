"""Fans of strongly convex rational polyhedral cones.

A fan is stored combinatorially: the lattice rank, an ordered list of
primitive ray generators, and the maximal cones as sorted tuples of ray
indices.  Walls, primitive collections, star subdivisions and quotient
(star) fans are computed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional

from .linalg import (
    Vec,
    QVec,
    dot,
    hull_facets,
    is_primitive,
    lp_min,
    matrix_rank,
    nonneg_solve,
    primitive_part,
    quotient_projection,
    snf_diagonal,
    solve_linear,
)


class MalformedFanError(ValueError):
    """The given cones do not assemble into a fan."""


class UnsupportedFanError(ValueError):
    """The operation needs a property (e.g. simplicial) the fan lacks."""


class ReconstructionError(ValueError):
    """Ray/collection data did not reconstruct a valid fan."""


@dataclass(frozen=True)
class Fan:
    """A fan, given by its rank, primitive rays and maximal cones."""

    rank: int
    rays: tuple[Vec, ...]
    max_cones: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rays = tuple(tuple(int(x) for x in r) for r in self.rays)
        cones = tuple(sorted(tuple(sorted(set(c))) for c in self.max_cones))
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "max_cones", cones)
        for r in rays:
            if len(r) != self.rank:
                raise MalformedFanError(f"ray {r} does not have length {self.rank}")
            if not is_primitive(r):
                raise MalformedFanError(f"ray {r} is not primitive")
        if len(set(rays)) != len(rays):
            raise MalformedFanError("rays are not pairwise distinct")
        for c in cones:
            if c and (c[0] < 0 or c[-1] >= len(rays)):
                raise MalformedFanError(f"cone {c} has out-of-range ray indices")

    def ray_matrix(self, cone: tuple[int, ...]) -> list[Vec]:
        return [self.rays[i] for i in cone]

    def __repr__(self):
        return f"Fan(rank={self.rank}, rays={len(self.rays)}, max_cones={len(self.max_cones)})"


@dataclass(frozen=True)
class Wall:
    """An (n-1)-dimensional cone shared by exactly two maximal cones,
    together with the exact linear relation among the n+1 rays involved.

    The relation is a rational coefficient vector over *all* rays of the
    fan, supported on the wall rays and the two opposite rays, normalized
    so the higher-indexed opposite ray has coefficient 1; both opposite
    coefficients are positive.
    """

    wall_rays: tuple[int, ...]
    side_a: int
    side_b: int
    relation: QVec

    def opposite_rays(self, fan: Fan) -> tuple[int, int]:
        a = next(i for i in fan.max_cones[self.side_a] if i not in self.wall_rays)
        b = next(i for i in fan.max_cones[self.side_b] if i not in self.wall_rays)
        return a, b


@dataclass(frozen=True)
class PrimitiveCollection:
    """A minimal set of rays not contained in any cone, with the data of
    its relation: sum of members = sum of coefficients over sigma's rays."""

    members: tuple[int, ...]
    sigma: tuple[int, ...]
    coefficients: tuple[Fraction, ...]
    degree: Fraction


@dataclass
class ValidationReport:
    well_formed: bool
    simplicial: bool
    smooth: bool
    complete: bool
    problems: list[str] = field(default_factory=list)


def _cone_coords(fan: Fan, cone: tuple[int, ...], x) -> Optional[QVec]:
    """Coordinates of x in the simplicial cone's ray basis, or None."""
    if not cone:
        return () if all(a == 0 for a in x) else None
    cols = [[fan.rays[i][k] for i in cone] for k in range(fan.rank)]
    sol = solve_linear(cols, x)
    if sol is None:
        return None
    # verify (solve_linear handles underdetermined by zero-fill; recheck)
    for k in range(fan.rank):
        if sum(fan.rays[i][k] * c for i, c in zip(cone, sol)) != x[k]:
            return None
    return sol


def cone_contains(fan: Fan, cone: tuple[int, ...], x) -> bool:
    """Exact membership of x in the cone spanned by the given rays."""
    coords = _cone_coords(fan, cone, x)
    if coords is not None:
        return all(c >= 0 for c in coords)
    return False


def cone_contains_general(fan: Fan, cone: tuple[int, ...], x) -> bool:
    """Membership test that also works for non-simplicial cones."""
    if _is_simplicial_cone(fan, cone):
        return cone_contains(fan, cone, x)
    return nonneg_solve([fan.rays[i] for i in cone], x) is not None


def _is_simplicial_cone(fan: Fan, cone: tuple[int, ...]) -> bool:
    return matrix_rank([fan.rays[i] for i in cone]) == len(cone)


def faces_of_dim(fan: Fan, k: int) -> list[tuple[int, ...]]:
    """All k-dimensional cones of a simplicial fan (as ray index tuples)."""
    out = set()
    for cone in fan.max_cones:
        for sub in combinations(cone, k):
            out.add(sub)
    return sorted(out)


def is_face(fan: Fan, rays: tuple[int, ...]) -> bool:
    s = set(rays)
    return any(s.issubset(cone) for cone in fan.max_cones)


@lru_cache(maxsize=None)
def validate(fan: Fan, deep: bool = False) -> ValidationReport:
    """Validate a fan and report simplicial / smooth / complete flags.

    Overlap of maximal cones is probed with exact interior-point checks
    (each cone's ray sum must lie in no other maximal cone); ``deep=True``
    additionally runs the exact pairwise LP test that two cones intersect
    in their common face.  Completeness is certified by requiring every
    (n-1)-face to be shared by exactly two maximal cones plus exact
    membership sampling of the +-unit vectors and all ray directions.
    """
    problems: list[str] = []
    simplicial = True
    smooth = True
    for cone in fan.max_cones:
        rays = fan.ray_matrix(cone)
        if cone and matrix_rank(rays) != len(cone):
            simplicial = False
        if not cone:
            continue
        if simplicial and len(cone) == 0:
            continue
        diag = snf_diagonal([list(r) for r in rays]) if cone else []
        if any(d != 1 for d in diag[: len(cone)]):
            smooth = False
        if not _strongly_convex(fan, cone):
            problems.append(f"cone {cone} is not strongly convex")
    if not simplicial:
        smooth = False

    well_formed = not problems
    # interior-point overlap probe
    if simplicial:
        for i, cone in enumerate(fan.max_cones):
            if not cone:
                continue
            bary = tuple(sum(fan.rays[j][k] for j in cone) for k in range(fan.rank))
            for i2, other in enumerate(fan.max_cones):
                if i2 == i or set(cone) <= set(other):
                    continue
                if cone_contains(fan, other, bary):
                    raise MalformedFanError(
                        f"maximal cones {cone} and {other} overlap without meeting in a face"
                    )
        if deep:
            for c1, c2 in combinations(fan.max_cones, 2):
                if _pair_overlaps(fan, c1, c2):
                    raise MalformedFanError(
                        f"maximal cones {c1} and {c2} overlap without meeting in a face"
                    )

    complete = _certify_complete(fan, problems) if well_formed else False
    return ValidationReport(well_formed, simplicial, smooth, complete, problems)


def _strongly_convex(fan: Fan, cone: tuple[int, ...]) -> bool:
    rays = fan.ray_matrix(cone)
    if matrix_rank(rays) == len(cone):
        return True
    # exists c with <c, ray> >= 1 for all rays of the cone
    res = lp_min([0] * fan.rank, rays, [-1] * len(rays))
    return res.status == "optimal"


def _pair_overlaps(fan: Fan, c1: tuple[int, ...], c2: tuple[int, ...]) -> bool:
    common = sorted(set(c1) & set(c2))
    extra1 = [i for i in c1 if i not in common]
    if not extra1:
        return False
    # feasibility: x in both cones with some non-common coordinate in c1
    gens = []
    for i in c1:
        gens.append(tuple(fan.rays[i]) + ((1,) if i in extra1 else (0,)))
    for i in c2:
        gens.append(tuple(-x for x in fan.rays[i]) + (0,))
    target = (0,) * fan.rank + (1,)
    return nonneg_solve(gens, target) is not None


def _certify_complete(fan: Fan, problems: list[str]) -> bool:
    if fan.rank == 0:
        return bool(fan.max_cones)
    if not fan.max_cones:
        return False
    for cone in fan.max_cones:
        if len(cone) != fan.rank:
            return False
    counts: dict[tuple[int, ...], int] = {}
    for cone in fan.max_cones:
        for facet in combinations(cone, fan.rank - 1):
            counts[facet] = counts.get(facet, 0) + 1
    if any(c != 2 for c in counts.values()):
        return False
    samples = []
    for k in range(fan.rank):
        e = tuple(1 if j == k else 0 for j in range(fan.rank))
        samples.append(e)
        samples.append(tuple(-x for x in e))
    samples.extend(fan.rays)
    for x in samples:
        if not any(cone_contains(fan, cone, x) for cone in fan.max_cones):
            return False
    return True


@lru_cache(maxsize=None)
def walls(fan: Fan) -> tuple[Wall, ...]:
    """All walls of a simplicial fan with their exact relations."""
    rep = validate(fan)
    if not rep.simplicial:
        raise UnsupportedFanError("walls are only computed for simplicial fans")
    seen: dict[tuple[int, ...], list[int]] = {}
    for ci, cone in enumerate(fan.max_cones):
        for facet in combinations(cone, max(len(cone) - 1, 0)):
            seen.setdefault(facet, []).append(ci)
    out = []
    for facet, cones in sorted(seen.items()):
        if len(cones) != 2:
            continue
        a, b = cones
        op_a = next(i for i in fan.max_cones[a] if i not in facet)
        op_b = next(i for i in fan.max_cones[b] if i not in facet)
        hi = max(op_a, op_b)
        lo = min(op_a, op_b)
        cols = list(facet) + [lo]
        mat = [[fan.rays[i][k] for i in cols] for k in range(fan.rank)]
        rhs = [-x for x in fan.rays[hi]]
        sol = solve_linear(mat, rhs)
        if sol is None:
            raise MalformedFanError(f"no relation across wall {facet}")
        rel = [Fraction(0)] * len(fan.rays)
        for i, c in zip(cols, sol):
            rel[i] = c
        rel[hi] = Fraction(1)
        if rel[lo] <= 0:
            raise MalformedFanError(f"wall {facet} has a nonconvex crossing")
        assert all(
            sum(rel[i] * fan.rays[i][k] for i in range(len(fan.rays))) == 0
            for k in range(fan.rank)
        )
        out.append(Wall(facet, a, b, tuple(rel)))
    return tuple(out)


def wall_classification(fan: Fan, wall: Wall) -> tuple[int, int]:
    """Counts (alpha, beta) of negative / nonpositive wall-ray coefficients
    in the wall relation; these determine the contraction type."""
    alpha = sum(1 for i in wall.wall_rays if wall.relation[i] < 0)
    beta = sum(1 for i in wall.wall_rays if wall.relation[i] <= 0)
    return alpha, beta


def wall_class_key(wall: Wall) -> QVec:
    """Canonical form of the wall's curve class: the relation scaled so its
    positive entries sum to 1.  Two walls are numerically proportional
    exactly when their keys agree."""
    pos = sum(c for c in wall.relation if c > 0)
    return tuple(c / pos for c in wall.relation)


@lru_cache(maxsize=None)
def primitive_collections(fan: Fan) -> tuple[PrimitiveCollection, ...]:
    """Exhaustive list of primitive collections of a complete simplicial fan.

    Each collection carries the minimal cone containing the sum of its
    members, the positive coefficients of the relation, and the degree
    (member count minus coefficient sum).
    """
    rep = validate(fan)
    if not (rep.simplicial and rep.complete):
        raise UnsupportedFanError("primitive collections need a complete simplicial fan")
    faces = set()
    for cone in fan.max_cones:
        for k in range(len(cone) + 1):
            for sub in combinations(cone, k):
                faces.add(frozenset(sub))
    r = len(fan.rays)
    out = []
    for d in range(2, fan.rank + 2):
        for members in combinations(range(r), d):
            fs = frozenset(members)
            if fs in faces:
                continue
            if not all(frozenset(sub) in faces for sub in combinations(members, d - 1)):
                continue
            total = tuple(sum(fan.rays[i][k] for i in members) for k in range(fan.rank))
            sigma, coeffs = _minimal_cone_with_coords(fan, total)
            degree = Fraction(d) - sum(coeffs, Fraction(0))
            out.append(PrimitiveCollection(members, sigma, coeffs, degree))
    return tuple(out)


def _minimal_cone_with_coords(fan: Fan, x) -> tuple[tuple[int, ...], QVec]:
    if all(a == 0 for a in x):
        return (), ()
    for cone in fan.max_cones:
        coords = _cone_coords(fan, cone, x)
        if coords is not None and all(c >= 0 for c in coords):
            support = tuple(i for i, c in zip(cone, coords) if c > 0)
            cf = tuple(c for c in coords if c > 0)
            return support, cf
    raise MalformedFanError(f"{x} lies outside the fan support")


def minimal_cone_containing(fan: Fan, x) -> Optional[tuple[int, ...]]:
    try:
        sigma, _ = _minimal_cone_with_coords(fan, x)
        return sigma
    except MalformedFanError:
        return None


def fan_from_primitive_data(rays: list[Vec], collections: list[tuple[int, ...]]) -> Fan:
    """Rebuild a complete simplicial fan from its rays and the list of its
    primitive collections: maximal cones are the full-rank ray subsets
    containing no collection."""
    rays = [tuple(r) for r in rays]
    n = len(rays[0])
    colls = [frozenset(c) for c in collections]
    cones = []
    for sub in combinations(range(len(rays)), n):
        s = frozenset(sub)
        if any(c <= s for c in colls):
            continue
        if matrix_rank([rays[i] for i in sub]) != n:
            continue
        cones.append(sub)
    try:
        fan = Fan(n, tuple(rays), tuple(cones))
        rep = validate(fan)
    except MalformedFanError as exc:
        raise ReconstructionError(str(exc)) from exc
    if not (rep.well_formed and rep.simplicial and rep.complete):
        raise ReconstructionError(
            f"collection data yields an invalid fan (problems={rep.problems}, "
            f"simplicial={rep.simplicial}, complete={rep.complete})"
        )
    return fan


def face_fan(rays: list[Vec]) -> Fan:
    """The fan over the facets of conv(rays); the origin must be interior.

    This is the standard reconstruction for fans whose rays are the
    vertices of a reflexive-type polytope (all our classification rows).
    """
    pts = [tuple(Fraction(x) for x in r) for r in rays]
    facets = hull_facets(pts)
    cones = []
    for normal, a in facets:
        if -a >= 0:
            raise ReconstructionError("origin is not interior to conv(rays)")
        on = tuple(i for i, p in enumerate(pts) if dot(normal, p) == -a)
        cones.append(on)
    fan = Fan(len(rays[0]), tuple(tuple(r) for r in rays), tuple(cones))
    rep = validate(fan)
    if not (rep.well_formed and rep.complete):
        raise ReconstructionError("face fan failed validation")
    return fan


def star_subdivision(fan: Fan, v: Vec) -> Fan:
    """Star subdivision at a primitive lattice vector in the fan's support."""
    v = tuple(int(x) for x in v)
    if all(x == 0 for x in v):
        raise ValueError("cannot subdivide at the zero vector")
    if not is_primitive(v):
        raise ValueError(f"{v} is not primitive")
    if v in fan.rays:
        return fan
    rep = validate(fan)
    if not rep.simplicial:
        raise UnsupportedFanError("star subdivision implemented for simplicial fans")
    new_index = len(fan.rays)
    new_cones = []
    hit = False
    for cone in fan.max_cones:
        coords = _cone_coords(fan, cone, v)
        if coords is None or any(c < 0 for c in coords):
            new_cones.append(cone)
            continue
        hit = True
        for i, c in zip(cone, coords):
            if c > 0:
                new_cones.append(tuple(sorted(set(cone) - {i})) + (new_index,))
    if not hit:
        raise ValueError(f"{v} lies outside the fan support")
    return Fan(fan.rank, fan.rays + (v,), tuple(set(new_cones)))


def star_quotient(fan: Fan, sigma: tuple[int, ...]) -> tuple[Fan, list[Vec]]:
    """The fan of the invariant subvariety V(sigma) in the quotient lattice,
    together with the projection matrix (rows) realizing N -> N/N_sigma."""
    sigma = tuple(sorted(sigma))
    if not is_face(fan, sigma):
        raise ValueError(f"{sigma} is not a cone of the fan")
    proj = quotient_projection([fan.rays[i] for i in sigma], fan.rank)
    qrank = len(proj)
    ray_map: dict[Vec, int] = {}
    qrays: list[Vec] = []
    qcones = set()
    for cone in fan.max_cones:
        if not set(sigma) <= set(cone):
            continue
        idxs = []
        for i in cone:
            if i in sigma:
                continue
            img = tuple(dot(row, fan.rays[i]) for row in proj)
            img = primitive_part(img)
            if img not in ray_map:
                ray_map[img] = len(qrays)
                qrays.append(img)
            idxs.append(ray_map[img])
        qcones.add(tuple(sorted(idxs)))
    return Fan(qrank, tuple(qrays), tuple(sorted(qcones))), proj


def fans_equal_up_to_ray_order(f1: Fan, f2: Fan) -> bool:
    """Equality of fans after matching rays literally by their vectors."""
    if f1.rank != f2.rank or set(f1.rays) != set(f2.rays):
        return False
    perm = {i: f2.rays.index(r) for i, r in enumerate(f1.rays)}
    cones1 = {tuple(sorted(perm[i] for i in c)) for c in f1.max_cones}
    return cones1 == set(f2.max_cones)
