"""Rational polytopes in facet presentation.

A polytope is stored as P = {x : <v_i, x> >= -a_i} with primitive integer
inward normals v_i and rational constants a_i.  Vertex enumeration, normal
fans, adjoint families P^(s), nef/effective thresholds, the core and its
quotient projection, and Cayley sums over an arbitrary basis (with their
detection) are all computed in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

from . import fans
from .fans import Fan, wall_classification, walls
from .linalg import (
    QVec,
    Vec,
    affine_rank,
    det,
    dot,
    frac,
    hull_facets,
    integer_kernel_basis,
    invert,
    is_primitive,
    lp_min,
    matrix_rank,
    nonneg_solve,
    quotient_projection,
    saturated_basis,
    scale_to_primitive,
    smith_normal_form,
    solve_linear,
    vec_sub,
)

ZERO = Fraction(0)


class EmptyPolytopeError(ValueError):
    pass


class UnboundedError(ValueError):
    pass


class DegenerateError(ValueError):
    """The polytope is not full-dimensional."""


class RedundantPresentationError(ValueError):
    """The operation needs an irredundant facet presentation."""


@dataclass(frozen=True)
class FacetPresentation:
    """P = {x : <normals[i], x> >= -constants[i]}."""

    dim: int
    normals: tuple[Vec, ...]
    constants: tuple[Fraction, ...]
    irredundant: bool = False

    def __post_init__(self):
        normals = tuple(tuple(int(x) for x in v) for v in self.normals)
        constants = tuple(frac(a) for a in self.constants)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "constants", constants)
        if len(normals) != len(constants):
            raise ValueError("normals and constants differ in length")
        seen = set()
        for v in normals:
            if len(v) != self.dim:
                raise ValueError(f"normal {v} does not have length {self.dim}")
            if not is_primitive(v):
                raise ValueError(f"normal {v} is not primitive")
            if v in seen:
                raise ValueError(f"duplicate normal {v}")
            seen.add(v)

    @property
    def nfacets(self) -> int:
        return len(self.normals)

    def contains(self, x) -> bool:
        return all(dot(v, x) >= -a for v, a in zip(self.normals, self.constants))


@dataclass(frozen=True)
class VertexSet:
    vertices: tuple[QVec, ...]
    tight: tuple[tuple[int, ...], ...]   # per vertex, all facet indices met with equality


@dataclass(frozen=True)
class Thresholds:
    nef: Fraction
    effective: Fraction


@dataclass(frozen=True)
class CoreProjection:
    core: FacetPresentation
    core_vertices: tuple[QVec, ...]
    kernel_basis: tuple[Vec, ...]      # integer basis of K(P) cap Z^n
    projection: tuple[Vec, ...]        # rows of Z^n -> Z^(n-k)
    Q: FacetPresentation


@dataclass(frozen=True)
class CayleyMoriDecomposition:
    bases: tuple[FacetPresentation, ...]
    w: tuple[QVec, ...]                # w_1..w_k relative to w_0 = 0
    fiber_projection: tuple[Vec, ...]  # rows of M -> Z^k restricting to the fiber lattice
    base_faces: tuple[tuple[QVec, ...], ...]
    simplex_vertices: tuple[QVec, ...]


def is_bounded(P: FacetPresentation) -> bool:
    # bounded iff the normals positively span R^n
    for k in range(P.dim):
        for sign in (1, -1):
            e = tuple(sign if j == k else 0 for j in range(P.dim))
            if nonneg_solve(P.normals, e) is None:
                return False
    return True


def is_empty(P: FacetPresentation) -> bool:
    if P.dim == 0:
        return False
    res = lp_min([0] * P.dim, P.normals, P.constants)
    return res.status == "infeasible"


@lru_cache(maxsize=None)
def vertices(P: FacetPresentation, allow_lower_dim: bool = False) -> VertexSet:
    """Exact vertex enumeration over all invertible n-subsets of facets."""
    if is_empty(P):
        raise EmptyPolytopeError("polytope is empty")
    n = P.dim
    if n == 0:
        return VertexSet(((),), ((),))
    if not is_bounded(P):
        raise UnboundedError("presentation is unbounded")
    found: dict[QVec, None] = {}
    for subset in combinations(range(P.nfacets), n):
        mat = [P.normals[i] for i in subset]
        rhs = [-P.constants[i] for i in subset]
        if matrix_rank(mat) != n:
            continue
        x = solve_linear(mat, rhs)
        if x is None:
            continue
        if P.contains(x):
            found.setdefault(x)
    verts = tuple(sorted(found))
    if not verts:
        raise EmptyPolytopeError("no vertices found")
    if not allow_lower_dim and affine_rank(verts) != n:
        raise DegenerateError("polytope is not full-dimensional")
    tight = tuple(
        tuple(i for i in range(P.nfacets) if dot(P.normals[i], x) == -P.constants[i])
        for x in verts
    )
    return VertexSet(verts, tight)


def is_simple(P: FacetPresentation) -> bool:
    vs = vertices(P)
    return all(len(t) == P.dim for t in vs.tight)


def normal_fan(P: FacetPresentation) -> Fan:
    """Normal fan of a full-dimensional irredundant presentation; the fan's
    rays are exactly the facet normals in presentation order."""
    if not P.irredundant:
        raise RedundantPresentationError("normal fan needs an irredundant presentation")
    vs = vertices(P)
    cones = tuple(t for t in vs.tight)
    used = set()
    for c in cones:
        used.update(c)
    if used != set(range(P.nfacets)):
        raise RedundantPresentationError("an inequality is tight at no vertex")
    return Fan(P.dim, P.normals, cones)


def polytope_of_divisor(fan: Fan, coeffs: Sequence) -> FacetPresentation:
    """P_D for a torus divisor with the given ray coefficients."""
    cs = tuple(frac(a) for a in coeffs)
    if len(cs) != len(fan.rays):
        raise ValueError("coefficient count differs from ray count")
    return FacetPresentation(fan.rank, fan.rays, cs, irredundant=False)


def adjoint(P: FacetPresentation, s, allow_redundant: bool = False) -> FacetPresentation:
    """P^(s): move every facet inward by lattice distance s.

    Refuses redundant presentations unless explicitly overridden, since the
    result genuinely depends on the inequality list.  The irredundance flag
    of the result is recomputed (facets can die as s grows).
    """
    s = frac(s)
    if s < 0:
        raise ValueError("adjoint parameter must be >= 0")
    if not P.irredundant and not allow_redundant:
        raise RedundantPresentationError(
            "adjoint of a redundant presentation is presentation-dependent; "
            "pass allow_redundant=True to override"
        )
    shifted = FacetPresentation(P.dim, P.normals, tuple(a - s for a in P.constants))
    if is_empty(shifted):
        return shifted
    try:
        _, removed = remove_redundant(shifted)
        flag = not removed
    except DegenerateError:
        flag = False
    return FacetPresentation(P.dim, P.normals, shifted.constants, irredundant=flag)


def remove_redundant(P: FacetPresentation) -> tuple[FacetPresentation, tuple[int, ...]]:
    """Minimal sub-presentation; removed inequalities are certified by exact
    LP to be implied by the rest."""
    if is_empty(P):
        raise EmptyPolytopeError("cannot reduce an empty polytope")
    keep = list(range(P.nfacets))
    removed = []
    for i in range(P.nfacets):
        others = [j for j in keep if j != i]
        if not others:
            break
        res = lp_min(
            P.normals[i],
            [P.normals[j] for j in others],
            [P.constants[j] for j in others],
        )
        if res.status == "optimal" and res.value + P.constants[i] >= 0:
            keep.remove(i)
            removed.append(i)
    Q = FacetPresentation(
        P.dim,
        tuple(P.normals[i] for i in keep),
        tuple(P.constants[i] for i in keep),
        irredundant=True,
    )
    if affine_rank(vertices(Q, allow_lower_dim=True).vertices) != P.dim:
        raise DegenerateError("polytope is not full-dimensional")
    return Q, tuple(removed)


def effective_threshold(P: FacetPresentation) -> Fraction:
    """sup{s : P^(s) nonempty}, by exact LP over (x, s)."""
    n = P.dim
    normals = [tuple(v) + (-1,) for v in P.normals]
    res = lp_min([0] * n + [-1], normals, list(P.constants))
    if res.status == "infeasible":
        raise EmptyPolytopeError("polytope is empty")
    if res.status == "unbounded":
        raise UnboundedError("presentation is unbounded")
    sigma = -res.value
    if sigma < 0:
        raise EmptyPolytopeError("polytope is empty")
    return sigma


def nef_threshold_tracking(P: FacetPresentation) -> Fraction:
    """sup{s : P^(s) has the same normal fan as P}, by exact parametric
    vertex tracking.  Needs a simple, irredundant, full-dimensional P."""
    if not P.irredundant:
        raise RedundantPresentationError("nef threshold needs an irredundant presentation")
    vs = vertices(P)
    n = P.dim
    best: Optional[Fraction] = None
    for x, tight in zip(vs.vertices, vs.tight):
        if len(tight) != n:
            raise RedundantPresentationError("polytope is not simple")
        mat = [P.normals[i] for i in tight]
        d = solve_linear(mat, [1] * n)
        assert d is not None
        for j in range(P.nfacets):
            if j in tight:
                continue
            slope = 1 - dot(P.normals[j], d)
            if slope <= 0:
                continue
            g0 = dot(P.normals[j], x) + P.constants[j]
            cand = g0 / slope
            if best is None or cand < best:
                best = cand
    if best is None:
        return effective_threshold(P)
    return best


def thresholds(P: FacetPresentation) -> Thresholds:
    return Thresholds(nef=nef_threshold_tracking(P), effective=effective_threshold(P))


def core_and_projection(P: FacetPresentation) -> CoreProjection:
    """The core P^(sigma(P)) (possibly lower-dimensional), the lattice
    projection along its affine span, and the image polytope Q."""
    sigma = effective_threshold(P)
    core = FacetPresentation(P.dim, P.normals, tuple(a - sigma for a in P.constants))
    cvs = vertices(core, allow_lower_dim=True)
    base = cvs.vertices[0]
    kern_cols = []
    for v in cvs.vertices[1:]:
        dvec = vec_sub(v, base)
        if any(x != 0 for x in dvec):
            kern_cols.append(scale_to_primitive(dvec))
    if kern_cols:
        proj = quotient_projection(kern_cols, P.dim)
        kbasis = saturated_basis(kern_cols)
    else:
        proj = [tuple(1 if j == i else 0 for j in range(P.dim)) for i in range(P.dim)]
        kbasis = []
    pvs = vertices(P)
    imgs = sorted({tuple(dot(row, v) for row in proj) for v in pvs.vertices})
    Q = facet_presentation_from_vertices(imgs)
    return CoreProjection(core, cvs.vertices, tuple(kbasis), tuple(proj), Q)


def facet_presentation_from_vertices(points: Sequence[QVec]) -> FacetPresentation:
    """Irredundant facet presentation of conv(points) (full-dimensional)."""
    pts = [tuple(frac(a) for a in p) for p in points]
    d = len(pts[0]) if pts else 0
    if d == 0:
        return FacetPresentation(0, (), (), irredundant=True)
    facets = hull_facets(pts)
    return FacetPresentation(
        d,
        tuple(v for v, _ in facets),
        tuple(a for _, a in facets),
        irredundant=True,
    )


# ---------------------------------------------------------------------------
# Cayley sums over an arbitrary basis
# ---------------------------------------------------------------------------

def strictly_equivalent(P1: FacetPresentation, P2: FacetPresentation) -> bool:
    """Strict combinatorial equivalence: identical normal fans."""
    try:
        return normal_fan(P1) == normal_fan(P2)
    except (RedundantPresentationError, DegenerateError, EmptyPolytopeError):
        return False


def cayley_mori_build(bases: Sequence[FacetPresentation], w: Sequence[Vec]) -> FacetPresentation:
    """Facet presentation of conv(P_0 x 0, P_1 x w_1, ..., P_k x w_k).

    The bases must be strictly combinatorially equivalent presentations in
    a common R^n (same normals in the same order); w_1..w_k must be
    linearly independent integer vectors in R^k.  The inequality system of
    the standard Cayley sum is transported through the linear map sending
    e_i to w_i and every normal is rescaled to a primitive vector.
    """
    k = len(bases) - 1
    if k < 1:
        raise ValueError("need at least two base polytopes")
    P0 = bases[0]
    for Pi in bases[1:]:
        if Pi.normals != P0.normals:
            raise ValueError("base polytopes must share one normal list")
        if not strictly_equivalent(P0, Pi):
            raise ValueError("base polytopes are not strictly combinatorially equivalent")
    W = [tuple(int(x) for x in wi) for wi in w]
    if len(W) != k or any(len(wi) != k for wi in W):
        raise ValueError(f"need {k} direction vectors of length {k}")
    Wmat = [[W[j][i] for j in range(k)] for i in range(k)]  # columns w_j
    if det(Wmat) == 0:
        raise ValueError("direction vectors are linearly dependent")
    n = P0.dim
    WT_inv = invert([list(row) for row in zip(*Wmat)])  # (W^T)^(-1)
    normals: list[Vec] = []
    constants: list[Fraction] = []

    def add(raw: tuple[Fraction, ...], const: Fraction):
        prim = scale_to_primitive(raw)
        idx = next(i for i, x in enumerate(raw) if x != 0)
        scale = Fraction(prim[idx]) / raw[idx]
        normals.append(prim)
        constants.append(const * scale)

    for j, vj in enumerate(P0.normals):
        tail = [bases[i].constants[j] - P0.constants[j] for i in range(1, k + 1)]
        mapped = [sum(WT_inv[r][c] * tail[c] for c in range(k)) for r in range(k)]
        add(tuple(Fraction(x) for x in vj) + tuple(mapped), P0.constants[j])
    e0 = [Fraction(-1)] * k
    add((ZERO,) * n + tuple(sum(WT_inv[r][c] * e0[c] for c in range(k)) for r in range(k)),
        Fraction(1))
    for i in range(k):
        ei = [Fraction(1) if c == i else ZERO for c in range(k)]
        add((ZERO,) * n + tuple(sum(WT_inv[r][c] * ei[c] for c in range(k)) for r in range(k)),
            ZERO)
    built = FacetPresentation(n + k, tuple(normals), tuple(constants))
    _, removed = remove_redundant(built)
    if removed:
        raise ValueError("Cayley construction produced a redundant inequality; degenerate bases?")
    return FacetPresentation(n + k, built.normals, built.constants, irredundant=True)


def cayley_mori_detect(P: FacetPresentation) -> Optional[CayleyMoriDecomposition]:
    """Detect a Cayley sum structure on P by searching its normal fan for a
    fibering-type wall.

    On success the base polytopes are returned in coordinates on the kernel
    of the fiber projection, together with the simplex directions w and the
    projection itself.  Returns None when no fibering contraction exists or
    the candidate section faces fail strict combinatorial equivalence.
    """
    from . import mmp

    fan = normal_fan(P)
    pvs = vertices(P)
    tried = set()
    for wall in walls(fan):
        alpha, _ = wall_classification(fan, wall)
        if alpha != 0:
            continue
        key = fans.wall_class_key(wall)
        if key in tried:
            continue
        tried.add(key)
        try:
            data = mmp.mori_fiber_data(fan, wall)
        except (fans.MalformedFanError, fans.ReconstructionError, ValueError):
            continue
        if not data.split or not data.fiber_rho_one:
            continue
        dec = _decompose_along_fiber(P, pvs, data)
        if dec is not None:
            return dec
    return None


def _decompose_along_fiber(P, pvs, data) -> Optional[CayleyMoriDecomposition]:
    k = data.fiber_fan.rank
    pi_rows = [tuple(b) for b in data.fiber_basis]
    simplex_pts = sorted({tuple(dot(row, v) for row in pi_rows) for v in pvs.vertices})
    if len(simplex_pts) != k + 1:
        return None
    # one invariant-section face of P per maximal fiber-fan cone
    base_faces = []
    ws = []
    for fcone in data.fiber_fan.max_cones:
        facet_idx = [data.fiber_ray_origin[i] for i in fcone]
        face_verts = [
            v for v, t in zip(pvs.vertices, pvs.tight) if set(facet_idx) <= set(t)
        ]
        if not face_verts:
            return None
        imgs = {tuple(dot(row, v) for row in pi_rows) for v in face_verts}
        if len(imgs) != 1:
            return None
        ws.append(next(iter(imgs)))
        base_faces.append(tuple(sorted(face_verts)))
    if sorted(ws) != simplex_pts:
        return None
    order = sorted(range(len(ws)), key=lambda i: ws[i])
    ws = [ws[i] for i in order]
    base_faces = [base_faces[i] for i in order]
    # coordinates on ker(pi) via its saturated integer basis
    kern = integer_kernel_basis([tuple(r) for r in pi_rows])
    mat = [[kern[c][r] for c in range(len(kern))] for r in range(P.dim)]
    bases = []
    for face in base_faces:
        origin = face[0]
        coords = []
        for v in face:
            sol = solve_linear(mat, vec_sub(v, origin))
            if sol is None:
                return None
            coords.append(sol)
        try:
            bases.append(facet_presentation_from_vertices(coords))
        except ValueError:
            return None
    first_fan = None
    for b in bases:
        try:
            f = normal_fan(b)
        except (DegenerateError, RedundantPresentationError, EmptyPolytopeError):
            return None
        if first_fan is None:
            first_fan = f
        elif f != first_fan:
            return None
    w0 = ws[0]
    wrel = [vec_sub(wi, w0) for wi in ws[1:]]
    return CayleyMoriDecomposition(
        bases=tuple(bases),
        w=tuple(wrel),
        fiber_projection=tuple(pi_rows),
        base_faces=tuple(base_faces),
        simplex_vertices=tuple(tuple(x) for x in ws),
    )


def is_cayley_s(P: FacetPresentation, dec: Optional[CayleyMoriDecomposition] = None) -> Optional[int]:
    """The positive integer s such that the simplex image of P equals
    conv(0, s*e_1, ..., s*e_k) in some lattice basis, certified via the
    Smith normal form of the direction matrix; None otherwise."""
    if dec is None:
        dec = cayley_mori_detect(P)
    if dec is None:
        return None
    k = len(dec.w)
    cols = []
    for wi in dec.w:
        col = []
        for x in wi:
            q = frac(x)
            if q.denominator != 1:
                return None
            col.append(int(q))
        cols.append(col)
    mat = [[cols[j][i] for j in range(k)] for i in range(k)]
    _, D, _ = smith_normal_form(mat)
    diag = [D[i][i] for i in range(k)]
    s = diag[0]
    if s > 0 and all(d == s for d in diag):
        return s
    return None
