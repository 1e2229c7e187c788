"""The minimal model program with scaling, as exact fan and polytope surgery.

Extremal walls are selected by the vanishing of (L + lambda*K) on wall
curves; contractions are classified by the sign pattern of the wall
relation (fibering / divisorial / flipping) and applied as combinatorial
operations on the fan.  The run is cross-validated against the adjoint
polytope family P^(s).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import polytopes
from .fans import (
    Fan,
    MalformedFanError,
    Wall,
    validate,
    wall_class_key,
    wall_classification,
    walls,
)
from .intersection import (
    TorusDivisor,
    _nef_threshold_from,
    anticanonical,
    is_ample,
    wall_curve_number,
)
from .linalg import (
    Vec,
    dot,
    primitive_part,
    quotient_projection,
    saturated_basis,
    solve_linear,
)
from .polytopes import FacetPresentation

ZERO = Fraction(0)

DIVISORIAL = "divisorial"
FLIP = "flip"
MORI_FIBER = "mori-fiber-space"


class GeneralityError(RuntimeError):
    """Several distinct extremal classes vanish at one critical value."""

    def __init__(self, lam, wall_sets):
        self.critical_value = lam
        self.wall_sets = wall_sets
        super().__init__(
            f"non-general input: {len(wall_sets)} distinct extremal classes vanish at "
            f"lambda={lam} (walls {wall_sets}); rerun with force=True to tie-break"
        )


class StepBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class MoriFiberData:
    base_fan: Fan
    fiber_fan: Fan
    projection: tuple[Vec, ...]       # rows of N -> N/N0
    fiber_basis: tuple[Vec, ...]      # integer basis of the fiber sublattice N0
    fiber_ray_origin: tuple[int, ...] # fiber-fan ray index -> ambient ray index
    fiber_rho_one: bool
    split: bool


@dataclass(frozen=True)
class ContractionResult:
    kind: str
    fan: Optional[Fan] = None             # divisorial result
    dropped_ray: Optional[int] = None
    fiber_data: Optional[MoriFiberData] = None


@dataclass
class MMPStep:
    lam: Fraction
    kind: str
    wall_rays: tuple[int, ...]
    relation: tuple
    alpha: int
    beta: int
    fan_before: Fan
    fan_after: Fan
    lost_face_dim: int
    facet_count_before: Optional[int] = None
    facet_count_after: Optional[int] = None
    generality_flag: bool = False
    fiber_data: Optional[MoriFiberData] = None


@dataclass
class MMPTrace:
    initial_polytope: FacetPresentation
    steps: list[MMPStep]
    effective_threshold: Fraction
    core_projection: polytopes.CoreProjection
    generality_flag: bool
    validation: dict = field(default_factory=dict)

    @property
    def critical_values(self) -> tuple[Fraction, ...]:
        return tuple(s.lam for s in self.steps)

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(s.kind for s in self.steps)


def class_walls(fan: Fan, wall: Wall) -> list[Wall]:
    """All walls numerically proportional to the given wall's curve class."""
    key = wall_class_key(wall)
    return [w for w in walls(fan) if wall_class_key(w) == key]


def contract(fan: Fan, wall: Wall) -> ContractionResult:
    """Contract the extremal class generated by the wall curve.

    alpha = 0 gives the fibering data (quotient base fan and fiber fan);
    alpha = 1 drops the exceptional ray and rebuilds the maximal cones;
    alpha >= 2 is a flip signal (the image fan is not simplicial), use
    flip() for the birational modification instead.
    """
    alpha, _ = wall_classification(fan, wall)
    if alpha == 0:
        return ContractionResult(MORI_FIBER, fiber_data=mori_fiber_data(fan, wall))
    if alpha >= 2:
        return ContractionResult(FLIP)
    rel_walls = class_walls(fan, wall)
    exceptional = {
        next(i for i in w.wall_rays if w.relation[i] < 0) for w in rel_walls
    }
    if len(exceptional) != 1:
        raise MalformedFanError(f"ambiguous exceptional ray among {exceptional}")
    exc = exceptional.pop()
    wall_sets = {w.wall_rays for w in rel_walls}
    new_cones = []
    for cone in fan.max_cones:
        if any(set(ws) <= set(cone) for ws in wall_sets):
            continue
        new_cones.append(cone)
    for w in rel_walls:
        circuit = set(w.wall_rays) | set(w.opposite_rays(fan))
        circuit.discard(exc)
        new_cones.append(tuple(sorted(circuit)))
    old_to_new = {}
    new_rays = []
    for i, r in enumerate(fan.rays):
        if i == exc:
            continue
        old_to_new[i] = len(new_rays)
        new_rays.append(r)
    remapped = {tuple(sorted(old_to_new[i] for i in cone)) for cone in new_cones}
    result = Fan(fan.rank, tuple(new_rays), tuple(sorted(remapped)))
    rep = validate(result)
    if not (rep.well_formed and rep.simplicial and rep.complete):
        raise MalformedFanError("divisorial contraction produced an invalid fan")
    return ContractionResult(DIVISORIAL, fan=result, dropped_ray=exc)


def flip(fan: Fan, wall: Wall) -> Fan:
    """Replace the triangulation over each wall circuit of the class by the
    opposite one; the ray set is unchanged (isomorphism in codimension 1)."""
    alpha, _ = wall_classification(fan, wall)
    if alpha < 2:
        raise ValueError("flips need a wall of flipping type (alpha >= 2)")
    rel_walls = class_walls(fan, wall)
    circuits: dict[frozenset, Wall] = {}
    for w in rel_walls:
        circ = frozenset(w.wall_rays) | frozenset(w.opposite_rays(fan))
        circuits.setdefault(circ, w)
    cones = set(fan.max_cones)
    for circ, w in circuits.items():
        pos = [i for i in sorted(circ) if w.relation[i] > 0]
        neg = [i for i in sorted(circ) if w.relation[i] < 0]
        for j in pos:
            c = tuple(sorted(circ - {j}))
            if c not in cones:
                raise MalformedFanError(f"expected cone {c} missing while flipping")
            cones.remove(c)
        for j in neg:
            cones.add(tuple(sorted(circ - {j})))
    was_complete = validate(fan).complete
    result = Fan(fan.rank, fan.rays, tuple(sorted(cones)))
    rep = validate(result)
    if not (rep.well_formed and rep.simplicial and (rep.complete or not was_complete)):
        raise MalformedFanError("flip produced an invalid fan")
    return result


def mori_fiber_data(fan: Fan, wall: Wall) -> MoriFiberData:
    """Quotient base fan, fiber fan and the projection for a fibering wall."""
    alpha, _ = wall_classification(fan, wall)
    if alpha != 0:
        raise ValueError("fibering data needs a wall with alpha = 0")
    support = [i for i, c in enumerate(wall.relation) if c > 0]
    proj = quotient_projection([fan.rays[i] for i in support], fan.rank)
    basis = saturated_basis([fan.rays[i] for i in support])
    # fiber fan: cones of the fan lying inside the kernel sublattice
    in_kernel = [
        i for i in range(len(fan.rays))
        if all(dot(row, fan.rays[i]) == 0 for row in proj)
    ]
    bmat = [[b[r] for b in basis] for r in range(fan.rank)]
    fiber_rays = []
    fiber_origin = []
    for i in in_kernel:
        coords = solve_linear(bmat, fan.rays[i])
        assert coords is not None
        fiber_rays.append(tuple(int(x) for x in coords))
        fiber_origin.append(i)
    kernel_set = set(in_kernel)
    fiber_cones = set()
    for cone in fan.max_cones:
        inside = tuple(sorted(in_kernel.index(i) for i in cone if i in kernel_set))
        fiber_cones.add(inside)
    maximal = [
        c for c in fiber_cones
        if not any(set(c) < set(other) for other in fiber_cones)
    ]
    fiber_fan = Fan(len(basis), tuple(fiber_rays), tuple(sorted(maximal)))
    # base fan: images of the maximal cones
    ray_map: dict[Vec, int] = {}
    base_rays: list[Vec] = []
    base_cones = set()
    for cone in fan.max_cones:
        idxs = set()
        for i in cone:
            img = tuple(dot(row, fan.rays[i]) for row in proj)
            if all(x == 0 for x in img):
                continue
            img = primitive_part(img)
            if img not in ray_map:
                ray_map[img] = len(base_rays)
                base_rays.append(img)
            idxs.add(ray_map[img])
        base_cones.add(tuple(sorted(idxs)))
    base_fan = Fan(len(proj), tuple(base_rays), tuple(sorted(base_cones)))
    base_rep = validate(base_fan)
    fiber_rep = validate(fiber_fan)
    ok = (
        base_rep.well_formed and base_rep.simplicial and base_rep.complete
        and fiber_rep.well_formed and fiber_rep.simplicial and fiber_rep.complete
    )
    if not ok:
        raise MalformedFanError("wall does not induce a fibration")
    rho_one = len(fiber_rays) == fiber_fan.rank + 1
    split = weakly_split(fan, proj, base_fan)
    return MoriFiberData(
        base_fan=base_fan,
        fiber_fan=fiber_fan,
        projection=tuple(proj),
        fiber_basis=tuple(basis),
        fiber_ray_origin=tuple(fiber_origin),
        fiber_rho_one=rho_one,
        split=split,
    )


def weakly_split(fan: Fan, projection, base_fan: Optional[Fan] = None) -> bool:
    """Whether the fan is weakly split by its kernel subfan and the image
    fan: a subfan maps cone-by-cone bijectively onto the base and every
    maximal cone decomposes as lifted cone + kernel cone."""
    proj = [tuple(row) for row in projection]
    kernel_rays = {
        i for i in range(len(fan.rays))
        if all(dot(row, fan.rays[i]) == 0 for row in proj)
    }
    lifts: dict[tuple, tuple[int, ...]] = {}
    for cone in fan.max_cones:
        blade = tuple(sorted(i for i in cone if i not in kernel_rays))
        imgs = []
        for i in blade:
            img = tuple(dot(row, fan.rays[i]) for row in proj)
            imgs.append(primitive_part(img))
        from .linalg import matrix_rank

        if matrix_rank(imgs) != len(blade):
            return False
        key = tuple(sorted(imgs))
        if key in lifts and lifts[key] != blade:
            return False
        lifts[key] = blade
    if base_fan is not None:
        base_keys = {
            tuple(sorted(base_fan.rays[i] for i in cone)) for cone in base_fan.max_cones
        }
        if base_keys != set(lifts.keys()):
            return False
    return True


def run_mmp_scaling(
    P: FacetPresentation, force: bool = False, cross_validate: bool = True
) -> MMPTrace:
    """Run the scaled program on the polarized data of a simple polytope.

    At each critical value the vanishing extremal class is contracted or
    flipped and the polarization is pushed forward; the run terminates at a
    fibering contraction, whose critical value must equal the effective
    threshold.  Non-general inputs (several classes vanishing at once) are
    rejected unless force=True, which tie-breaks by the lexicographically
    smallest wall and flags the trace.
    """
    if not P.irredundant:
        raise polytopes.RedundantPresentationError("run needs an irredundant presentation")
    if not polytopes.is_simple(P):
        raise polytopes.RedundantPresentationError("run needs a simple polytope")
    fan = polytopes.normal_fan(P)
    L = TorusDivisor(fan, P.constants)
    if not is_ample(fan, L):
        raise ValueError("the polytope's divisor is not ample on its normal fan")
    sigma_P = polytopes.effective_threshold(P)
    steps: list[MMPStep] = []
    flagged = False
    lam_prev = ZERO
    budget = 10 * len(fan.rays)
    while True:
        if len(steps) >= budget:
            raise StepBudgetError("step budget exhausted; runaway program")
        lam = _nef_threshold_from(fan, L, lam_prev)
        mk = anticanonical(fan)
        vanishing = []
        for w in walls(fan):
            kc = wall_curve_number(fan, mk, w)
            if kc > 0 and wall_curve_number(fan, L, w) == lam * kc:
                vanishing.append(w)
        classes: dict[tuple, list[Wall]] = {}
        for w in vanishing:
            classes.setdefault(wall_class_key(w), []).append(w)
        if len(classes) > 1:
            wall_sets = tuple(sorted(min(w.wall_rays for w in ws) for ws in classes.values()))
            if not force:
                raise GeneralityError(lam, wall_sets)
            flagged = True
        chosen = min(classes.values(), key=lambda ws: min(w.wall_rays for w in ws))
        wall = min(chosen, key=lambda w: w.wall_rays)
        alpha, beta = wall_classification(fan, wall)
        if alpha == 0:
            data = mori_fiber_data(fan, wall)
            steps.append(
                MMPStep(
                    lam=lam,
                    kind=MORI_FIBER,
                    wall_rays=wall.wall_rays,
                    relation=wall.relation,
                    alpha=alpha,
                    beta=beta,
                    fan_before=fan,
                    fan_after=data.base_fan,
                    lost_face_dim=fan.rank,
                    generality_flag=flagged,
                    fiber_data=data,
                )
            )
            break
        if alpha == 1:
            res = contract(fan, wall)
            new_fan = res.fan
            new_L = TorusDivisor(
                new_fan,
                tuple(c for i, c in enumerate(L.coeffs) if i != res.dropped_ray),
            )
            lost = fan.rank - 1
        else:
            new_fan = flip(fan, wall)
            new_L = TorusDivisor(new_fan, L.coeffs)
            lost = fan.rank - alpha
        steps.append(
            MMPStep(
                lam=lam,
                kind=DIVISORIAL if alpha == 1 else FLIP,
                wall_rays=wall.wall_rays,
                relation=wall.relation,
                alpha=alpha,
                beta=beta,
                fan_before=fan,
                fan_after=new_fan,
                lost_face_dim=lost,
                generality_flag=flagged,
            )
        )
        fan, L = new_fan, new_L
        lam_prev = lam
    trace = MMPTrace(
        initial_polytope=P,
        steps=steps,
        effective_threshold=sigma_P,
        core_projection=polytopes.core_and_projection(P),
        generality_flag=flagged,
    )
    if not flagged:
        final = steps[-1].lam
        if final != sigma_P:
            raise MalformedFanError(
                f"final critical value {final} differs from effective threshold {sigma_P}"
            )
        lams = [s.lam for s in steps]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise MalformedFanError("critical values are not strictly increasing")
    if cross_validate:
        _adjoint_cross_validation(trace)
    return trace


def _adjoint_cross_validation(trace: MMPTrace) -> None:
    """Check the run against the adjoint polytope family.

    Between critical values the reduced adjoint polytope must be simple
    with the tracked normal fan; at a divisorial value the facet count
    drops by exactly one and the polytope stays simple; at a flip it is
    not simple with unchanged facet count; on the last interval it is a
    Cayley sum; and the projected polytope agrees with the fiber fan.
    Violations raise for general runs and are recorded otherwise.
    """
    P = trace.initial_polytope
    notes = {}
    ok = True

    def record(key, check):
        nonlocal ok
        try:
            value = check()
        except (polytopes.DegenerateError, polytopes.EmptyPolytopeError,
                polytopes.RedundantPresentationError):
            value = False
        notes[key] = value
        ok = ok and bool(value)

    lam_prev = ZERO
    for idx, step in enumerate(trace.steps):
        mid = (lam_prev + step.lam) / 2
        try:
            reduced, _ = polytopes.remove_redundant(
                polytopes.adjoint(P, mid, allow_redundant=True)
            )
        except (polytopes.DegenerateError, polytopes.EmptyPolytopeError):
            notes[f"interval_{idx}_fan_matches"] = False
            ok = False
            lam_prev = step.lam
            continue
        notes[f"interval_{idx}_facets"] = reduced.nfacets
        step.facet_count_before = reduced.nfacets
        record(f"interval_{idx}_fan_matches",
               lambda: polytopes.normal_fan(reduced) == step.fan_before)
        record(f"interval_{idx}_simple", lambda: polytopes.is_simple(reduced))
        if step.kind in (DIVISORIAL, FLIP):
            try:
                at, _ = polytopes.remove_redundant(
                    polytopes.adjoint(P, step.lam, allow_redundant=True)
                )
            except (polytopes.DegenerateError, polytopes.EmptyPolytopeError):
                notes[f"step_{idx}_polytope_at_value"] = False
                ok = False
                lam_prev = step.lam
                continue
            step.facet_count_after = at.nfacets
            if step.kind == DIVISORIAL:
                record(f"step_{idx}_facet_drop_one",
                       lambda: reduced.nfacets - at.nfacets == 1)
                record(f"step_{idx}_simple_at_value", lambda: polytopes.is_simple(at))
            else:
                record(f"step_{idx}_facet_count_constant",
                       lambda: at.nfacets == reduced.nfacets)
                record(f"step_{idx}_not_simple_at_value",
                       lambda: not polytopes.is_simple(at))
        else:  # Mori fiber space: last interval polytope is a Cayley sum
            record("tail_is_cayley",
                   lambda: polytopes.cayley_mori_detect(reduced) is not None)
            record("fiber_polytope_matches",
                   lambda: _fiber_polytope_matches(trace, step.fiber_data))
        lam_prev = step.lam
    trace.validation = notes
    if not trace.generality_flag and not ok:
        raise MalformedFanError(f"adjoint cross-validation failed: {notes}")


def _fiber_polytope_matches(trace: MMPTrace, data: MoriFiberData) -> bool:
    """Item check for the projected polytope Q: its normal fan, pulled back
    through the core projection, must be exactly the subfan of the original
    fan annihilating the core direction (the fan of the general fiber of
    the composite map)."""
    cp = trace.core_projection
    fanX = trace.steps[0].fan_before
    inside = [
        i for i, v in enumerate(fanX.rays)
        if all(dot(kb, v) == 0 for kb in cp.kernel_basis)
    ]
    sub_cones = {
        tuple(sorted(i for i in cone if i in set(inside))) for cone in fanX.max_cones
    }
    sub_max = {
        c for c in sub_cones if not any(set(c) < set(o) for o in sub_cones)
    }
    if cp.Q.dim == 0:
        return not inside and sub_max == {()}
    fq = polytopes.normal_fan(cp.Q)
    # pull the Q-fan rays back to the ambient lattice through the projection
    pulled = []
    for u in fq.rays:
        amb = tuple(sum(cp.projection[r][c] * u[r] for r in range(len(u))) for c in range(fanX.rank))
        pulled.append(primitive_part(amb))
    ray_of = {}
    for j, amb in enumerate(pulled):
        if amb not in fanX.rays:
            return False
        ray_of[j] = fanX.rays.index(amb)
    if sorted(ray_of.values()) != sorted(inside):
        return False
    mapped = {tuple(sorted(ray_of[j] for j in cone)) for cone in fq.max_cones}
    return mapped == sub_max
