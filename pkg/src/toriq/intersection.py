"""Exact intersection theory on complete simplicial toric data.

Products of invariant divisors with invariant subvarieties are computed by
the standard recipe: replace the divisor by a linearly equivalent one whose
support misses the subvariety (subtracting the divisor of a character), then
read off the coefficients over the one-step-larger cones, dividing by the
index of the ray image in the one-dimensional quotient lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .fans import (
    Fan,
    UnsupportedFanError,
    Wall,
    faces_of_dim,
    is_face,
    primitive_collections,
    validate,
    walls,
)
from .linalg import QVec, Vec, dot, frac, invert, smith_normal_form, solve_linear

ZERO = Fraction(0)


class NotQGorensteinError(ValueError):
    """A required divisor is not Q-Cartier on this fan."""


@dataclass(frozen=True)
class TorusDivisor:
    """An invariant Q-divisor, one rational coefficient per ray."""

    fan: Fan
    coeffs: QVec

    def __post_init__(self):
        cs = tuple(frac(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", cs)
        if len(cs) != len(self.fan.rays):
            raise ValueError("coefficient count differs from ray count")

    def __add__(self, other: "TorusDivisor") -> "TorusDivisor":
        if other.fan != self.fan:
            raise ValueError("divisors live on different fans")
        return TorusDivisor(self.fan, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "TorusDivisor") -> "TorusDivisor":
        if other.fan != self.fan:
            raise ValueError("divisors live on different fans")
        return TorusDivisor(self.fan, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, c) -> "TorusDivisor":
        c = frac(c)
        return TorusDivisor(self.fan, tuple(c * a for a in self.coeffs))


@dataclass(frozen=True)
class Cycle:
    """A rational combination of invariant subvarieties of one dimension,
    keyed by the defining cones."""

    fan: Fan
    codim: int
    terms: tuple[tuple[tuple[int, ...], Fraction], ...]

    def total(self) -> Fraction:
        return sum((c for _, c in self.terms), ZERO)


def div_char(fan: Fan, m: Vec) -> TorusDivisor:
    """Divisor of the character associated to a dual lattice point."""
    if len(m) != fan.rank:
        raise ValueError("character exponent has wrong length")
    return TorusDivisor(fan, tuple(Fraction(dot(m, v)) for v in fan.rays))


def anticanonical(fan: Fan) -> TorusDivisor:
    return TorusDivisor(fan, (Fraction(1),) * len(fan.rays))


def prime_divisor(fan: Fan, i: int) -> TorusDivisor:
    return TorusDivisor(fan, tuple(Fraction(1 if j == i else 0) for j in range(len(fan.rays))))


def move_divisor(fan: Fan, i: int, sigma: tuple[int, ...]) -> TorusDivisor:
    """D_i minus the divisor of a character u with <u, v_i> = 1 and
    <u, v_j> = 0 on the other rays of sigma; the result's support misses
    V(sigma).  For singular cones u may be rational."""
    sigma = tuple(sorted(sigma))
    if i not in sigma:
        raise ValueError(f"ray {i} does not lie in the cone {sigma}; no move needed")
    target = [Fraction(1 if j == i else 0) for j in sigma]
    u = _solve_character(fan, sigma, target)
    return prime_divisor(fan, i) - div_char_rational(fan, u)


def div_char_rational(fan: Fan, u: Sequence[Fraction]) -> TorusDivisor:
    return TorusDivisor(fan, tuple(sum(a * x for a, x in zip(u, v)) for v in fan.rays))


def _solve_character(fan: Fan, sigma: tuple[int, ...], values) -> QVec:
    mat = [fan.rays[j] for j in sigma]
    u = solve_linear(mat, values)
    if u is None:
        raise UnsupportedFanError(f"cone {sigma} is not simplicial; cannot solve for u")
    return u


def move_off(fan: Fan, D: TorusDivisor, sigma: tuple[int, ...]) -> TorusDivisor:
    """A divisor linearly equivalent to D whose support contains no ray of
    sigma (so V(sigma) is not inside the support)."""
    if not sigma:
        return D
    values = [D.coeffs[j] for j in sigma]
    u = _solve_character(fan, sigma, values)
    return D - div_char_rational(fan, u)


@lru_cache(maxsize=None)
def _quotient_data(fan: Fan, sigma: tuple[int, ...], gamma: tuple[int, ...]):
    """Data for the surjection N_gamma -> Z with kernel N_sigma: a lattice
    basis of N_gamma (as an n x k matrix of columns) and the functional on
    basis coordinates whose kernel is the sigma-sublattice."""
    cols = [fan.rays[i] for i in gamma]
    n = fan.rank
    A = [[c[r] for c in cols] for r in range(n)]
    U, _, _ = smith_normal_form(A)
    k1 = len(gamma)
    Uinv = invert(U)
    mat = [[Uinv[r][j] for j in range(k1)] for r in range(n)]  # basis columns
    scoords = []
    for i in sigma:
        sol = solve_linear(mat, fan.rays[i])
        assert sol is not None
        scoords.append([int(x) for x in sol])
    if scoords:
        S = [[col[r] for col in scoords] for r in range(k1)]
        U2, _, _ = smith_normal_form(S)
        phi = tuple(U2[k1 - 1])
    else:
        phi = tuple([0] * (k1 - 1) + [1])
    return mat, phi


def quotient_index(fan: Fan, sigma: tuple[int, ...], gamma: tuple[int, ...], j: int) -> int:
    """The positive integer s: the image of ray j generates s times the
    one-dimensional lattice N_gamma / N_sigma."""
    mat, phi = _quotient_data(fan, sigma, gamma)
    coords = solve_linear(mat, fan.rays[j])
    assert coords is not None
    val = dot(phi, coords)
    assert val.denominator == 1 and val != 0
    return abs(int(val))


def intersect_once(fan: Fan, D: TorusDivisor, sigma: tuple[int, ...]) -> Cycle:
    """D . V(sigma) as a cycle over the cones one dimension up.

    D is internally replaced by a linearly equivalent divisor missing
    V(sigma); the coefficient over gamma = sigma + one ray j is the moved
    coefficient at j divided by the index of v_j in N_gamma/N_sigma.
    """
    sigma = tuple(sorted(sigma))
    if sigma and not is_face(fan, sigma):
        raise ValueError(f"{sigma} is not a cone of the fan")
    moved = move_off(fan, D, sigma)
    terms = []
    seen = set()
    for cone in fan.max_cones:
        if not set(sigma) <= set(cone):
            continue
        for j in cone:
            if j in sigma:
                continue
            gamma = tuple(sorted(sigma + (j,)))
            if gamma in seen:
                continue
            seen.add(gamma)
            if moved.coeffs[j] == 0:
                continue
            s = quotient_index(fan, sigma, gamma, j)
            terms.append((gamma, moved.coeffs[j] / s))
    return Cycle(fan, len(sigma) + 1, tuple(sorted(terms)))


def curve_number(fan: Fan, D: TorusDivisor, tau: tuple[int, ...]) -> Fraction:
    """The intersection number D . V(tau) for a wall tau."""
    tau = tuple(sorted(tau))
    adjacent = [c for c in fan.max_cones if set(tau) <= set(c)]
    if len(adjacent) != 2:
        raise ValueError(f"{tau} is not a wall")
    return intersect_once(fan, D, tau).total()


def wall_curve_number(fan: Fan, D: TorusDivisor, wall: Wall) -> Fraction:
    return curve_number(fan, D, wall.wall_rays)


def ch2_dot_surface(fan: Fan, sigma: tuple[int, ...]) -> Fraction:
    """Pairing of half the sum of squared prime divisors with the invariant
    surface V(sigma); sigma must have dimension rank-2.

    For smooth fans this is the second Chern character against the surface;
    simplicial non-smooth input is evaluated under the same formula.
    """
    sigma = tuple(sorted(sigma))
    if len(sigma) != fan.rank - 2:
        raise ValueError(f"{sigma} is not a codimension-2 cone")
    if sigma and not is_face(fan, sigma):
        raise ValueError(f"{sigma} is not a cone of the fan")
    total = ZERO
    for i in range(len(fan.rays)):
        Di = prime_divisor(fan, i)
        once = intersect_once(fan, Di, sigma)
        for tau, b in once.terms:
            total += b * intersect_once(fan, Di, tau).total()
    return total / 2


@dataclass(frozen=True)
class FanoVerdict:
    is_fano: bool
    method: str                      # "primitive-collections" | "kleiman"
    witnesses: tuple                 # failing collections or walls


def is_fano(fan: Fan) -> FanoVerdict:
    """Ampleness of the anticanonical divisor.

    Smooth fans: every primitive collection has positive degree.  General
    simplicial fans: every wall curve meets the anticanonical divisor
    positively, after checking it is Q-Cartier (automatic for simplicial).
    """
    rep = validate(fan)
    if not (rep.simplicial and rep.complete):
        raise UnsupportedFanError("Fano test needs a complete simplicial fan")
    if rep.smooth:
        bad = tuple(c for c in primitive_collections(fan) if c.degree <= 0)
        return FanoVerdict(not bad, "primitive-collections", bad)
    for cone in fan.max_cones:
        _solve_character(fan, cone, [Fraction(1)] * len(cone))  # Q-Cartier check
    mk = anticanonical(fan)
    bad_walls = tuple(
        w for w in walls(fan) if wall_curve_number(fan, mk, w) <= 0
    )
    return FanoVerdict(not bad_walls, "kleiman", bad_walls)


@dataclass(frozen=True)
class TwoFanoVerdict:
    is_two_fano: bool
    minimum: Fraction
    witness: tuple[int, ...]
    nef_but_not_positive: bool
    values: tuple[tuple[tuple[int, ...], Fraction], ...]


def is_2fano(fan: Fan) -> TwoFanoVerdict:
    """Positivity of the squared-divisor pairing over every invariant
    surface; the witness is the minimizing surface cone."""
    rep = validate(fan)
    if not (rep.simplicial and rep.complete):
        raise UnsupportedFanError("2-Fano scan needs a complete simplicial fan")
    if fan.rank < 2:
        raise ValueError("2-Fano scan needs rank >= 2")
    sigmas = faces_of_dim(fan, fan.rank - 2) if fan.rank > 2 else [()]
    values = tuple((s, ch2_dot_surface(fan, s)) for s in sigmas)
    witness, minimum = min(values, key=lambda t: (t[1], t[0]))
    return TwoFanoVerdict(minimum > 0, minimum, witness, minimum == 0, values)


def is_ample(fan: Fan, D: TorusDivisor) -> bool:
    return all(wall_curve_number(fan, D, w) > 0 for w in walls(fan))


def nef_threshold(fan: Fan, L: TorusDivisor) -> Fraction:
    """Largest s with L + s*K nef, for ample L: the minimum over walls with
    negative canonical degree of (L.C) / (-K.C)."""
    if not is_ample(fan, L):
        raise ValueError("divisor is not ample")
    return _nef_threshold_from(fan, L, ZERO)


def _nef_threshold_from(fan: Fan, L: TorusDivisor, s0: Fraction) -> Fraction:
    """Nef threshold assuming L + s0*K is already nef (exact, by walls)."""
    mk = anticanonical(fan)
    best: Optional[Fraction] = None
    for w in walls(fan):
        kc = wall_curve_number(fan, mk, w)
        lc = wall_curve_number(fan, L, w)
        if lc + s0 * (-kc) < 0:
            raise ValueError(f"divisor is not nef at s={s0} (wall {w.wall_rays})")
        if kc > 0:
            cand = lc / kc
            if best is None or cand < best:
                best = cand
    if best is None:
        raise ValueError("no wall meets the canonical divisor negatively")
    return best
