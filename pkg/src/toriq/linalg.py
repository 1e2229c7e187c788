"""Exact rational and lattice linear algebra.

Everything in this package runs on Python ints and ``fractions.Fraction``;
there is no floating point anywhere.  This module provides the shared
kernels: Gaussian elimination, Smith normal form, an exact simplex LP
solver (Bland's rule, so it terminates), and facet enumeration for convex
hulls of rational point sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Optional, Sequence

Vec = tuple[int, ...]
QVec = tuple[Fraction, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class DimensionError(ValueError):
    """Raised when operands have incompatible shapes."""


def frac(x) -> Fraction:
    """Coerce an int, string ("p/q") or Fraction to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def format_frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise DimensionError(f"dot of length {len(u)} against {len(v)}")
    return sum(a * b for a, b in zip(u, v))


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, u):
    return tuple(c * a for a in u)


def is_zero_vec(v) -> bool:
    return all(a == 0 for a in v)


def gcd_vec(v: Sequence[int]) -> int:
    g = 0
    for a in v:
        g = gcd(g, abs(a))
    return g


def primitive_part(v: Sequence[int]) -> Vec:
    """Divide an integer vector by the gcd of its entries.

    The direction is preserved: (-3, 0) -> (-1, 0).  Raises on the zero
    vector, which has no primitive representative.
    """
    g = gcd_vec(v)
    if g == 0:
        raise ValueError("zero vector has no primitive part")
    return tuple(a // g for a in v)


def is_primitive(v: Sequence[int]) -> bool:
    return gcd_vec(v) == 1


def scale_to_primitive(v: Sequence[Fraction]) -> Vec:
    """Scale a nonzero rational vector by a positive rational so it becomes
    a primitive integer vector."""
    denoms = 1
    for a in v:
        denoms = denoms * a.denominator // gcd(denoms, a.denominator)
    ints = [int(a * denoms) for a in v]
    return primitive_part(ints)


# ---------------------------------------------------------------------------
# dense exact matrices (lists of row tuples)
# ---------------------------------------------------------------------------

def identity_matrix(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_vec(M, x):
    return tuple(dot(row, x) for row in M)


def mat_mul(A, B):
    if not A or not B:
        return []
    cols = list(zip(*B))
    return [[dot(row, col) for col in cols] for row in A]


def transpose(M):
    return [list(col) for col in zip(*M)]


def matrix_rank(M) -> int:
    rows = [[Fraction(x) for x in row] for row in M]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        rows[rank] = [x / pv for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def det(M) -> Fraction:
    n = len(M)
    rows = [[Fraction(x) for x in row] for row in M]
    sign = 1
    result = ONE
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return ZERO
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            sign = -sign
        pv = rows[col][col]
        result *= pv
        for r in range(col + 1, n):
            if rows[r][col] != 0:
                f = rows[r][col] / pv
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return sign * result


def solve_linear(M, b) -> Optional[QVec]:
    """Solve M x = b exactly.

    Returns None when the system is inconsistent.  Underdetermined systems
    get the solution whose free coordinates (under leftmost-pivot order)
    are zero, which keeps downstream constructions deterministic.
    """
    m = len(M)
    if m != len(b):
        raise DimensionError(f"{m} rows but {len(b)} right-hand entries")
    if m == 0:
        return ()
    n = len(M[0])
    rows = [[Fraction(x) for x in row] + [Fraction(bi)] for row, bi in zip(M, b)]
    pivots = []
    r = 0
    for col in range(n):
        pivot = next((i for i in range(r, m) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][col]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if rows[i][n] != 0:
            return None
    x = [ZERO] * n
    for i, col in enumerate(pivots):
        x[col] = rows[i][n]
    return tuple(x)


def solve_matrix(M, B) -> Optional[list[list[Fraction]]]:
    """Solve M X = B column by column; None if any column is inconsistent."""
    cols = []
    for col in zip(*B):
        x = solve_linear(M, col)
        if x is None:
            return None
        cols.append(x)
    return transpose(cols)


def invert(M) -> list[list[Fraction]]:
    n = len(M)
    X = solve_matrix(M, identity_matrix(n))
    if X is None:
        raise ValueError("matrix is singular")
    return X


def kernel_basis(M) -> list[QVec]:
    """Basis of the rational kernel of M (rows are equations)."""
    if not M:
        return []
    m, n = len(M), len(M[0])
    rows = [[Fraction(x) for x in row] for row in M]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        pivot = next((i for i in range(r, m) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][col]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    basis = []
    free = [c for c in range(n) if c not in pivots]
    for fc in free:
        v = [ZERO] * n
        v[fc] = ONE
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def smith_normal_form(M) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return (U, D, V) with U*M*V = D, D diagonal with d1 | d2 | ...,
    and U, V unimodular integer matrices.

    M must be a nonempty integer matrix.
    """
    if not M or not M[0]:
        raise ValueError("Smith normal form of an empty matrix")
    A = [list(map(int, row)) for row in M]
    m, n = len(A), len(A[0])
    U = identity_matrix(m)
    V = identity_matrix(n)

    def row_op(i, j, q):  # row i -= q * row j
        A[i] = [a - q * b for a, b in zip(A[i], A[j])]
        U[i] = [a - q * b for a, b in zip(U[i], U[j])]

    def col_op(i, j, q):  # col i -= q * col j
        for row in A:
            row[i] -= q * row[j]
        for row in V:
            row[i] -= q * row[j]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, n):
        # locate smallest-magnitude nonzero entry in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0 and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        dirty = False
        for i in range(t + 1, m):
            if A[i][t] != 0:
                q = A[i][t] // A[t][t]
                row_op(i, t, q)
                if A[i][t] != 0:
                    dirty = True
        for j in range(t + 1, n):
            if A[t][j] != 0:
                q = A[t][j] // A[t][t]
                col_op(j, t, q)
                if A[t][j] != 0:
                    dirty = True
        if dirty:
            continue
        # enforce divisibility d_t | every remaining entry
        fixed = True
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if A[i][j] % A[t][t] != 0:
                    # fold row i into row t to shrink the pivot
                    A[t] = [a + b for a, b in zip(A[t], A[i])]
                    U[t] = [a + b for a, b in zip(U[t], U[i])]
                    fixed = False
                    break
            if not fixed:
                break
        if fixed:
            if A[t][t] < 0:
                A[t] = [-a for a in A[t]]
                U[t] = [-a for a in U[t]]
            t += 1
    return U, A, V


def snf_diagonal(M) -> list[int]:
    _, D, _ = smith_normal_form(M)
    return [D[i][i] for i in range(min(len(D), len(D[0])))]


def saturated_basis(columns: list[Vec]) -> list[Vec]:
    """Basis of the saturation of the lattice spanned by integer columns.

    Returns k = rank(columns) integer vectors spanning span(columns) whose
    Z-span is (span ∩ Z^n).
    """
    if not columns:
        return []
    n = len(columns[0])
    A = [[col[i] for col in columns] for i in range(n)]
    U, D, _ = smith_normal_form(A)
    r = sum(1 for i in range(min(len(D), len(D[0]))) if D[i][i] != 0)
    Uinv = invert(U)
    basis = []
    for j in range(r):
        col = tuple(int(Uinv[i][j]) for i in range(n))
        basis.append(col)
    return basis


def quotient_projection(columns: list[Vec], n: int) -> list[Vec]:
    """Rows of the projection Z^n -> Z^(n-k) whose kernel is the saturation
    of the span of the given integer columns."""
    if not columns:
        return [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    A = [[col[i] for col in columns] for i in range(n)]
    U, D, _ = smith_normal_form(A)
    r = sum(1 for i in range(min(len(D), len(D[0]))) if D[i][i] != 0)
    return [tuple(int(x) for x in U[i]) for i in range(r, n)]


def integer_kernel_basis(rows: list[Vec]) -> list[Vec]:
    """Basis of the integer kernel lattice {x : rows·x = 0} (saturated)."""
    if not rows:
        raise ValueError("need at least one row")
    n = len(rows[0])
    A = [list(r) for r in rows]
    _, D, V = smith_normal_form(A)
    r = sum(1 for i in range(min(len(D), len(D[0]))) if D[i][i] != 0)
    return [tuple(V[i][j] for i in range(n)) for j in range(r, n)]


# ---------------------------------------------------------------------------
# exact simplex
# ---------------------------------------------------------------------------

@dataclass
class LPResult:
    status: str            # "optimal" | "unbounded" | "infeasible"
    value: Optional[Fraction]
    point: Optional[QVec]


def _pivot(T, basis, row, col):
    pv = T[row][col]
    T[row] = [x / pv for x in T[row]]
    for i in range(len(T)):
        if i != row and T[i][col] != 0:
            f = T[i][col]
            T[i] = [x - f * y for x, y in zip(T[i], T[row])]
    basis[row] = col


def _simplex_phase(T, basis, nvars):
    """Run simplex on tableau T (last row = objective, last col = rhs)
    with Bland's rule.  Returns 'optimal' or 'unbounded'."""
    m = len(T) - 1
    while True:
        obj = T[m]
        enter = next((j for j in range(nvars) if obj[j] < 0), None)
        if enter is None:
            return "optimal"
        best = None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][nvars] / T[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        _pivot(T, basis, best[1], enter)


def lp_standard(c: Sequence[Fraction], A: list[list[Fraction]], b: Sequence[Fraction]) -> LPResult:
    """Minimize c·y subject to A y = b, y >= 0, exactly."""
    m = len(A)
    n = len(c)
    rows = [[Fraction(x) for x in row] for row in A]
    rhs = [Fraction(x) for x in b]
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]
    # phase 1: artificials
    total = n + m
    T = []
    for i in range(m):
        T.append(rows[i] + [ONE if j == i else ZERO for j in range(m)] + [rhs[i]])
    objrow = [ZERO] * (total + 1)
    for i in range(m):
        objrow = [o - a for o, a in zip(objrow, T[i])]
    for j in range(n, total):
        objrow[j] = ZERO
    T.append(objrow)
    basis = [n + i for i in range(m)]
    _simplex_phase(T, basis, total)
    if -T[m][total] != 0:
        return LPResult("infeasible", None, None)
    # drive artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if T[i][j] != 0), None)
            if col is not None:
                _pivot(T, basis, i, col)
    keep = [i for i in range(m) if basis[i] < n or any(T[i][j] != 0 for j in range(n))]
    # rows whose basic artificial cannot leave are redundant zero rows
    rows2 = [T[i][:n] + [T[i][total]] for i in range(m) if i in keep]
    basis2 = [basis[i] for i in range(m) if i in keep]
    m2 = len(rows2)
    obj = [Fraction(x) for x in c] + [ZERO]
    T2 = [row[:] for row in rows2]
    T2.append(obj)
    for i in range(m2):
        bc = basis2[i]
        if T2[m2][bc] != 0:
            f = T2[m2][bc]
            T2[m2] = [x - f * y for x, y in zip(T2[m2], T2[i])]
    status = _simplex_phase(T2, basis2, n)
    if status == "unbounded":
        return LPResult("unbounded", None, None)
    y = [ZERO] * n
    for i in range(m2):
        y[basis2[i]] = T2[i][n]
    return LPResult("optimal", -T2[m2][n], tuple(y))


def lp_min(c: Sequence, normals: Sequence[Sequence], constants: Sequence) -> LPResult:
    """Minimize c·x over {x : <v_i, x> >= -a_i} with free x, exactly.

    Encodes x = p - q with slack variables and runs two-phase simplex.
    """
    n = len(c)
    cq = [frac(x) for x in c]
    A = []
    b = []
    for v, a in zip(normals, constants):
        row = [Fraction(x) for x in v] + [-Fraction(x) for x in v]
        row += [ZERO] * len(normals)
        A.append(row)
        b.append(-frac(a))
    for i in range(len(normals)):
        A[i][2 * n + i] = Fraction(-1)
    cost = cq + [-x for x in cq] + [ZERO] * len(normals)
    res = lp_standard(cost, A, b)
    if res.status != "optimal":
        return res
    x = tuple(res.point[i] - res.point[n + i] for i in range(n))
    return LPResult("optimal", res.value, x)


def feasible_point(normals, constants) -> Optional[QVec]:
    """A point of {x : <v_i,x> >= -a_i}, or None when empty."""
    if not normals:
        return ()
    res = lp_min([0] * len(normals[0]), normals, constants)
    if res.status == "infeasible":
        return None
    if res.status == "optimal":
        return res.point
    # zero objective cannot be unbounded
    raise AssertionError("zero objective reported unbounded")


def nonneg_solve(generators: Sequence[Sequence], x: Sequence) -> Optional[QVec]:
    """Coefficients c >= 0 with sum(c_i * g_i) = x, or None.

    Exact phase-one simplex; the returned witness is one valid certificate,
    not a canonical one.
    """
    gens = [tuple(frac(a) for a in g) for g in generators]
    target = tuple(frac(a) for a in x)
    for g in gens:
        if len(g) != len(target):
            raise DimensionError("generator length differs from target length")
    if not gens:
        return () if is_zero_vec(target) else None
    m = len(target)
    A = [[g[i] for g in gens] for i in range(m)]
    res = lp_standard([ZERO] * len(gens), A, target)
    if res.status != "optimal":
        return None
    return res.point


# ---------------------------------------------------------------------------
# convex hull facets
# ---------------------------------------------------------------------------

def affine_rank(points: Sequence[Sequence[Fraction]]) -> int:
    if not points:
        return -1
    p0 = points[0]
    diffs = [vec_sub(p, p0) for p in points[1:]]
    return matrix_rank(diffs)


def hull_facets(points: Sequence[Sequence[Fraction]]) -> list[tuple[Vec, Fraction]]:
    """Facets of conv(points) as (primitive inward normal v, constant a)
    pairs with conv(points) = {x : <v,x> >= -a}.

    The points must affinely span their ambient space.  Brute force over
    d-subsets; intended for the small vertex sets arising here.
    """
    pts = [tuple(frac(a) for a in p) for p in points]
    if not pts:
        raise ValueError("no points")
    d = len(pts[0])
    if d == 0:
        return []
    if affine_rank(pts) != d:
        raise ValueError("points do not span the ambient space")
    found: dict[tuple[Vec, Fraction], None] = {}
    for subset in combinations(range(len(pts)), d):
        base = pts[subset[0]]
        diffs = [vec_sub(pts[i], base) for i in subset[1:]]
        if matrix_rank(diffs) != d - 1:
            continue
        kern = kernel_basis(diffs) if diffs else [tuple(ONE if j == 0 else ZERO for j in range(d))]
        if len(kern) != 1:
            continue
        normal = scale_to_primitive(kern[0])
        level = dot(normal, base)
        lo = hi = False
        for p in pts:
            val = dot(normal, p)
            if val < level:
                lo = True
            elif val > level:
                hi = True
            if lo and hi:
                break
        if lo and hi:
            continue
        if hi:  # points on the >= side: inward normal as is
            found[(normal, -level)] = None
        elif lo:
            neg = tuple(-x for x in normal)
            found[(neg, level)] = None
        else:  # all points on the hyperplane: cannot happen, full-dim checked
            continue
    return sorted(found.keys())
