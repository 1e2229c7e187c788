"""File formats: fans and polytopes as JSON, datasets and reports as CSV,
and SVG rendering of 2D adjoint families.

Rationals travel as "p/q" strings so no binary float ever enters a file.
Emitted forms are canonical (rays sorted lexicographically, cones sorted)
and therefore stable under diffing.
"""

from __future__ import annotations

import csv
import io as _stdio
import json
from fractions import Fraction
from typing import Optional, Sequence

from .fans import Fan
from .linalg import format_frac, frac, gcd_vec, primitive_part
from .polytopes import (
    FacetPresentation,
    adjoint,
    remove_redundant,
    is_empty,
    thresholds,
    vertices,
)


class ParseError(ValueError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = ""
        if field is not None:
            where = f" (field {field!r})"
        if line is not None:
            where += f" (line {line})"
        super().__init__(message + where)


class SvgError(ValueError):
    pass


def _int_vectors(value, field):
    if not isinstance(value, list):
        raise ParseError("expected a list of integer vectors", field=field)
    out = []
    for item in value:
        if not isinstance(item, list) or not all(isinstance(x, int) for x in item):
            raise ParseError(f"malformed vector {item!r}", field=field)
        out.append(tuple(item))
    return out


def parse_fan(text: str, lenient: bool = False) -> Fan:
    """Parse a fan file; in strict mode non-primitive rays are rejected,
    with lenient=True they are primitivized with a warning flag dropped."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc.msg}", line=exc.lineno) from exc
    for key in ("rank", "rays", "max_cones"):
        if key not in data:
            raise ParseError("missing key", field=key)
    if not isinstance(data["rank"], int):
        raise ParseError("rank must be an integer", field="rank")
    rays = _int_vectors(data["rays"], "rays")
    fixed = []
    for r in rays:
        if gcd_vec(r) == 0:
            raise ParseError(f"zero ray {r}", field="rays")
        if gcd_vec(r) != 1:
            if not lenient:
                raise ParseError(f"non-primitive ray {r}", field="rays")
            import warnings

            warnings.warn(f"primitivized non-primitive ray {r}", stacklevel=2)
            r = primitive_part(r)
        fixed.append(r)
    cones = []
    for c in data["max_cones"]:
        if not isinstance(c, list) or not all(isinstance(i, int) for i in c):
            raise ParseError(f"malformed cone {c!r}", field="max_cones")
        cones.append(tuple(c))
    try:
        return Fan(data["rank"], tuple(fixed), tuple(cones))
    except ValueError as exc:
        raise ParseError(str(exc), field="max_cones") from exc


def canonical_fan(fan: Fan) -> Fan:
    order = sorted(range(len(fan.rays)), key=lambda i: fan.rays[i])
    remap = {old: new for new, old in enumerate(order)}
    rays = tuple(fan.rays[i] for i in order)
    cones = tuple(sorted(tuple(sorted(remap[i] for i in c)) for c in fan.max_cones))
    return Fan(fan.rank, rays, cones)


def emit_fan(fan: Fan, canonical: bool = True) -> str:
    """Serialize a fan; by default in canonical form (rays sorted
    lexicographically), with canonical=False preserving the ray order."""
    c = canonical_fan(fan) if canonical else fan
    return json.dumps(
        {
            "rank": c.rank,
            "rays": [list(r) for r in c.rays],
            "max_cones": [list(cn) for cn in c.max_cones],
        },
        indent=2,
    ) + "\n"


def parse_polytope(text: str) -> FacetPresentation:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc.msg}", line=exc.lineno) from exc
    for key in ("dim", "normals", "constants"):
        if key not in data:
            raise ParseError("missing key", field=key)
    normals = _int_vectors(data["normals"], "normals")
    constants = []
    for a in data["constants"]:
        try:
            constants.append(frac(a) if isinstance(a, (str, int)) else None)
        except (ValueError, ZeroDivisionError):
            constants.append(None)
        if constants[-1] is None:
            raise ParseError(f"malformed rational {a!r}", field="constants")
    try:
        return FacetPresentation(data["dim"], tuple(normals), tuple(constants))
    except ValueError as exc:
        raise ParseError(str(exc), field="normals") from exc


def emit_polytope(P: FacetPresentation) -> str:
    order = sorted(range(P.nfacets), key=lambda i: P.normals[i])
    return json.dumps(
        {
            "dim": P.dim,
            "normals": [list(P.normals[i]) for i in order],
            "constants": [format_frac(P.constants[i]) for i in order],
        },
        indent=2,
    ) + "\n"


# ---------------------------------------------------------------------------
# datasets and reports
# ---------------------------------------------------------------------------

def _parse_vec_list(cell: str, field, line):
    out = []
    for part in cell.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(tuple(int(x) for x in part.split()))
        except ValueError as exc:
            raise ParseError(f"malformed vector {part!r}", field=field, line=line) from exc
    return tuple(out)


def parse_dataset(text: str):
    """Rows of a classification dataset CSV; see the README for columns."""
    from .fano_table import TableRow

    reader = csv.DictReader(_stdio.StringIO(text))
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        name = (rec.get("name") or "").strip()
        if not name:
            raise ParseError("missing row name", field="name", line=lineno)
        rays = _parse_vec_list(rec.get("rays") or "", "rays", lineno)
        colls = _parse_vec_list(rec.get("collections") or "", "collections", lineno)
        surface_cell = (rec.get("surface") or "").strip()
        surface = None
        if surface_cell:
            parts = surface_cell.split()
            if len(parts) != 2:
                raise ParseError("surface needs two indices", field="surface", line=lineno)
            surface = (int(parts[0]), int(parts[1]))
        expected_cell = (rec.get("expected") or "").strip()
        expected = frac(expected_cell) if expected_cell else None
        rows.append(
            TableRow(
                name=name,
                rays=rays or None,
                collections=colls or None,
                surface=surface,
                expected=expected,
                note=(rec.get("note") or "").strip(),
            )
        )
    return rows


def emit_report(report) -> str:
    """Verification report as CSV."""
    buf = _stdio.StringIO()
    w = csv.writer(buf)
    w.writerow(["name", "status", "computed", "expected", "match", "global_min", "min_witness"])
    for row in report.rows:
        w.writerow([
            row.name,
            row.status,
            format_frac(row.computed) if row.computed is not None else "",
            format_frac(row.expected) if row.expected is not None else "",
            {True: "yes", False: "NO"}.get(row.match, ""),
            format_frac(row.global_min) if row.global_min is not None else "",
            " ".join(str(i) for i in row.min_witness) if row.min_witness else "",
        ])
    return buf.getvalue()


def report_text(report) -> str:
    lines = []
    for row in report.rows:
        if row.status == "ok":
            mark = "ok " if row.match else "MISMATCH"
            lines.append(
                f"{row.name:>6}: {mark} computed={format_frac(row.computed)} "
                f"expected={format_frac(row.expected)} "
                f"min={format_frac(row.global_min)} at {row.min_witness} [{row.method}]"
            )
        else:
            lines.append(f"{row.name:>6}: {row.status} ({row.reason})")
    lines.append(
        f"verified {report.verified} rows, {report.mismatches} mismatches, "
        f"{report.errors} errors, {report.skipped} skipped"
    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_SCALE = 60


def _svg_num(q: Fraction) -> str:
    # exact decimal with three places, no float involved
    scaled = q * 1000
    n = scaled.numerator // scaled.denominator
    sign = "-" if n < 0 else ""
    n = abs(n)
    return f"{sign}{n // 1000}.{n % 1000:03d}"


def _ordered_cycle(points: Sequence[tuple[Fraction, Fraction]]):
    cx = sum((p[0] for p in points), Fraction(0)) / len(points)
    cy = sum((p[1] for p in points), Fraction(0)) / len(points)

    def half(p):
        dx, dy = p[0] - cx, p[1] - cy
        return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1

    import functools

    def cmp(p, q):
        hp, hq = half(p), half(q)
        if hp != hq:
            return -1 if hp < hq else 1
        cross = (p[0] - cx) * (q[1] - cy) - (p[1] - cy) * (q[0] - cx)
        if cross > 0:
            return -1
        if cross < 0:
            return 1
        return 0

    return sorted(points, key=functools.cmp_to_key(cmp))


def emit_svg(P: FacetPresentation, s_values: Optional[Sequence] = None,
             critical_values: Optional[Sequence] = None) -> str:
    """Nested outlines of the adjoint family P^(s) of a 2D polytope, drawn
    for a sampled grid plus the exact critical values (labelled p/q)."""
    if P.dim != 2:
        raise SvgError("only 2-dimensional polytopes are drawn")
    if is_empty(P):
        raise SvgError("nothing to draw")
    base = P if P.irredundant else remove_redundant(P)[0]
    th = thresholds(base)
    crit = sorted({frac(c) for c in (critical_values or [])} | {th.nef, th.effective})
    if s_values is None:
        sigma = th.effective
        s_values = [sigma * i / 6 for i in range(6)]
    svals = sorted({frac(s) for s in s_values} | set(crit))
    polys = []
    labels = []
    allpts = []
    for s in svals:
        Q = adjoint(base, s, allow_redundant=True)
        if is_empty(Q):
            continue
        vs = vertices(Q, allow_lower_dim=True).vertices
        allpts.extend(vs)
        is_crit = s in crit
        polys.append((vs, is_crit))
        if is_crit:
            labels.append((vs[0], f"s = {format_frac(s)}"))
    if not allpts:
        raise SvgError("nothing to draw")
    xs = [p[0] for p in allpts]
    ys = [p[1] for p in allpts]
    pad = Fraction(1, 2)
    minx, maxx = min(xs) - pad, max(xs) + pad
    miny, maxy = min(ys) - pad, max(ys) + pad
    width = (maxx - minx) * _SCALE
    height = (maxy - miny) * _SCALE

    def pt(p):
        x = (p[0] - minx) * _SCALE
        y = (maxy - p[1]) * _SCALE
        return f"{_svg_num(x)},{_svg_num(y)}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_svg_num(width)}" '
        f'height="{_svg_num(height)}" viewBox="0 0 {_svg_num(width)} {_svg_num(height)}">'
    ]
    for vs, is_crit in polys:
        stroke = "#c02020" if is_crit else "#404040"
        swidth = "2" if is_crit else "1"
        if len(vs) == 1:
            out.append(
                f'<circle cx="{_svg_num((vs[0][0] - minx) * _SCALE)}" '
                f'cy="{_svg_num((maxy - vs[0][1]) * _SCALE)}" r="3" fill="{stroke}"/>'
            )
            continue
        pts = " ".join(pt(p) for p in _ordered_cycle(list(vs)))
        out.append(
            f'<polygon points="{pts}" fill="none" stroke="{stroke}" stroke-width="{swidth}"/>'
        )
    for anchor, text in labels:
        out.append(
            f'<text x="{_svg_num((anchor[0] - minx) * _SCALE)}" '
            f'y="{_svg_num((maxy - anchor[1]) * _SCALE)}" font-size="10">{text}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
