"""The builtin classification table of smooth toric Fano 4-folds and its
batch verification.

Each explicit row carries the primitive ray generators, the primitive
collections where the family has them, a witness surface and the reference
pairing value.  Rows realized as products or projective bundles carry no
vectors: a product/bundle argument already bounds their second Chern
character, so they are tagged rather than recomputed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional

from . import formats
from .fans import (
    Fan,
    ReconstructionError,
    face_fan,
    fan_from_primitive_data,
    primitive_collections,
    validate,
)
from .intersection import ch2_dot_surface, is_2fano, is_fano
from .linalg import Vec


@dataclass(frozen=True)
class TableRow:
    name: str
    rays: Optional[tuple[Vec, ...]]
    collections: Optional[tuple[tuple[int, ...], ...]]
    surface: Optional[tuple[int, int]]
    expected: Optional[Fraction]
    note: str = ""

    @property
    def explicit(self) -> bool:
        return self.rays is not None


# rows reported to have nef (but not positive) second Chern character
NEF_CH2_NAMES = frozenset(
    ["P4", "B_1", "B_2", "B_3", "B_4", "C_4"]
    + ["D_1", "D_2", "D_3", "D_5", "D_6", "D_8", "D_9", "D_12", "D_13", "D_15"]
    + [f"L_{i}" for i in range(1, 10)]
)


def load_builtin_table() -> list[TableRow]:
    text = resources.files("toriq.data").joinpath("fano4.csv").read_text()
    return formats.parse_dataset(text)


@dataclass
class RowResult:
    name: str
    status: str                        # "ok" | "error" | "skipped"
    method: str = ""                   # "collections" | "hull"
    reason: str = ""
    smooth: bool = False
    complete: bool = False
    fano: bool = False
    computed: Optional[Fraction] = None
    expected: Optional[Fraction] = None
    match: Optional[bool] = None
    global_min: Optional[Fraction] = None
    min_witness: Optional[tuple[int, ...]] = None
    two_fano: Optional[bool] = None
    collections_roundtrip: Optional[bool] = None


@dataclass
class VerificationReport:
    rows: list[RowResult] = field(default_factory=list)
    nef_checks: list[RowResult] = field(default_factory=list)

    @property
    def verified(self) -> int:
        return sum(1 for r in self.rows if r.status == "ok")

    @property
    def mismatches(self) -> int:
        return sum(1 for r in self.rows if r.status == "ok" and r.match is False)

    @property
    def errors(self) -> int:
        return sum(1 for r in self.rows if r.status == "error")

    @property
    def skipped(self) -> int:
        return sum(1 for r in self.rows if r.status == "skipped")

    @property
    def ok(self) -> bool:
        return self.errors == 0 and self.mismatches == 0


def reconstruct_fan(row: TableRow) -> tuple[Fan, str]:
    """Fan of a table row: from its primitive collections when given (and
    consistent), else as the face fan over the convex hull of the rays."""
    if row.rays is None:
        raise ReconstructionError(f"row {row.name} has no ray data")
    if row.collections:
        try:
            return fan_from_primitive_data(list(row.rays), list(row.collections)), "collections"
        except ReconstructionError:
            pass
    return face_fan(list(row.rays)), "hull"


def verify_row(row: TableRow) -> RowResult:
    if not row.explicit:
        return RowResult(row.name, "skipped", reason=row.note or "no ray data")
    res = RowResult(row.name, "ok", expected=row.expected)
    try:
        fan, method = reconstruct_fan(row)
        res.method = method
        rep = validate(fan)
        res.smooth = rep.smooth
        res.complete = rep.complete
        if not (rep.smooth and rep.complete and rep.simplicial):
            res.status = "error"
            res.reason = "fan failed smooth/complete validation"
            return res
        if row.collections and method == "collections":
            got = {c.members for c in primitive_collections(fan)}
            res.collections_roundtrip = got == {tuple(sorted(c)) for c in row.collections}
        verdict = is_fano(fan)
        res.fano = verdict.is_fano
        if not verdict.is_fano:
            res.status = "error"
            res.reason = f"fan is not Fano (witnesses {verdict.witnesses})"
            return res
        res.computed = ch2_dot_surface(fan, row.surface)
        res.match = res.computed == row.expected
        scan = is_2fano(fan)
        res.global_min = scan.minimum
        res.min_witness = scan.witness
        res.two_fano = scan.is_two_fano
        if row.expected is not None:
            if row.expected > 0 and not scan.is_two_fano:
                res.status = "error"
                res.reason = "expected a positive scan"
            if row.expected <= 0 and scan.minimum > 0:
                res.status = "error"
                res.reason = "no nonpositive surface found"
            if scan.minimum > row.expected:
                res.status = "error"
                res.reason = "scan minimum exceeds the reference value"
    except Exception as exc:  # keep the batch running, record the row
        res.status = "error"
        res.reason = f"{type(exc).__name__}: {exc}"
    return res


def verify_table(rows: Optional[list[TableRow]] = None) -> VerificationReport:
    """Verify every row: reconstruct, validate, compare the witness-surface
    value exactly, and run the full surface scan.  Rows without ray data
    are skipped with their tag as the reason; failures do not stop the run."""
    if rows is None:
        rows = load_builtin_table()
    report = VerificationReport()
    by_name = {}
    for row in rows:
        res = verify_row(row)
        report.rows.append(res)
        by_name[row.name] = (row, res)
    for name in sorted(NEF_CH2_NAMES):
        if name not in by_name:
            continue
        row, res = by_name[name]
        entry = RowResult(name, "skipped")
        if not row.explicit:
            entry.reason = "nef check skipped: no ray data to rebuild this row"
        elif res.status != "ok":
            entry.reason = f"nef check skipped: row status {res.status}"
        else:
            entry.status = "ok"
            entry.global_min = res.global_min
            entry.min_witness = res.min_witness
            entry.match = res.global_min is not None and res.global_min >= 0
            entry.reason = "minimum over surfaces is nonnegative" if entry.match else "negative surface found"
        report.nef_checks.append(entry)
    return report
