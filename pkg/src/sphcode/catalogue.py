"""Reference catalogue of best-known codes: loading, comparison, rendering.

The packaged data file records, for each (dimension, point count), the
best-known maximal inner product u to 20 decimal places, the minimal
polynomial of u where one is known, whether the entry has been certified
by an exact Gram matrix, and a literature tag.  Loading re-derives every
polynomial's root and checks it against the decimal entry, so a
transcription error in either column cannot survive unnoticed.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from functools import lru_cache
from importlib import resources

from mpmath import mp

from .algebraic import IntPolynomial

#: Load-time invariant: each polynomial has a real root within this distance
#: of the recorded 20-place decimal (checked with 40-digit arithmetic).
ROOT_TOLERANCE = "1e-19"

#: Two u values closer than this are reported as equal by :func:`compare`;
#: 18 digits rather than 20 so that last-place rounding cannot fabricate an
#: improvement or a regression.
COMPARISON_TOLERANCE = "1e-18"

_U_FORMAT = re.compile(r"-?\d\.\d{20}$")
_UNVERIFIED_MARK = " *"
_FOOTNOTE = "* not certified by an exact Gram matrix"


@dataclass(frozen=True)
class CatalogueRow:
    """One catalogue entry: the best-known u for `count` points in R^dim."""

    dim: int
    count: int
    u_decimal: str
    polynomial: IntPolynomial | None
    verified: bool
    tag: str

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dimension must be at least 2, got {self.dim}")
        if self.count < 2:
            raise ValueError(f"count must be at least 2, got {self.count}")
        if not _U_FORMAT.match(self.u_decimal):
            raise ValueError(
                f"u_decimal must have exactly 20 decimal places, "
                f"got {self.u_decimal!r}")
        if not self.tag or any(ch.isspace() for ch in self.tag):
            raise ValueError(f"tag must be non-empty without spaces, "
                             f"got {self.tag!r}")


def format_u(value, places: int = 20) -> str:
    """Decimal string of `value` with exactly `places` digits after the point."""
    with mp.workdps(max(mp.dps, places + 15)):
        s = mp.nstr(mp.mpf(value), places + 10, strip_zeros=False)
    q = Decimal(s).quantize(Decimal(1).scaleb(-places),
                            rounding=ROUND_HALF_EVEN)
    return str(q)


_TERM = re.compile(r"([+-]?)(?:(\d*)u(?:\^(\d+))?|(\d+))")


def parse_polynomial(text: str) -> IntPolynomial:
    """Parse a rendered polynomial like ``3u^2+u-1`` (descending powers)."""
    coeffs: dict[int, int] = {}
    pos = 0
    for m in _TERM.finditer(text):
        if m.start() != pos:
            break
        pos = m.end()
        sign = -1 if m.group(1) == "-" else 1
        if m.group(4) is not None:
            power, mag = 0, int(m.group(4))
        else:
            mag = int(m.group(2)) if m.group(2) else 1
            power = int(m.group(3)) if m.group(3) else 1
        coeffs[power] = coeffs.get(power, 0) + sign * mag
    if pos != len(text) or not coeffs:
        raise ValueError(f"malformed polynomial: {text!r}")
    ascending = [coeffs.get(k, 0) for k in range(max(coeffs) + 1)]
    return IntPolynomial(ascending)


def format_row_line(row: CatalogueRow) -> str:
    """Render a row in the one-line data-file format."""
    poly = ("?" if row.polynomial is None
            else ",".join(str(c) for c in row.polynomial.coefficients))
    verified = "true" if row.verified else "false"
    return f"{row.dim} {row.count} {row.u_decimal} {poly} {verified} {row.tag}"


def parse_row_line(line: str) -> CatalogueRow:
    """Parse one data-file line ``dim count u polynomial verified tag``."""
    parts = line.split()
    if len(parts) != 6:
        raise ValueError(f"expected 6 fields, got {len(parts)}: {line!r}")
    dim, count, u_decimal, poly_text, verified_text, tag = parts
    if poly_text == "?":
        poly = None
    else:
        poly = IntPolynomial(int(c) for c in poly_text.split(","))
    if verified_text not in ("true", "false"):
        raise ValueError(f"verified flag must be true/false, "
                         f"got {verified_text!r}")
    return CatalogueRow(dim=int(dim), count=int(count), u_decimal=u_decimal,
                        polynomial=poly, verified=(verified_text == "true"),
                        tag=tag)


def write_rows(path, rows) -> None:
    """Write rows to a file, one data-file line each."""
    lines = [format_row_line(r) for r in rows]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_rows(path) -> list[CatalogueRow]:
    """Read rows from a file written by :func:`write_rows`."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                rows.append(parse_row_line(line))
    return rows


def _check_root_proximity(row: CatalogueRow) -> None:
    """Verify the polynomial has a root within ROOT_TOLERANCE of u_decimal."""
    poly = row.polynomial
    assert poly is not None
    with mp.workdps(40):
        u0 = mp.mpf(row.u_decimal)
        r = u0
        for _ in range(12):
            slope = poly.derivative_at(r)
            if slope == 0:
                raise ValueError(
                    f"({row.dim}, {row.count}): stationary point at u; "
                    "cannot verify the root")
            r = r - poly(r) / slope
        if abs(r - u0) > mp.mpf(ROOT_TOLERANCE):
            raise ValueError(
                f"({row.dim}, {row.count}): no root of {poly} within "
                f"{ROOT_TOLERANCE} of {row.u_decimal}")


@lru_cache(maxsize=1)
def load_reference() -> tuple[CatalogueRow, ...]:
    """All reference rows, validated against the root-proximity invariant."""
    text = (resources.files("sphcode") / "data" /
            "reference_codes.txt").read_text(encoding="utf-8")
    rows = []
    seen = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        row = parse_row_line(line)
        key = (row.dim, row.count)
        if key in seen:
            raise ValueError(f"duplicate catalogue entry for {key}")
        seen.add(key)
        if row.polynomial is not None:
            _check_root_proximity(row)
        rows.append(row)
    return tuple(rows)


def reference_row(dim: int, count: int) -> CatalogueRow | None:
    """The reference entry for (dim, count), or None if absent."""
    for row in load_reference():
        if row.dim == dim and row.count == count:
            return row
    return None


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of comparing a found row against the reference."""

    dim: int
    count: int
    classification: str          # "match" | "improvement" | "regression"
    polynomial_equal: bool | None  # None when either side lacks a polynomial
    found_u: str
    reference_u: str

    def __str__(self):
        head = f"({self.dim}, {self.count}): {self.classification}"
        if self.classification != "match":
            head += f" (found {self.found_u}, reference {self.reference_u})"
        if self.polynomial_equal is True:
            return head + "; minimal polynomials agree"
        if self.polynomial_equal is False:
            return head + "; minimal polynomials DIFFER"
        return head + "; polynomial comparison unavailable"


def compare(row_found: CatalogueRow, reference: CatalogueRow) -> ComparisonReport:
    """Classify a found row against the reference for the same (dim, count).

    u values agreeing to 18 decimal places count as a match; otherwise a
    strictly smaller found u is an improvement and a larger one a regression.
    """
    if (row_found.dim, row_found.count) != (reference.dim, reference.count):
        raise ValueError(
            f"cannot compare ({row_found.dim}, {row_found.count}) "
            f"against ({reference.dim}, {reference.count})")
    with mp.workdps(40):
        diff = mp.mpf(row_found.u_decimal) - mp.mpf(reference.u_decimal)
        if abs(diff) < mp.mpf(COMPARISON_TOLERANCE):
            classification = "match"
        elif diff < 0:
            classification = "improvement"
        else:
            classification = "regression"
    if row_found.polynomial is None or reference.polynomial is None:
        poly_equal = None
    else:
        poly_equal = row_found.polynomial == reference.polynomial
    return ComparisonReport(dim=row_found.dim, count=row_found.count,
                            classification=classification,
                            polynomial_equal=poly_equal,
                            found_u=row_found.u_decimal,
                            reference_u=reference.u_decimal)


_TEXT_HEADER = ("N", "u (20 decimal places)", "Minimal Polynomial", "Tag")
_CSV_HEADER = ("dim", "count", "u", "minimal_polynomial", "verified", "tag")


def render_table(rows, dim: int | None = None, fmt: str = "text") -> str:
    """Render rows sharing one dimension as a text or CSV table.

    Text tables carry the dimension on the first line and mark entries that
    are not certified by an exact Gram matrix with ``*``; CSV tables carry
    one fully explicit row per line.  Both round-trip through
    :func:`parse_table`.
    """
    rows = list(rows)
    dims = {r.dim for r in rows}
    if dim is None:
        if len(dims) != 1:
            raise ValueError("rows must share a single dimension; "
                             "pass dim explicitly for an empty table")
        dim = dims.pop()
    elif dims - {dim}:
        raise ValueError(f"rows for dimensions {sorted(dims)} do not all "
                         f"belong to dimension {dim}")
    rows.sort(key=lambda r: r.count)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_CSV_HEADER)
        for r in rows:
            poly = "Unknown" if r.polynomial is None else str(r.polynomial)
            writer.writerow([r.dim, r.count, r.u_decimal, poly,
                             "true" if r.verified else "false", r.tag])
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown table format {fmt!r}")
    cells = []
    for r in rows:
        poly = "Unknown" if r.polynomial is None else str(r.polynomial)
        tag = r.tag + ("" if r.verified else _UNVERIFIED_MARK)
        cells.append((str(r.count), r.u_decimal, poly, tag))
    widths = [max([len(h)] + [len(c[i]) for c in cells])
              for i, h in enumerate(_TEXT_HEADER)]
    out = [f"Dimension {dim}"]
    out.append("  ".join(h.ljust(w) for h, w in zip(_TEXT_HEADER, widths)).rstrip())
    for c in cells:
        out.append("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip())
    if any(not r.verified for r in rows):
        out.append(_FOOTNOTE)
    return "\n".join(out) + "\n"


def parse_table(text: str) -> list[CatalogueRow]:
    """Parse a table produced by :func:`render_table` (either format)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return []
    if lines[0].startswith(_CSV_HEADER[0] + ","):
        rows = []
        for rec in csv.reader(lines[1:]):
            dim, count, u, poly_text, verified, tag = rec
            poly = None if poly_text == "Unknown" else parse_polynomial(poly_text)
            rows.append(CatalogueRow(dim=int(dim), count=int(count),
                                     u_decimal=u, polynomial=poly,
                                     verified=(verified == "true"), tag=tag))
        return rows
    m = re.match(r"Dimension (\d+)$", lines[0])
    if not m:
        raise ValueError("unrecognized table header")
    dim = int(m.group(1))
    rows = []
    for line in lines[2:]:
        if line == _FOOTNOTE:
            continue
        fields = re.split(r"\s{2,}", line.strip())
        if len(fields) != 4:
            raise ValueError(f"malformed table line: {line!r}")
        count, u, poly_text, tag = fields
        verified = not tag.endswith(_UNVERIFIED_MARK.strip())
        if not verified:
            tag = tag[:-len(_UNVERIFIED_MARK.strip())].rstrip()
        poly = None if poly_text == "Unknown" else parse_polynomial(poly_text)
        rows.append(CatalogueRow(dim=dim, count=int(count), u_decimal=u,
                                 polynomial=poly, verified=verified, tag=tag))
    return rows
