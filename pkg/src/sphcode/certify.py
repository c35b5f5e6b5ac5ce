"""Exact certification that a candidate Gram matrix is realizable.

A matrix G with entries in Q[u]/(P) is the Gram matrix of N points on
S^(n-1) iff it is symmetric with unit diagonal, has rank at most n, and is
positive semidefinite.  Rank and PSD-ness are read off the characteristic
polynomial det(lambda*I - G): the low-order coefficients a_0..a_(N-n-1)
must vanish exactly and the remaining ones must be nonzero with strictly
alternating signs.  Everything here is exact rational arithmetic; signs of
field elements are decided by Sturm bisection, never by floating point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf

from .algebraic import IntPolynomial, exact_gram, minimal_polynomial
from .catalogue import CatalogueRow, format_u
from .fields import ExactGram, FieldElement, NumberField
from .refine import PrecisionCode, precision_max_cosine

__all__ = [
    "Certificate", "FieldElement", "ExactGram", "NumberField",
    "field_arithmetic", "char_poly", "coefficient_sign", "check_conditions",
    "certify_pipeline", "element_to_mpf", "write_certificate_file",
]


def field_arithmetic(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Exact add/sub/mul of two elements sharing one field context."""
    if not isinstance(a, FieldElement) or not isinstance(b, FieldElement):
        raise ValueError("operands must be field elements")
    if a.field is not b.field:
        raise ValueError("operands belong to different fields")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def char_poly(gram: ExactGram) -> list[FieldElement]:
    """Coefficients of det(lambda*I - G), ascending, via Faddeev-LeVerrier.

    The recurrence M_1 = G, c_(N-1) = -tr(M_1), M_k = G (M_(k-1) +
    c_(N-k+1) I), c_(N-k) = -tr(M_k)/k is division-free except for exact
    division by the step index.  Leading coefficient is exactly 1.
    """
    field = gram.field
    n = gram.size
    zero = field.zero()
    one = field.one()
    g = gram.entries

    def mat_mul(a, b):
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = zero
                for k in range(n):
                    aik = a[i][k]
                    bkj = b[k][j]
                    if not (aik.is_zero() or bkj.is_zero()):
                        acc = acc + aik * bkj
                row.append(acc)
            out.append(row)
        return out

    def trace(a):
        acc = zero
        for i in range(n):
            acc = acc + a[i][i]
        return acc

    coeffs = [zero] * (n + 1)
    coeffs[n] = one
    m = [list(row) for row in g]
    c = trace(m) * Fraction(-1)
    coeffs[n - 1] = c
    for k in range(2, n + 1):
        shifted = [[m[i][j] + c if i == j else m[i][j] for j in range(n)]
                   for i in range(n)]
        m = mat_mul(g, shifted)
        c = trace(m) * Fraction(-1, k)
        coeffs[n - k] = c
    return coeffs


def coefficient_sign(c: FieldElement) -> str:
    """Exact sign of the element at the field's isolated root."""
    s = c.field.sign_of(c)
    return {-1: "negative", 0: "zero", 1: "positive"}[s]


@dataclass(frozen=True)
class Certificate:
    """Outcome of the four Gram-matrix conditions, with evidence."""

    symmetric: bool
    unit_diagonal: bool
    rank_at_most_n: bool
    vanishing_count: int
    psd: bool
    sign_pattern: tuple[str, ...]
    verdict: str
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        expected = "pass" if (self.symmetric and self.unit_diagonal
                              and self.rank_at_most_n and self.psd) else "fail"
        if self.verdict != expected:
            raise ValueError("verdict inconsistent with condition flags")


def check_conditions(gram: ExactGram, n: int) -> Certificate:
    """Run all four exact conditions on an N-point candidate in dimension n."""
    size = gram.size
    if not 1 <= n < size:
        raise ValueError(f"ambient dimension {n} must be in [1, {size})")
    notes: list[str] = []
    e = gram.entries
    symmetric = all(e[i][j] == e[j][i]
                    for i in range(size) for j in range(i + 1, size))
    if not symmetric:
        notes.append("symmetry violated")
    one = gram.field.one()
    unit_diag = all(e[i][i] == one for i in range(size))
    if not unit_diag:
        notes.append("diagonal not identically 1")
    coeffs = char_poly(gram)
    vanish = 0
    for c in coeffs:
        if c.is_zero():
            vanish += 1
        else:
            break
    rank_ok = vanish >= size - n
    if not rank_ok:
        notes.append(f"only {vanish} leading coefficients vanish, "
                     f"need {size - n} for rank <= {n}")
    signs = tuple(coefficient_sign(coeffs[k]) for k in range(size - n, size + 1))
    psd = True
    if any(s == "zero" for s in signs):
        psd = False
        notes.append("zero coefficient in the sign tail; the configuration "
                     "may span fewer dimensions than claimed")
    else:
        for a, b in zip(signs, signs[1:]):
            if a == b:
                psd = False
                notes.append("sign tail does not alternate")
                break
    verdict = "pass" if (symmetric and unit_diag and rank_ok and psd) else "fail"
    return Certificate(symmetric=symmetric, unit_diagonal=unit_diag,
                       rank_at_most_n=rank_ok, vanishing_count=vanish,
                       psd=psd, sign_pattern=signs, verdict=verdict,
                       notes=tuple(notes))


def element_to_mpf(elem: FieldElement, u) -> mpf:
    """Numeric evaluation of a field element at a decimal root value."""
    acc = mpf(0)
    for c in reversed(elem.coeffs):
        acc = acc * u + mpf(c.numerator) / c.denominator
    return acc


def _failed_certificate(note: str) -> Certificate:
    return Certificate(symmetric=False, unit_diagonal=False,
                       rank_at_most_n=False, vanishing_count=0,
                       psd=False, sign_pattern=(), verdict="fail",
                       notes=(note,))


def certify_pipeline(code: PrecisionCode, n: int, max_degree: int,
                     precision: int = 400, return_gram: bool = False):
    """Recover the exact structure of a refined code and certify it.

    Chains minimal-polynomial recovery of the maximal inner product, exact
    Gram reconstruction, and the four-condition check.  Failures become
    statuses on the returned row (verified=False), never exceptions.
    Returns (certificate, row); with return_gram=True the reconstructed
    ExactGram (or None if reconstruction failed) is appended.
    """
    def emit(cert, row, gram=None):
        return (cert, row, gram) if return_gram else (cert, row)

    with mp.workdps(code.precision + 10):
        u = precision_max_cosine(code)
        u20 = format_u(u)
    poly = minimal_polynomial(u, max_degree, precision=precision)
    if poly is None:
        row = CatalogueRow(dim=code.dim, count=code.count, u_decimal=u20,
                           polynomial=None, verified=False, tag="pipeline")
        return emit(_failed_certificate("no minimal polynomial found"), row)
    gram = exact_gram(code, u, poly, precision=precision)
    if not isinstance(gram, ExactGram):
        row = CatalogueRow(dim=code.dim, count=code.count, u_decimal=u20,
                           polynomial=poly, verified=False, tag="pipeline")
        note = (f"{len(gram.unexpressed)} Gram value(s) not expressible "
                "in the candidate field")
        return emit(_failed_certificate(note), row)
    cert = check_conditions(gram, n)
    row = CatalogueRow(dim=code.dim, count=code.count, u_decimal=u20,
                       polynomial=poly, verified=(cert.verdict == "pass"),
                       tag="pipeline")
    return emit(cert, row, gram)


def write_certificate_file(path, cert: Certificate,
                           gram: ExactGram | None = None) -> None:
    """Stable JSON rendering of a certificate (plus field data if given)."""
    payload = {
        "symmetric": cert.symmetric,
        "unit_diagonal": cert.unit_diagonal,
        "rank_at_most_n": cert.rank_at_most_n,
        "vanishing_count": cert.vanishing_count,
        "psd": cert.psd,
        "sign_pattern": list(cert.sign_pattern),
        "verdict": cert.verdict,
        "notes": list(cert.notes),
    }
    if gram is not None:
        field = gram.field
        lo, hi = field.root_interval
        payload["minimal_polynomial"] = str(
            IntPolynomial(field.minpoly_coeffs))
        payload["minimal_polynomial_coefficients"] = [
            int(c) for c in field.minpoly_coeffs]
        payload["root_interval"] = [f"{lo.numerator}/{lo.denominator}",
                                    f"{hi.numerator}/{hi.denominator}"]
        payload["size"] = gram.size
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
