"""Recovery of exact algebraic data from high-precision decimals.

Integer relations are detected by LLL reduction of the standard relation
lattice (identity block plus one column of values scaled by 10^precision).
A candidate relation is accepted only when its residual sits at the
arithmetic-noise floor, an l1-scaled margin below the scaling precision;
balanced reduction vectors of relation-free lattices miss that margin by
construction, which is what protects the ascending minimal-polynomial
search from plausible-looking junk.  Inputs should therefore carry at
least precision + 20 correct digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf
from sympy import QQ, Poly, Symbol

from .fields import ExactGram, NumberField
from .refine import PrecisionCode

DEFAULT_PRECISION = 400
DEFAULT_COEFF_BOUND = 10**30

# squared LLL approximation factor per dimension at delta = 99/100
_APPROX_FACTOR = 1.0 / 0.74


class IntPolynomial:
    """Integer-coefficient polynomial, ascending degree, normalized:
    content 1 and positive leading coefficient."""

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients):
        c = [int(v) for v in coefficients]
        while c and c[-1] == 0:
            c.pop()
        if not c:
            raise ValueError("zero polynomial")
        g = 0
        for v in c:
            g = math.gcd(g, abs(v))
        c = [v // g for v in c]
        if c[-1] < 0:
            c = [-v for v in c]
        self._coeffs = tuple(c)

    @property
    def coefficients(self) -> tuple[int, ...]:
        return self._coeffs

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self._coeffs):
            acc = acc * x + c
        return acc

    def derivative_at(self, x):
        acc = 0 * x
        for i in range(len(self._coeffs) - 1, 0, -1):
            acc = acc * x + i * self._coeffs[i]
        return acc

    def __eq__(self, other):
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(self._coeffs)

    def __str__(self):
        terms = []
        for k in range(self.degree, -1, -1):
            c = self._coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else ("+" if terms else "")
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                var = "u" if k == 1 else f"u^{k}"
                body = var if mag == 1 else f"{mag}{var}"
            terms.append(sign + body)
        return "".join(terms) or "0"

    def __repr__(self):
        return f"IntPolynomial({list(self._coeffs)})"


class FieldPolynomial:
    """Rational-coefficient polynomial in the primitive element, ascending."""

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients):
        c = [Fraction(v) for v in coefficients]
        while c and c[-1] == 0:
            c.pop()
        self._coeffs = tuple(c)

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._coeffs

    @property
    def degree(self) -> int:
        return len(self._coeffs) - 1

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self._coeffs):
            acc = acc * x + c
        return acc

    def evaluate_mpf(self, x):
        acc = mpf(0)
        for c in reversed(self._coeffs):
            acc = acc * x + mpf(c.numerator) / c.denominator
        return acc

    def __eq__(self, other):
        if not isinstance(other, FieldPolynomial):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self):
        return hash(self._coeffs)

    def __str__(self):
        if not self._coeffs:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self._coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else ("+" if terms else "")
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                var = "u" if k == 1 else f"u^{k}"
                body = var if mag == 1 else f"{mag}{var}"
            terms.append(sign + body)
        return "".join(terms)

    def __repr__(self):
        return f"FieldPolynomial({[str(c) for c in self._coeffs]})"


@dataclass(frozen=True)
class RelationResult:
    """Outcome of a relation search: found / none / inconclusive.

    ``none`` means the reduced lattice proves no relation exists within the
    coefficient bound at this precision; ``inconclusive`` means the search
    cannot tell (typically precision too low for the requested bound).
    """

    status: str
    vector: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.status not in ("found", "none", "inconclusive"):
            raise ValueError(f"bad status {self.status!r}")
        if (self.status == "found") != (self.vector is not None):
            raise ValueError("vector must accompany exactly the found status")


def _canonical_relation(vec):
    g = 0
    for v in vec:
        g = math.gcd(g, abs(v))
    out = [v // g for v in vec]
    for v in reversed(out):
        if v:
            if v < 0:
                out = [-w for w in out]
            break
    return tuple(out)


def find_integer_relation(values, precision: int = DEFAULT_PRECISION,
                          coeff_bound: int = DEFAULT_COEFF_BOUND) -> RelationResult:
    """Search for integers m with sum(m_k * values_k) = 0 by lattice reduction.

    Accepts a reduced vector as a relation only if its residual is below
    l1(m) * 10^(-precision-10); an exact relation lands at the noise floor
    of the scaled column and passes, while the shortest vectors of
    relation-free lattices sit near l1(m) * 10^(-precision) and fail.
    """
    from .lll import lll_reduce

    if not values:
        raise ValueError("values must be nonempty")
    if precision < 50:
        raise ValueError("precision must be at least 50")
    k = len(values)
    with mp.workdps(precision + 60):
        vals = [mpf(v) for v in values]
        scale = mpf(10) ** precision
        col = [int(mp.nint(v * scale)) for v in vals]
        rows = [[1 if j == i else 0 for j in range(k)] + [col[i]]
                for i in range(k)]
        reduced = lll_reduce(rows)
        accept = mpf(10) ** (-(precision + 10))
        ranked = sorted(reduced, key=lambda r: sum(x * x for x in r))
        for row in ranked:
            m = row[:-1]
            if not any(m):
                continue
            if max(abs(v) for v in m) > coeff_bound:
                continue
            residual = abs(mp.fsum(mi * vi for mi, vi in zip(m, vals)))
            l1 = sum(abs(v) for v in m)
            if residual < l1 * accept:
                return RelationResult("found", _canonical_relation(m))
        # certificate: any true relation within the bound would produce a
        # lattice vector of norm <= coeff_bound * k; LLL guarantees the
        # first reduced vector is within (1/0.74)^((k-1)/2) of the minimum
        b1 = reduced[0]
        norm_sq = sum(x * x for x in b1)
        log10_norm = 0.5 * (norm_sq.bit_length() - 1) * math.log10(2.0)
        log10_lam1_lb = log10_norm - ((k - 1) / 2.0) * math.log10(_APPROX_FACTOR)
        if log10_lam1_lb > math.log10(float(coeff_bound)) + math.log10(k) + 1:
            return RelationResult("none")
        return RelationResult("inconclusive")


_X = Symbol("x")


def _is_irreducible(coeffs) -> bool:
    """Irreducibility over Q via full rational factorization."""
    p = Poly(list(reversed([int(c) for c in coeffs])), _X, domain=QQ)
    if p.degree() < 1:
        return False
    if p.degree() == 1:
        return True
    _, factors = p.factor_list()
    parts = [(f, e) for f, e in factors if f.degree() >= 1]
    return len(parts) == 1 and parts[0][1] == 1 and parts[0][0].degree() == p.degree()


def minimal_polynomial(value, max_degree: int,
                       precision: int = DEFAULT_PRECISION,
                       coeff_bound: int = DEFAULT_COEFF_BOUND) -> IntPolynomial | None:
    """Lowest-degree irreducible integer polynomial nearly vanishing at value.

    Ascending-degree search over relation lattices on [1, v, ..., v^d]; the
    first irreducible hit whose Newton quotient |P(v)/P'(v)| is below
    10^(-precision/2) wins.  Returns None when no candidate survives — the
    caller records the value as unresolved.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    with mp.workdps(precision + 60):
        v = mpf(value)
        powers = [mpf(1)]
        for d in range(1, max_degree + 1):
            powers.append(powers[-1] * v)
            rel = find_integer_relation(powers, precision, coeff_bound)
            if rel.status != "found":
                continue
            poly = IntPolynomial(rel.vector)
            if poly.degree < 1:
                continue
            if not _is_irreducible(poly.coefficients):
                continue
            pv = poly(v)
            dv = poly.derivative_at(v)
            if dv == 0:
                continue
            if abs(pv / dv) < mpf(10) ** (-precision // 2):
                return poly
    return None


def express_in_field(value, u_value, minpoly: IntPolynomial,
                     precision: int = DEFAULT_PRECISION,
                     coeff_bound: int = DEFAULT_COEFF_BOUND) -> FieldPolynomial | None:
    """Write value as a rational polynomial in u of degree < deg(minpoly).

    Runs the relation search on [value, 1, u, ..., u^(d-1)]; a relation
    with nonzero leading entry m0 yields value = -(1/m0) * sum m_k u^(k-1).
    Returns None when no such relation is found, signalling that u does not
    generate the value at this precision/bound.
    """
    d = minpoly.degree
    with mp.workdps(precision + 60):
        u = mpf(u_value)
        vals = [mpf(value), mpf(1)]
        p = mpf(1)
        for _ in range(1, d):
            p = p * u
            vals.append(p)
        rel = find_integer_relation(vals, precision, coeff_bound)
        if rel.status != "found" or rel.vector[0] == 0:
            return None
        m0 = rel.vector[0]
        coeffs = [Fraction(-mk, m0) for mk in rel.vector[1:]]
        out = FieldPolynomial(coeffs)
        check = abs(out.evaluate_mpf(u) - mpf(value))
        if check > mpf(10) ** (-precision // 2):
            return None
        return out


@dataclass(frozen=True)
class ExactGramFailure:
    """Entries that could not be expressed in the candidate field."""

    unexpressed: tuple[tuple[int, int, str], ...]

    def __bool__(self):
        return False


def _isolating_interval(u_value, digits: int = 40):
    """Small rational interval around a decimal approximation."""
    with mp.workdps(digits + 20):
        u = mpf(u_value)
        q = 10**digits
        p = int(mp.floor(u * q))
        return (Fraction(p - 2, q), Fraction(p + 2, q))


def exact_gram(code: PrecisionCode, u_value, minpoly: IntPolynomial,
               precision: int = DEFAULT_PRECISION):
    """Express every Gram entry of a refined code in Q[u]/(minpoly).

    Entries agreeing to 10^(-digits/2) share one expression.  Returns an
    ExactGram on success, otherwise an ExactGramFailure listing a decimal
    rendering of each inexpressible entry value.
    """
    digits = code.precision
    pts = code.points
    n = code.count
    with mp.workdps(digits + 10):
        u = mpf(u_value)
        tol = mpf(10) ** (-(digits // 2))
        values = []
        assign = {}
        reps: list = []
        for i in range(n):
            for j in range(i + 1, n):
                g = mp.fsum(a * b for a, b in zip(pts[i], pts[j]))
                hit = None
                for idx, r in enumerate(reps):
                    if abs(g - r) < tol:
                        hit = idx
                        break
                if hit is None:
                    reps.append(g)
                    hit = len(reps) - 1
                assign[(i, j)] = hit
        exprs: list[FieldPolynomial | None] = []
        for r in reps:
            exprs.append(express_in_field(r, u, minpoly, precision))
        bad = []
        for idx, e in enumerate(exprs):
            if e is None:
                pair = next(p for p, a in assign.items() if a == idx)
                bad.append((pair[0], pair[1], mp.nstr(reps[idx], 30)))
        if bad:
            return ExactGramFailure(tuple(bad))
        field = NumberField(minpoly.coefficients, _isolating_interval(u))
        one = field.one()
        elems = [field.element(e.coefficients) for e in exprs]
        entries = [[one if i == j else elems[assign[(min(i, j), max(i, j))]]
                    for j in range(n)] for i in range(n)]
    return ExactGram(field, entries)


def write_polynomial_file(path, poly: IntPolynomial) -> None:
    """Single line of space-separated integer coefficients, ascending."""
    with open(path, "w") as fh:
        fh.write(" ".join(str(c) for c in poly.coefficients) + "\n")


def read_polynomial_file(path) -> IntPolynomial:
    with open(path) as fh:
        data = fh.read().split()
    if not data:
        raise ValueError(f"{path}: empty polynomial file")
    return IntPolynomial([int(v) for v in data])


def write_exact_gram_file(path, gram: ExactGram) -> None:
    """Header: N, defining polynomial, 50-digit root approximation; then
    N*N lines of ascending rational coefficients `p0/q0 p1/q1 ...`."""
    field = gram.field
    lo, hi = field.root_interval
    with mp.workdps(80):
        mid = (mpf(lo.numerator) / lo.denominator +
               mpf(hi.numerator) / hi.denominator) / 2
        approx = mp.nstr(mid, 50)
    lines = [str(gram.size),
             " ".join(str(int(c)) for c in field.minpoly_coeffs),
             approx]
    d = field.degree
    for row in gram.entries:
        for e in row:
            cs = list(e.coeffs) + [Fraction(0)] * (d - len(e.coeffs))
            lines.append(" ".join(f"{c.numerator}/{c.denominator}" for c in cs))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_exact_gram_file(path) -> ExactGram:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    size = int(lines[0])
    coeffs = [int(v) for v in lines[1].split()]
    approx = lines[2]
    interval = _isolating_interval(approx)
    field = NumberField(coeffs, interval)
    body = lines[3:]
    if len(body) != size * size:
        raise ValueError(f"{path}: expected {size * size} entry lines")
    entries = []
    pos = 0
    for _ in range(size):
        row = []
        for _ in range(size):
            row.append(field.element([Fraction(t) for t in body[pos].split()]))
            pos += 1
        entries.append(row)
    return ExactGram(field, entries)
