"""Exact arithmetic in Q[u]/(P) with certified signs.

Elements of the number field are polynomials in the defining root u with
rational coefficients, reduced modulo the defining polynomial P.  The root
is pinned by a rational isolating interval; every sign query is decided by
exact Sturm-sequence root counting and rational interval evaluation — no
floating point is consulted anywhere in this module.
"""

from __future__ import annotations

from fractions import Fraction


def _strip(poly: list[Fraction]) -> list[Fraction]:
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _strip(out)


def _poly_divmod(num, den):
    num = list(num)
    den = _strip(list(den))
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(num) - len(den) + 1)
    inv = 1 / den[-1]
    for k in range(len(num) - len(den), -1, -1):
        c = num[k + len(den) - 1] * inv
        if c:
            q[k] = c
            for j, y in enumerate(den):
                num[k + j] -= c * y
    return _strip(q), _strip(num)


def _poly_gcd(a, b):
    a, b = _strip(list(a)), _strip(list(b))
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    if a:
        lead = a[-1]
        a = [c / lead for c in a]
    return a


def _derivative(poly):
    return _strip([poly[i] * i for i in range(1, len(poly))])


def _eval_fraction(poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(poly):
        acc = acc * x + c
    return acc


def _eval_interval(poly, lo: Fraction, hi: Fraction):
    """Horner over rational interval arithmetic; returns (low, high)."""
    alo, ahi = Fraction(0), Fraction(0)
    for c in reversed(poly):
        cands = (alo * lo, alo * hi, ahi * lo, ahi * hi)
        alo, ahi = min(cands) + c, max(cands) + c
    return alo, ahi


def sturm_sequence(poly):
    """Sturm chain of the squarefree part; input rational ascending coeffs."""
    p = _strip([Fraction(c) for c in poly])
    if len(p) <= 1:
        return [p] if p else []
    g = _poly_gcd(p, _derivative(p))
    if len(g) > 1:
        p, _ = _poly_divmod(p, g)
    chain = [p, _derivative(p)]
    while chain[-1]:
        _, r = _poly_divmod(chain[-2], chain[-1])
        chain.append([-c for c in r])
    chain.pop()
    return chain


def _sign_changes(chain, x: Fraction) -> int:
    signs = []
    for p in chain:
        v = _eval_fraction(p, x)
        if v:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_real_roots(poly, lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in (lo, hi], by Sturm's theorem."""
    if lo >= hi:
        raise ValueError("empty interval")
    chain = sturm_sequence(poly)
    if not chain or len(chain[0]) <= 1:
        return 0
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


class NumberField:
    """Q[u]/(P) for a defining polynomial P with one root isolated.

    ``minpoly_coeffs`` is an ascending integer-coefficient list and
    ``root_interval`` a rational (lo, hi) containing exactly one real root
    of P — verified here by Sturm counting.
    """

    __slots__ = ("_coeffs", "_interval", "_chain", "_reduction", "_degree")

    def __init__(self, minpoly_coeffs, root_interval):
        coeffs = [Fraction(int(c)) for c in minpoly_coeffs]
        coeffs = _strip(coeffs)
        if len(coeffs) < 2:
            raise ValueError("defining polynomial must have degree >= 1")
        lo, hi = Fraction(root_interval[0]), Fraction(root_interval[1])
        if not lo < hi:
            raise ValueError("root interval is empty")
        chain = sturm_sequence(coeffs)
        n = _sign_changes(chain, lo) - _sign_changes(chain, hi)
        if n != 1:
            raise ValueError(f"interval isolates {n} roots, need exactly 1")
        if _eval_fraction(coeffs, lo) == 0 or _eval_fraction(coeffs, hi) == 0:
            raise ValueError("interval endpoint is a root; shrink it")
        self._coeffs = tuple(coeffs)
        self._interval = (lo, hi)
        self._chain = chain
        d = len(coeffs) - 1
        self._degree = d
        # rows expressing u^d .. u^(2d-2) in the power basis 1..u^(d-1)
        lead = coeffs[-1]
        base = [-c / lead for c in coeffs[:-1]]
        rows = [base]
        for _ in range(d - 2):
            prev = rows[-1]
            shifted = [Fraction(0)] + prev[:-1]
            top = prev[-1]
            rows.append([s + top * b for s, b in zip(shifted, base)])
        self._reduction = tuple(tuple(r) for r in rows)

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def minpoly_coeffs(self) -> tuple:
        return self._coeffs

    @property
    def root_interval(self):
        return self._interval

    def element(self, coeffs) -> "FieldElement":
        c = [Fraction(v) for v in coeffs]
        if len(c) > self._degree:
            c = self._reduce_long(c)
        c += [Fraction(0)] * (self._degree - len(c))
        return FieldElement(self, tuple(c))

    def zero(self) -> "FieldElement":
        return self.element([])

    def one(self) -> "FieldElement":
        return self.element([1])

    def generator(self) -> "FieldElement":
        if self._degree == 1:
            lo, hi = self._interval
            c0, c1 = self._coeffs
            return self.element([-c0 / c1])
        return self.element([0, 1])

    def _reduce_long(self, coeffs):
        d = self._degree
        out = list(coeffs[:d]) + [Fraction(0)] * max(0, d - len(coeffs))
        for k in range(d, len(coeffs)):
            c = coeffs[k]
            if c:
                row = self._reduction[k - d]
                for i in range(d):
                    out[i] += c * row[i]
        return out[:d]

    def shrink_interval(self):
        """Halve the isolating interval, keeping the root inside."""
        lo, hi = self._interval
        mid = (lo + hi) / 2
        if _eval_fraction(list(self._coeffs), mid) == 0:
            # nudge the split point off the root
            mid = (lo + mid) / 2
        if _sign_changes(self._chain, lo) - _sign_changes(self._chain, mid) == 1:
            self._interval = (lo, mid)
        else:
            self._interval = (mid, hi)

    def sign_of(self, elem: "FieldElement") -> int:
        """Exact sign of elem evaluated at the isolated root: -1, 0, or +1.

        A nontrivial common factor with the defining polynomial that has a
        root in the isolating interval proves the element vanishes exactly;
        otherwise interval evaluation with bisection terminates.
        """
        if elem.field is not self:
            raise ValueError("element from a different field")
        poly = _strip(list(elem.coeffs))
        if not poly:
            return 0
        g = _poly_gcd(poly, list(self._coeffs))
        if len(g) > 1:
            lo, hi = self._interval
            if count_real_roots(g, lo, hi) > 0:
                return 0
            # common factor exists but its roots lie elsewhere; fall through
        for _ in range(20000):
            lo, hi = self._interval
            vlo, vhi = _eval_interval(poly, lo, hi)
            if vlo > 0:
                return 1
            if vhi < 0:
                return -1
            self.shrink_interval()
        raise RuntimeError("sign determination did not terminate")

    def __repr__(self):
        return f"NumberField(degree={self._degree}, interval={self._interval})"


class FieldElement:
    """Polynomial in the field generator, coefficients ascending rationals."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: tuple):
        self.field = field
        self.coeffs = coeffs

    def _lift(self, other):
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise ValueError("elements from different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.element([other])
        return NotImplemented

    def __add__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return FieldElement(self.field,
                            tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return FieldElement(self.field,
                            tuple(a - b for a, b in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            return FieldElement(self.field, tuple(a * f for a in self.coeffs))
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        prod = _poly_mul(list(self.coeffs), list(o.coeffs))
        return self.field.element(prod)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers not supported")
        out = self.field.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field.element([other])
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.field is other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def sign(self) -> int:
        return self.field.sign_of(self)

    def __repr__(self):
        return f"FieldElement{self.coeffs}"


class ExactGram:
    """N x N Gram matrix with entries in one number field."""

    __slots__ = ("field", "entries")

    def __init__(self, field: NumberField, entries):
        rows = tuple(tuple(e for e in row) for row in entries)
        size = len(rows)
        if any(len(r) != size for r in rows):
            raise ValueError("entries must form a square matrix")
        for row in rows:
            for e in row:
                if not isinstance(e, FieldElement) or e.field is not field:
                    raise ValueError("entries must belong to the given field")
        self.field = field
        self.entries = rows

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __repr__(self):
        return f"ExactGram(size={self.size}, field_degree={self.field.degree})"
