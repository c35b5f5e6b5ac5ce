"""Integral LLL lattice basis reduction.

Exact-integer variant tracking the Gram-Schmidt data as integers: d[i] is
the determinant of the Gram matrix of the first i rows and lam[i][j] is the
Gram-Schmidt coefficient mu[i][j] scaled by d[j+1].  Divisions below are
exact by construction.  The swap condition uses delta = 99/100, stricter
than the classical 3/4, so reduced bases carry the approximation factor
(1/0.74)^(k-1) used by relation certificates downstream.
"""

from __future__ import annotations

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    def mpz(x):
        return x

DELTA_NUM = 99
DELTA_DEN = 100


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _redi(b, lam, d, k, l):
    """Size-reduce row k against row l (|2 lam[k][l]| <= d[l+1] after)."""
    two = 2 * lam[k][l]
    dl = d[l + 1]
    if abs(two) > dl:
        q = (two + dl) // (2 * dl)
        bl = b[l]
        b[k] = [x - q * y for x, y in zip(b[k], bl)]
        lam[k][l] -= q * dl
        laml = lam[l]
        lamk = lam[k]
        for i in range(l):
            lamk[i] -= q * laml[i]


def _swapi(b, lam, d, k, n):
    """Exchange rows k-1 and k, updating the integral Gram-Schmidt data."""
    b[k], b[k - 1] = b[k - 1], b[k]
    for j in range(k - 1):
        lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
    lbar = lam[k][k - 1]
    bnew = (d[k - 1] * d[k + 1] + lbar * lbar) // d[k]
    for i in range(k + 1, n):
        t = lam[i][k]
        lam[i][k] = (d[k + 1] * lam[i][k - 1] - lbar * t) // d[k]
        lam[i][k - 1] = (bnew * t + lbar * lam[i][k]) // d[k + 1]
    d[k] = bnew


def lll_reduce(rows) -> list[list[int]]:
    """Reduce an independent integer basis; returns new rows, same lattice.

    Raises ValueError when the rows are linearly dependent (a Gram
    determinant vanishes).
    """
    n = len(rows)
    if n == 0:
        return []
    b = [[mpz(int(x)) for x in row] for row in rows]
    width = len(b[0])
    if any(len(row) != width for row in b):
        raise ValueError("ragged basis rows")
    d = [mpz(1)] * (n + 1)
    lam = [[mpz(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            u = _dot(b[i], b[j])
            for l in range(j):
                u = (d[l + 1] * u - lam[i][l] * lam[j][l]) // d[l]
            if j < i:
                lam[i][j] = u
            elif u > 0:
                d[i + 1] = u
            else:
                raise ValueError("rows are linearly dependent")
    k = 1
    while k < n:
        _redi(b, lam, d, k, k - 1)
        lk = lam[k][k - 1]
        if DELTA_DEN * d[k + 1] * d[k - 1] < DELTA_NUM * d[k] * d[k] - DELTA_DEN * lk * lk:
            _swapi(b, lam, d, k, n)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                _redi(b, lam, d, k, l)
            k += 1
    return [[int(x) for x in row] for row in b]
