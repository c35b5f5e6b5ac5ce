"""Shared fixtures: reference configurations with known exact structure.

The two-layer builders assemble codes whose Gram matrices are known in
closed form, so analysis and certification routines can be checked against
hand-computable answers at any working precision.
"""

from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest
from mpmath import mp

import sphcode as sc

# Lines appended by the acceptance module; echoed in the terminal summary
# so each criterion's verdict is visible under default output capturing.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# ----------------------------------------------------------------------
# classical configurations


def regular_simplex(n: int) -> sc.Code:
    """n+1 unit vectors in R^n with all pairwise cosines -1/n."""
    verts = np.eye(n + 1) - np.full((n + 1, n + 1), 1.0 / (n + 1))
    # Orthonormal basis of the sum-zero hyperplane.
    basis, _ = np.linalg.qr(np.eye(n + 1)[:, :n] - 1.0 / (n + 1))
    pts = verts @ basis
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return sc.Code(pts)


def cross_polytope(n: int) -> sc.Code:
    """The 2n points ±e_1 ... ±e_n."""
    eye = np.eye(n)
    return sc.Code(np.vstack([eye, -eye]))


def icosahedron() -> sc.Code:
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    rows = []
    for a in (1.0, -1.0):
        for b in (phi, -phi):
            rows += [[0.0, a, b], [a, b, 0.0], [b, 0.0, a]]
    pts = np.array(rows)
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return sc.Code(pts)


# ----------------------------------------------------------------------
# two-layer codes with closed-form Gram matrices
#
# Both are unions of two cross polytopes in parallel hyperplanes: layer
# one uses the coordinate axes, layer two a rotated axis frame, and the
# rotation matrix has a single magnitude pattern per row.

# Rows x 11: an orthogonal matrix whose entries all have magnitude
# 2/11, 3/11 or 6/11 (one 2, one 3, three 6s in every row and column).
ORIENT_620 = (
    (2, -6, -6, 3, -6),
    (6, 2, 6, 6, -3),
    (-3, -6, 2, 6, 6),
    (6, 3, -6, 2, 6),
    (6, -6, 3, -6, 2),
)

# Rows x sqrt(5): an orthogonal matrix with one zero and five unit-sized
# entries per row.
ORIENT_724 = (
    (0, 1, -1, -1, 1, 1),
    (1, 0, 1, -1, -1, 1),
    (-1, 1, 0, 1, -1, 1),
    (-1, -1, 1, 0, 1, 1),
    (1, -1, -1, 1, 0, 1),
    (1, 1, 1, 1, 1, 0),
)


def _two_layer_points(k: int, rot_rows, r, h):
    """2k(+-axis) points at height h and 2k rotated points at height -h."""
    pts = []
    for i in range(k):
        for s in (1, -1):
            v = [mp.mpf(0)] * (k + 1)
            v[i] = s * r
            v[k] = h
            pts.append(v)
    for row in rot_rows:
        for s in (1, -1):
            v = [s * r * c for c in row] + [-h]
            pts.append(v)
    return pts


@lru_cache(maxsize=None)
def synthetic_620(precision: int = 120) -> sc.PrecisionCode:
    """20 points in R^6: two 5-dimensional cross polytopes at heights
    +-sqrt(3/14), the lower one rotated by ORIENT_620/11.  Every pairwise
    cosine is a multiple of 1/14 and the maximal one is 3/14."""
    with mp.workdps(precision + 20):
        h = mp.sqrt(mp.mpf(3) / 14)
        r = mp.sqrt(mp.mpf(11) / 14)
        rows = [[mp.mpf(c) / 11 for c in row] for row in ORIENT_620]
        pts = _two_layer_points(5, rows, r, h)
    return sc.PrecisionCode(pts, precision)


@lru_cache(maxsize=None)
def synthetic_724(precision: int = 120) -> sc.PrecisionCode:
    """24 points in R^7: two 6-dimensional cross polytopes at heights
    +-sqrt(u) with u the positive root of 19u^2+2u-1, the lower one
    rotated by ORIENT_724/sqrt(5).  Cosines are u, -u, -3u and 2u-1."""
    with mp.workdps(precision + 20):
        u = (-1 + 2 * mp.sqrt(5)) / 19
        h = mp.sqrt(u)
        r = mp.sqrt(1 - u)
        s5 = mp.sqrt(5)
        rows = [[mp.mpf(c) / s5 for c in row] for row in ORIENT_724]
        pts = _two_layer_points(6, rows, r, h)
    return sc.PrecisionCode(pts, precision)


U_724_DECIMAL = "0.18274399763155681015"


# ----------------------------------------------------------------------
# exact Gram matrices for the two-layer codes


@lru_cache(maxsize=None)
def field_620() -> sc.NumberField:
    """Degree-1 field whose generator is the rational 3/14."""
    return sc.NumberField((-3, 14), (Fraction(0), Fraction(1)))


@lru_cache(maxsize=None)
def field_724() -> sc.NumberField:
    """Q[u]/(19u^2+2u-1) with u the positive root."""
    return sc.NumberField((-1, 2, 19), (Fraction(0), Fraction(1)))


def _exact_gram_from_floats(code, field, matcher) -> sc.ExactGram:
    g = sc.gram(sc.Code([[float(v) for v in row] for row in code.points]))
    n = g.size
    one = field.one()
    entries = [[one if i == j else matcher(g.entries[i][j])
                for j in range(n)] for i in range(n)]
    return sc.ExactGram(field, entries)


@lru_cache(maxsize=None)
def exact_gram_620() -> sc.ExactGram:
    field = field_620()

    def match(v: float) -> sc.FieldElement:
        k = round(v * 14)
        assert abs(v * 14 - k) < 1e-9
        return field.element([Fraction(k, 14)])

    return _exact_gram_from_floats(synthetic_620(), field, match)


@lru_cache(maxsize=None)
def exact_gram_724() -> sc.ExactGram:
    field = field_724()
    u = float((-1 + 2 * np.sqrt(5)) / 19)
    table = {
        round(u, 9): field.element([0, 1]),
        round(-u, 9): field.element([0, -1]),
        round(-3 * u, 9): field.element([0, -3]),
        round(2 * u - 1, 9): field.element([-1, 2]),
    }

    def match(v: float) -> sc.FieldElement:
        k = round(v, 9)
        best = min(table, key=lambda t: abs(t - k))
        assert abs(best - k) < 1e-8
        return table[best]

    return _exact_gram_from_floats(synthetic_724(), field, match)


# ----------------------------------------------------------------------
# fixtures


@pytest.fixture(scope="session")
def icosa() -> sc.Code:
    return icosahedron()


@pytest.fixture(scope="session")
def tetra() -> sc.Code:
    return regular_simplex(3)


@pytest.fixture(scope="session")
def octa() -> sc.Code:
    return cross_polytope(3)


@pytest.fixture(scope="session")
def code620() -> sc.PrecisionCode:
    return synthetic_620()


@pytest.fixture(scope="session")
def code724() -> sc.PrecisionCode:
    return synthetic_724()


@pytest.fixture(scope="session")
def gram620() -> sc.ExactGram:
    return exact_gram_620()


@pytest.fixture(scope="session")
def gram724() -> sc.ExactGram:
    return exact_gram_724()
