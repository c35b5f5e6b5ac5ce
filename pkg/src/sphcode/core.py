"""Geometry primitives shared by every stage: codes, Gram matrices, cosines."""

from __future__ import annotations

import numpy as np

NORM_TOL = 1e-12
DISTINCT_TOL = 1e-9


class InvalidCodeError(ValueError):
    """Raised when a point configuration violates the code invariants."""


class Code:
    """An immutable set of N unit vectors in R^n, stored row-major (N x n).

    Points are validated on construction: unit norms within 1e-12 and all
    pairwise distances above 1e-9.  Use :meth:`from_points` to normalize
    raw coordinates first.
    """

    __slots__ = ("_points",)

    def __init__(self, points):
        pts = np.array(points, dtype=float, order="C")
        if pts.ndim != 2:
            raise InvalidCodeError("points must be a 2-d array (N x n)")
        count, dim = pts.shape
        if dim < 2:
            raise InvalidCodeError(f"dimension must be >= 2, got {dim}")
        if count < 2:
            raise InvalidCodeError(f"need at least 2 points, got {count}")
        norms = np.linalg.norm(pts, axis=1)
        err = np.max(np.abs(norms - 1.0))
        if err > NORM_TOL:
            raise InvalidCodeError(
                f"point norms deviate from 1 by {err:.3e} (tolerance {NORM_TOL})"
            )
        d2 = pairwise_sqdist(pts)
        iu = np.triu_indices(count, k=1)
        if d2[iu].min() < DISTINCT_TOL**2:
            i, j = np.unravel_index(np.argmin(d2 + 4.0 * np.eye(count)), d2.shape)
            raise InvalidCodeError(f"points {i} and {j} coincide within {DISTINCT_TOL}")
        pts.flags.writeable = False
        self._points = pts

    @classmethod
    def from_points(cls, points) -> "Code":
        """Build a code from raw coordinates, renormalizing each point."""
        pts = np.array(points, dtype=float)
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise InvalidCodeError("cannot normalize a zero vector")
        return cls(pts / norms)

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    @property
    def count(self) -> int:
        return self._points.shape[0]

    def __len__(self) -> int:
        return self.count

    def __repr__(self) -> str:
        return f"Code(n={self.dim}, N={self.count})"


class GramMatrix:
    """Immutable N x N matrix of pairwise cosines with exact unit diagonal."""

    __slots__ = ("_entries",)

    def __init__(self, entries):
        g = np.array(entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise InvalidCodeError("Gram matrix must be square")
        if np.max(np.abs(g - g.T)) > NORM_TOL:
            raise InvalidCodeError("Gram matrix must be symmetric")
        if np.max(np.abs(np.diag(g) - 1.0)) > NORM_TOL:
            raise InvalidCodeError("Gram diagonal must equal 1")
        off = g[~np.eye(g.shape[0], dtype=bool)]
        if off.size and (off.min() < -1.0 - NORM_TOL or off.max() > 1.0 + NORM_TOL):
            raise InvalidCodeError("off-diagonal entries must lie in [-1, 1]")
        g.flags.writeable = False
        self._entries = g

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def size(self) -> int:
        return self._entries.shape[0]

    def __repr__(self) -> str:
        return f"GramMatrix(N={self.size})"


def pairwise_sqdist(pts: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between all rows of ``pts``."""
    g = pts @ pts.T
    sq = np.diag(g)
    d2 = sq[:, None] + sq[None, :] - 2.0 * g
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def gram(code: Code) -> GramMatrix:
    """Gram matrix of a code: entry (i, j) is the inner product of points i, j.

    The result is exactly symmetric (mirrored from the upper triangle) and the
    diagonal is written as exactly 1 rather than computed.
    """
    p = code.points
    g = p @ p.T
    g = np.triu(g, k=1)
    g = g + g.T
    np.fill_diagonal(g, 1.0)
    return GramMatrix(g)


def max_cosine(code: Code) -> float:
    """Largest inner product between two distinct points of the code."""
    if code.count < 2:
        raise InvalidCodeError("max_cosine needs at least 2 points")
    g = code.points @ code.points.T
    np.fill_diagonal(g, -2.0)
    return float(g.max())


def cos_dist_convert(value: float, direction: str) -> float:
    """Convert between a cosine and a squared chord distance on the unit sphere.

    direction "cos-to-dist2" applies d^2 = 2 - 2c; "dist2-to-cos" applies
    c = 1 - d^2/2.  Inputs outside [-1, 1] (cosine) or [0, 4] (squared
    distance) are rejected.
    """
    if direction == "cos-to-dist2":
        if not -1.0 <= value <= 1.0:
            raise ValueError(f"cosine {value} outside [-1, 1]")
        return 2.0 - 2.0 * value
    if direction == "dist2-to-cos":
        if not 0.0 <= value <= 4.0:
            raise ValueError(f"squared distance {value} outside [0, 4]")
        return 1.0 - value / 2.0
    raise ValueError(f"unknown direction {direction!r}")


def min_distance(code: Code) -> float:
    """Smallest pairwise Euclidean distance in the code."""
    d2 = pairwise_sqdist(code.points)
    iu = np.triu_indices(code.count, k=1)
    return float(np.sqrt(d2[iu].min()))


def write_code_file(path, code: Code, digits: int = 17) -> None:
    """Write a code as text: first line ``n N``, then one point per line."""
    with open(path, "w") as fh:
        fh.write(f"{code.dim} {code.count}\n")
        for row in code.points:
            fh.write(" ".join(f"{x:.{digits}g}" for x in row) + "\n")


def read_code_file(path) -> Code:
    """Read the text format written by :func:`write_code_file`.

    Lines starting with ``#`` are treated as header comments and skipped, so
    the same reader accepts precision-code files at machine precision.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise InvalidCodeError(f"empty code file: {path}")
    head = lines[0].split()
    if len(head) != 2:
        raise InvalidCodeError(f"bad header line in {path}: {lines[0]!r}")
    dim, count = int(head[0]), int(head[1])
    rows = []
    for ln in lines[1 : 1 + count]:
        vals = [float(tok) for tok in ln.split()]
        if len(vals) != dim:
            raise InvalidCodeError(f"expected {dim} coordinates, got {len(vals)}")
        rows.append(vals)
    if len(rows) != count:
        raise InvalidCodeError(f"expected {count} points, got {len(rows)}")
    return Code.from_points(rows)
