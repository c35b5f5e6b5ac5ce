"""High-precision refinement of spherical-code candidates.

A machine-precision candidate is turned into a ~500-digit configuration in
three stages: build the contact graph of shortest edges, split the points
into a rigid subframework and rattlers, then solve the equalization system

    |x_i - x_j|^2 = D   for every contact edge (i, j),
    |x_i|^2      = 1    for every rigid point,

with the common squared contact distance D as an extra unknown, by
Gauss-Newton at progressively doubled working precision.  Rattlers are
re-placed afterwards by maximin optimization against the rigid skeleton.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from mpmath import mp, mpf

from .core import Code, min_distance, pairwise_sqdist

DEFAULT_DIGITS = 500
DEFAULT_CONTACT_TOL = 1e-5


class NotRigidError(RuntimeError):
    """The contact system does not pin the configuration locally."""


class RefinementFailedError(RuntimeError):
    """Newton iteration failed to reach the requested residual."""


class InconsistentRattlerError(RuntimeError):
    """A rattler cannot be placed without violating the minimal distance."""


class PrecisionCode:
    """A spherical code held in arbitrary-precision arithmetic.

    Points are tuples of mpmath reals created at ``precision`` + guard
    decimal digits; every norm must equal 1 within 10^(-precision+10).
    """

    __slots__ = ("_points", "_precision")

    def __init__(self, points, precision: int = DEFAULT_DIGITS):
        if precision < 20:
            raise ValueError("precision must be at least 20 digits")
        with mp.workdps(precision + 10):
            rows = tuple(tuple(mpf(x) for x in row) for row in points)
            if not rows or len(rows) < 2:
                raise ValueError("need at least two points")
            dim = len(rows[0])
            if any(len(r) != dim for r in rows):
                raise ValueError("ragged point rows")
            bound = mpf(10) ** (-precision + 10)
            for i, r in enumerate(rows):
                err = abs(mp.fsum(x * x for x in r) - 1)
                if err > bound:
                    raise ValueError(f"point {i} norm off unit by {mp.nstr(err, 5)}")
        self._points = rows
        self._precision = precision

    @property
    def points(self):
        return self._points

    @property
    def dim(self) -> int:
        return len(self._points[0])

    @property
    def count(self) -> int:
        return len(self._points)

    @property
    def precision(self) -> int:
        return self._precision

    def to_code(self) -> Code:
        pts = np.array([[float(x) for x in row] for row in self._points])
        return Code.from_points(pts)

    def __repr__(self):
        return (f"PrecisionCode(dim={self.dim}, count={self.count}, "
                f"precision={self._precision})")


def precision_min_distance(pcode: PrecisionCode):
    """Exact minimal pairwise distance as an mpmath real."""
    pts = pcode.points
    with mp.workdps(pcode.precision + 10):
        best = None
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d2 = mp.fsum((a - b) ** 2 for a, b in zip(pts[i], pts[j]))
                if best is None or d2 < best:
                    best = d2
        return mp.sqrt(best)


def precision_max_cosine(pcode: PrecisionCode):
    """Largest off-diagonal inner product as an mpmath real."""
    pts = pcode.points
    with mp.workdps(pcode.precision + 10):
        best = None
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                c = mp.fsum(a * b for a, b in zip(pts[i], pts[j]))
                if best is None or c > best:
                    best = c
        return best


@dataclass(frozen=True)
class ContactGraph:
    """Shortest-edge graph: all pairs within tolerance of the minimum."""

    edges: tuple[tuple[int, int], ...]
    min_distance: float
    tolerance: float

    def neighbors(self, i: int) -> tuple[int, ...]:
        out = [b for a, b in self.edges if a == i]
        out += [a for a, b in self.edges if b == i]
        return tuple(sorted(out))

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)


@dataclass(frozen=True)
class RigidityPartition:
    rigid: tuple[int, ...]
    rattlers: tuple[int, ...]

    def __post_init__(self):
        if set(self.rigid) & set(self.rattlers):
            raise ValueError("rigid and rattler sets overlap")


def contact_graph(code: Code, tol: float = DEFAULT_CONTACT_TOL) -> ContactGraph:
    """All pairs whose distance is within (1+tol) of the minimal distance."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    d2 = pairwise_sqdist(code.points)
    n = code.count
    iu = np.triu_indices(n, k=1)
    dmin = float(np.sqrt(d2[iu].min()))
    cut = ((1.0 + tol) * dmin) ** 2
    edges = tuple(
        (int(i), int(j))
        for i, j in zip(*iu)
        if d2[i, j] <= cut
    )
    return ContactGraph(edges=edges, min_distance=dmin, tolerance=tol)


def classify(code: Code, contacts: ContactGraph) -> RigidityPartition:
    """Split points into rigid and rattlers by iterated contact counting.

    A point on the sphere has dim-1 degrees of freedom; fewer than dim
    touching constraints cannot pin it, so such points are marked as
    rattlers and their contacts discounted, until stable.
    """
    n = code.dim
    alive = set(range(code.count))
    while True:
        deg = {i: 0 for i in alive}
        for a, b in contacts.edges:
            if a in alive and b in alive:
                deg[a] += 1
                deg[b] += 1
        drop = {i for i in alive if deg[i] < n}
        if not drop:
            break
        alive -= drop
    rattlers = tuple(sorted(set(range(code.count)) - alive))
    return RigidityPartition(rigid=tuple(sorted(alive)), rattlers=rattlers)


def _gauge_rotation(pts: np.ndarray, rigid: tuple[int, ...]):
    """Orthogonal alignment putting n greedily chosen rigid points into a
    progressive-zero (staircase) pattern; returns (Q, chosen indices)."""
    n = pts.shape[1]
    chosen: list[int] = []
    basis: list[np.ndarray] = []
    for _ in range(n):
        best_i, best_r = -1, -1.0
        for i in rigid:
            if i in chosen:
                continue
            v = pts[i].copy()
            for b in basis:
                v -= (v @ b) * b
            r = float(np.linalg.norm(v))
            if r > best_r + 1e-12:
                best_i, best_r = i, r
        if best_r < 1e-8:
            raise NotRigidError("rigid points span a proper subspace")
        chosen.append(best_i)
        v = pts[best_i].copy()
        for b in basis:
            v -= (v @ b) * b
        basis.append(v / np.linalg.norm(v))
    mat = pts[chosen].T
    q, r = np.linalg.qr(mat)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs[None, :], chosen


def _float_jacobian_rank_ok(pts, edges, free_cols, col_of, n_rigid_eqs):
    """Cheap full-column-rank test of the equalization Jacobian at float64."""
    m = len(free_cols) + 1
    rows = []
    for a, b in edges:
        row = np.zeros(m)
        for k in range(pts.shape[1]):
            ca = col_of.get((a, k))
            cb = col_of.get((b, k))
            d = 2.0 * (pts[a, k] - pts[b, k])
            if ca is not None:
                row[ca] += d
            if cb is not None:
                row[cb] -= d
        row[m - 1] = -1.0
        rows.append(row)
    for i in n_rigid_eqs:
        row = np.zeros(m)
        for k in range(pts.shape[1]):
            c = col_of.get((i, k))
            if c is not None:
                row[c] = 2.0 * pts[i, k]
        rows.append(row)
    jac = np.array(rows)
    if jac.shape[0] < jac.shape[1]:
        return False
    sv = np.linalg.svd(jac, compute_uv=False)
    return sv[-1] > 1e-8 * sv[0]


def _newton_system(x, edges, rigid, free_cols, col_of, dval, n):
    """Sparse residual rows for the equalization system at current point.

    Returns (rows, resid) where rows[r] is a list of (column, value) pairs.
    """
    rows = []
    resid = []
    m = len(free_cols) + 1
    for a, b in edges:
        diff = [x[a][k] - x[b][k] for k in range(n)]
        resid.append(mp.fsum(d * d for d in diff) - dval)
        entries = []
        for k in range(n):
            ca = col_of.get((a, k))
            cb = col_of.get((b, k))
            if ca is not None:
                entries.append((ca, 2 * diff[k]))
            if cb is not None:
                entries.append((cb, -2 * diff[k]))
        entries.append((m - 1, mpf(-1)))
        rows.append(entries)
    for i in rigid:
        resid.append(mp.fsum(v * v for v in x[i]) - 1)
        entries = []
        for k in range(n):
            c = col_of.get((i, k))
            if c is not None:
                entries.append((c, 2 * x[i][k]))
        rows.append(entries)
    return rows, resid


def _solve_normal_equations(rows, resid, m):
    """Gauss-Newton step from sparse rows: solve (J^T J) delta = J^T r."""
    ata = mp.zeros(m, m)
    atb = mp.zeros(m, 1)
    for entries, r in zip(rows, resid):
        for c1, v1 in entries:
            atb[c1, 0] += v1 * r
            for c2, v2 in entries:
                ata[c1, c2] += v1 * v2
    try:
        return mp.lu_solve(ata, atb)
    except ZeroDivisionError as exc:
        raise NotRigidError("singular equalization system") from exc


def _precision_levels(digits: int):
    levels = []
    d = 30
    target = digits + 20
    while d < target:
        levels.append(d)
        d *= 2
    levels.append(target)
    return levels


def newton_polish(
    code: Code,
    contacts: ContactGraph,
    partition: RigidityPartition,
    digits: int = DEFAULT_DIGITS,
) -> PrecisionCode:
    """Equalize the shortest edges of the rigid subframework to ``digits``.

    The orthogonal gauge freedom is removed by aligning n greedily chosen
    rigid points to a staircase zero pattern and freezing those n(n-1)/2
    coordinates exactly.  Working precision doubles per Newton step until
    every equation residual is below 10^(-digits+20).  Rattler points are
    carried through unchanged (normalized); see place_rattlers.
    """
    n = code.dim
    rigid = partition.rigid
    if len(rigid) < n:
        raise NotRigidError("fewer rigid points than dimensions")
    q, chosen = _gauge_rotation(code.points, rigid)
    pts = code.points @ q
    frozen = set()
    for rank, i in enumerate(chosen):
        for k in range(rank + 1, n):
            frozen.add((i, k))
            pts[i, k] = 0.0
    rigid_set = set(rigid)
    edges = tuple((a, b) for a, b in contacts.edges
                  if a in rigid_set and b in rigid_set)
    if not edges:
        raise NotRigidError("no contacts among rigid points")
    free_cols = [(i, k) for i in rigid for k in range(n)
                 if (i, k) not in frozen]
    col_of = {fc: c for c, fc in enumerate(free_cols)}
    if not _float_jacobian_rank_ok(pts, edges, free_cols, col_of, rigid):
        raise NotRigidError("equalization Jacobian is rank-deficient")

    m = len(free_cols) + 1
    levels = _precision_levels(digits)
    with mp.workdps(levels[-1]):
        x = [[mpf(v) for v in row] for row in pts]
        dval = mpf(0)
        for a, b in edges:
            dval += mp.fsum((x[a][k] - x[b][k]) ** 2 for k in range(n))
        dval /= len(edges)
        target = mpf(10) ** (-(digits - 20))

        def step():
            rows, resid = _newton_system(x, edges, rigid, free_cols, col_of,
                                         dval, n)
            delta = _solve_normal_equations(rows, resid, m)
            for c, (i, k) in enumerate(free_cols):
                x[i][k] -= delta[c, 0]
            return max(abs(r) for r in resid), delta[m - 1, 0]

        for dps in levels:
            with mp.workdps(dps):
                _, dd = step()
                dval -= dd
        resid_max = None
        for _ in range(12):
            resid_max, dd = step()
            if resid_max < target:
                break
            dval -= dd
        else:
            raise RefinementFailedError(
                f"residual stalled at {mp.nstr(resid_max, 5)}")
        # rows, resid computed before the last step; confirm at the end point
        _, final_resid = _newton_system(x, edges, rigid, free_cols, col_of,
                                        dval, n)
        if max(abs(r) for r in final_resid) >= target:
            raise RefinementFailedError("equalization residual above target")
        for i in partition.rattlers:
            norm = mp.sqrt(mp.fsum(v * v for v in x[i]))
            x[i] = [v / norm for v in x[i]]
    return PrecisionCode(x, digits)


def _maximin_point_float(x0: np.ndarray, fixed: np.ndarray) -> np.ndarray:
    """Push one point as far from a fixed set as float64 allows.

    Smooth maximin: minimize the log of a high-exponent inverse-power sum,
    doubling the exponent, with projected gradient descent.
    """
    x = x0 / np.linalg.norm(x0)
    s = 1e3
    while s <= 2e8:
        diffs = x[None, :] - fixed
        d2 = np.einsum("ij,ij->i", diffs, diffs)
        alpha2 = d2.min()
        for _ in range(400):
            diffs = x[None, :] - fixed
            d2 = np.einsum("ij,ij->i", diffs, diffs)
            t = (0.5 * s) * (np.log(alpha2) - np.log(d2))
            mx = t.max()
            w = np.exp(t - mx)
            tot = w.sum()
            f = mx + np.log(tot)
            grad = -(s / tot) * ((w / d2)[:, None] * diffs).sum(axis=0)
            grad -= (grad @ x) * x
            gn = np.linalg.norm(grad)
            if gn < 1e-10 * s:
                break
            direction = -grad / gn
            a = 0.5
            improved = False
            for _ in range(40):
                y = x + a * direction
                y /= np.linalg.norm(y)
                dy = y[None, :] - fixed
                dy2 = np.einsum("ij,ij->i", dy, dy)
                ty = (0.5 * s) * (np.log(alpha2) - np.log(dy2))
                my = ty.max()
                fy = my + np.log(np.exp(ty - my).sum())
                if fy < f:
                    x = y
                    improved = True
                    break
                a *= 0.5
            if not improved:
                break
        s *= 4.0
    return x


def _equalize_rattler(x, r_idx, active, digits):
    """Newton-equalize one rattler's active contacts at full precision.

    Unknowns: the rattler's n coordinates plus its own contact distance.
    Square, overdetermined, and underdetermined active sets are all
    handled (plain Newton / normal equations / least-norm step).
    """
    n = len(x[r_idx])
    m = n + 1
    levels = _precision_levels(digits)
    target = mpf(10) ** (-(digits - 20))

    def residual_rows():
        rows = []
        resid = []
        resid.append(mp.fsum(v * v for v in x[r_idx]) - 1)
        rows.append([(k, 2 * x[r_idx][k]) for k in range(n)])
        for j in active:
            diff = [x[r_idx][k] - x[j][k] for k in range(n)]
            resid.append(mp.fsum(d * d for d in diff) - dval)
            rows.append([(k, 2 * diff[k]) for k in range(n)] + [(n, mpf(-1))])
        return rows, resid

    def step():
        rows, resid = residual_rows()
        n_eq = len(resid)
        jac = mp.zeros(n_eq, m)
        rhs = mp.matrix(resid)
        for ri, entries in enumerate(rows):
            for c, v in entries:
                jac[ri, c] = v
        try:
            if n_eq == m:
                delta = mp.lu_solve(jac, rhs)
            elif n_eq > m:
                delta = mp.lu_solve(jac.T * jac, jac.T * rhs)
            else:
                y = mp.lu_solve(jac * jac.T, rhs)
                delta = jac.T * y
        except ZeroDivisionError as exc:
            raise RefinementFailedError(
                "singular rattler equalization system") from exc
        for k in range(n):
            x[r_idx][k] -= delta[k, 0]
        return max(abs(r) for r in resid), delta[n, 0]

    dval = min(mp.fsum((x[r_idx][k] - x[j][k]) ** 2 for k in range(n))
               for j in active)
    for dps in levels:
        with mp.workdps(dps):
            _, dd = step()
            dval -= dd
    for _ in range(12):
        resid_max, dd = step()
        if resid_max < target:
            return
        dval -= dd
    raise RefinementFailedError("rattler equalization residual above target")


def place_rattlers(code: PrecisionCode, partition: RigidityPartition) -> PrecisionCode:
    """Maximin placement of rattlers against the fixed rigid skeleton.

    Rattlers are revisited cyclically; each pass pushes every rattler to a
    locally maximin position (float64 scan, then high-precision contact
    equalization).  Stops when a pass improves the worst rattler distance
    by less than 10^(-digits/2).
    """
    if not partition.rattlers:
        return code
    digits = code.precision
    guard = digits + 10
    with mp.workdps(guard):
        x = [list(row) for row in code.points]
        n = code.dim

        def rattler_objective():
            worst = None
            for r in partition.rattlers:
                for j in range(len(x)):
                    if j == r:
                        continue
                    d2 = mp.fsum((x[r][k] - x[j][k]) ** 2 for k in range(n))
                    if worst is None or d2 < worst:
                        worst = d2
            return mp.sqrt(worst)

        rigid_dmin = None
        for ii, i in enumerate(partition.rigid):
            for j in partition.rigid[ii + 1:]:
                d2 = mp.fsum((x[i][k] - x[j][k]) ** 2 for k in range(n))
                if rigid_dmin is None or d2 < rigid_dmin:
                    rigid_dmin = d2
        rigid_dmin = mp.sqrt(rigid_dmin)
        floor = min(rigid_dmin, rattler_objective())

        previous = rattler_objective()
        stop = mpf(10) ** (-digits // 2)
        for _ in range(8):
            for r in partition.rattlers:
                others = [j for j in range(len(x)) if j != r]
                fixed = np.array([[float(v) for v in x[j]] for j in others])
                start = np.array([float(v) for v in x[r]])
                pos = _maximin_point_float(start, fixed)
                d = np.linalg.norm(pos[None, :] - fixed, axis=1)
                cut = (1.0 + 1e-6) * d.min()
                active = [others[k] for k in np.flatnonzero(d <= cut)]
                for k in range(n):
                    x[r][k] = mpf(pos[k])
                _equalize_rattler(x, r, active, digits)
            current = rattler_objective()
            if abs(current - previous) < stop:
                break
            previous = current

        tol = mpf(10) ** (-(digits - 20))
        if rattler_objective() < floor - tol:
            raise InconsistentRattlerError(
                "best rattler placement violates the minimal distance")
    return PrecisionCode(x, digits)


def refine(code: Code, digits: int = DEFAULT_DIGITS,
           tol: float = DEFAULT_CONTACT_TOL) -> tuple[PrecisionCode, ContactGraph, RigidityPartition]:
    """Full pipeline: contact graph, rigidity split, polish, rattlers."""
    contacts = contact_graph(code, tol)
    partition = classify(code, contacts)
    polished = newton_polish(code, contacts, partition, digits)
    placed = place_rattlers(polished, partition)
    return placed, contacts, partition


def write_precision_file(path, pcode: PrecisionCode,
                         contacts: int | None = None,
                         rattlers: tuple[int, ...] = ()) -> None:
    """Code-file layout with full-precision decimals and # header lines."""
    digits = pcode.precision
    with mp.workdps(digits + 10):
        lines = [f"# digits {digits}"]
        if contacts is not None:
            lines.append(f"# contacts {contacts}")
        if rattlers:
            lines.append("# rattlers " + " ".join(str(i) for i in sorted(rattlers)))
        lines.append(f"{pcode.dim} {pcode.count}")
        for row in pcode.points:
            lines.append(" ".join(mp.nstr(v, digits, strip_zeros=False)
                                  for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_precision_file(path) -> tuple[PrecisionCode, dict]:
    """Inverse of write_precision_file; returns the code and its header."""
    meta: dict = {"digits": DEFAULT_DIGITS, "contacts": None, "rattlers": ()}
    rows = []
    header = None
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if fields[:1] == ["digits"]:
                    meta["digits"] = int(fields[1])
                elif fields[:1] == ["contacts"]:
                    meta["contacts"] = int(fields[1])
                elif fields[:1] == ["rattlers"]:
                    meta["rattlers"] = tuple(int(v) for v in fields[1:])
                continue
            if header is None:
                header = line.split()
                continue
            rows.append(line.split())
    if header is None or len(header) != 2:
        raise ValueError(f"{path}: missing 'dim count' header")
    dim, count = int(header[0]), int(header[1])
    if len(rows) != count or any(len(r) != dim for r in rows):
        raise ValueError(f"{path}: expected {count} rows of {dim} values")
    digits = meta["digits"]
    with mp.workdps(digits + 10):
        pts = [[mpf(v) for v in row] for row in rows]
    return PrecisionCode(pts, digits), meta
