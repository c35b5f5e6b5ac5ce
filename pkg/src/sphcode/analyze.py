"""Structural analysis of spherical codes.

Four views of a code's structure: the edge-length spectrum (distinct
cosines with multiplicities), vertex equivalence fingerprints (a necessary
condition for symmetry-group equivalence), antipodal pairs, and a
decomposition into two parallel layers with the relative orientation of
the layers when each is a cross polytope.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cmp_to_key

import numpy as np
from mpmath import mp, mpf

from .algebraic import express_in_field
from .core import Code, GramMatrix, gram
from .fields import ExactGram
from .refine import PrecisionCode

#: Clustering tolerance for cosines of a code refined to hundreds of digits
#: and then rounded to machine precision.
DEFAULT_TOL = 1e-9

#: Clustering tolerance for raw search output, whose shortest edges agree
#: to only five or six decimal places.
SEARCH_TOL = 1e-5


@dataclass(frozen=True)
class EdgeSpectrum:
    """Distinct off-diagonal cosine values with pair multiplicities."""

    entries: tuple  # ((value, multiplicity), ...) descending by value

    @property
    def m(self) -> int:
        """Number of distinct edge lengths."""
        return len(self.entries)

    @property
    def pair_total(self) -> int:
        return sum(mult for _, mult in self.entries)

    @property
    def max_cosine_multiplicity(self) -> int:
        return self.entries[0][1]


@dataclass(frozen=True)
class VertexFingerprint:
    """Per-vertex sorted cosine lists and the equivalence classes they induce."""

    fingerprints: tuple  # one sorted tuple of cosines per vertex
    classes: tuple       # tuples of vertex indices with identical fingerprints


@dataclass(frozen=True)
class Layers:
    """A split of a code into two parallel hyperplane sections.

    ``equatorial`` holds, for every point, its component orthogonal to the
    layer normal rescaled to unit length; ``pairs`` lists, per layer, the
    index pairs whose equatorial parts are antipodal (present only when the
    layer is a cross polytope).
    """

    normal: tuple
    heights: tuple        # (upper, lower) projection values
    index_sets: tuple     # (upper indices, lower indices)
    cross_polytope: tuple  # (bool, bool)
    pairs: tuple          # per layer: ((i, j), ...) antipodal equatorial pairs
    equatorial: tuple     # per code point: unit equatorial vector
    precision: int


@dataclass(frozen=True)
class OrientationMatrix:
    """Second layer of a two-cross-polytope code in the basis of the first.

    One row per antipodal pair of the second layer, sign-canonicalized;
    ``exact_rows`` carries the same entries as polynomials in the field
    generator when a field description is supplied.
    """

    rows: tuple
    exact_rows: tuple | None = None


def _offdiag_values_numeric(g: GramMatrix):
    e = g.entries
    iu = np.triu_indices(g.size, k=1)
    return e[iu]


def _cluster_sorted(values, tol):
    """Group ascending values into runs separated by gaps larger than tol."""
    groups = []
    start = 0
    for k in range(1, len(values) + 1):
        if k == len(values) or values[k] - values[k - 1] > tol:
            groups.append(values[start:k])
            start = k
    return groups


def _exact_distinct_sorted(g: ExactGram):
    """Distinct off-diagonal entries of an exact Gram, ascending, with counts."""
    counts = {}
    for i in range(g.size):
        for j in range(i + 1, g.size):
            e = g[i, j]
            counts[e] = counts.get(e, 0) + 1
    field = g.field
    order = cmp_to_key(lambda a, b: field.sign_of(a - b))
    distinct = sorted(counts, key=order)
    return distinct, counts


def edge_spectrum(g: GramMatrix | ExactGram, tol: float = DEFAULT_TOL) -> EdgeSpectrum:
    """Distinct cosines over unordered pairs, with multiplicities, descending.

    Numeric entries are clustered within tol (each reported value is the
    cluster mean); exact entries are grouped by exact equality and ordered
    by certified sign comparisons, so tol is ignored.
    """
    if isinstance(g, ExactGram):
        distinct, counts = _exact_distinct_sorted(g)
        return EdgeSpectrum(tuple((e, counts[e]) for e in reversed(distinct)))
    vals = np.sort(_offdiag_values_numeric(g))
    groups = _cluster_sorted(vals, tol)
    entries = [(float(np.mean(grp)), len(grp)) for grp in reversed(groups)]
    return EdgeSpectrum(tuple(entries))


def vertex_classes(g: GramMatrix | ExactGram, tol: float = DEFAULT_TOL) -> VertexFingerprint:
    """Group vertices whose sorted lists of emanating cosines are identical.

    Identical fingerprints are necessary, not sufficient, for two vertices
    to be related by a symmetry of the configuration.
    """
    if isinstance(g, ExactGram):
        distinct, _ = _exact_distinct_sorted(g)
        rank = {e: k for k, e in enumerate(distinct)}
        n = g.size
        fingerprints = tuple(
            tuple(sorted(rank[g[i, j]] for j in range(n) if j != i))
            for i in range(n))
        display = tuple(
            tuple(distinct[r] for r in fp) for fp in fingerprints)
    else:
        e = g.entries
        n = g.size
        keys = []
        for i in range(n):
            row = np.delete(e[i], i)
            keys.append(tuple(sorted(int(q) for q in np.round(row / tol))))
        fingerprints = tuple(keys)
        display = tuple(tuple(q * tol for q in fp) for fp in fingerprints)
    groups: dict = {}
    for i, fp in enumerate(fingerprints):
        groups.setdefault(fp, []).append(i)
    classes = tuple(tuple(v) for v in
                    sorted(groups.values(), key=lambda c: c[0]))
    return VertexFingerprint(fingerprints=display, classes=classes)


def antipodal_pairs(code: Code | PrecisionCode, tol: float = DEFAULT_TOL):
    """Index pairs whose inner product lies within tol of -1."""
    if isinstance(code, PrecisionCode):
        pts = code.points
        with mp.workdps(code.precision + 10):
            bound = mpf(-1) + mpf(tol)
            return [(i, j)
                    for i in range(len(pts)) for j in range(i + 1, len(pts))
                    if mp.fsum(a * b for a, b in zip(pts[i], pts[j])) <= bound]
    g = code.points @ code.points.T
    n = code.count
    return [(i, j) for i in range(n) for j in range(i + 1, n)
            if g[i, j] <= -1.0 + tol]


def _dot(x, y):
    return mp.fsum(a * b for a, b in zip(x, y))


def _norm(x):
    return mp.sqrt(mp.fsum(a * a for a in x))


def _split_two(proj, tol):
    """Split projection values at their largest gap; None unless the two
    resulting clusters are tol-tight, distinct, and equally sized."""
    order = sorted(range(len(proj)), key=lambda k: proj[k])
    gaps = [proj[order[k + 1]] - proj[order[k]] for k in range(len(order) - 1)]
    cut = max(range(len(gaps)), key=lambda k: gaps[k])
    lower = order[:cut + 1]
    upper = order[cut + 1:]
    if len(lower) != len(upper):
        return None
    lo_spread = proj[lower[-1]] - proj[lower[0]]
    hi_spread = proj[upper[-1]] - proj[upper[0]]
    if lo_spread > tol or hi_spread > tol or gaps[cut] <= tol:
        return None
    return upper, lower


def _cross_polytope_pairs(indices, equatorial, dim, tol):
    """Antipodal pairing of a layer's equatorial parts, or None.

    A layer qualifies as a cross polytope when it consists of dim - 1
    mutually orthogonal antipodal pairs of unit equatorial vectors.
    """
    k = len(indices)
    if k != 2 * (dim - 1):
        return None
    partner = {}
    for a in range(k):
        i = indices[a]
        for b in range(a + 1, k):
            j = indices[b]
            ip = _dot(equatorial[i], equatorial[j])
            if abs(ip + 1) <= tol:
                if i in partner or j in partner:
                    return None
                partner[i] = j
                partner[j] = i
            elif abs(ip) > tol:
                return None
    if len(partner) != k:
        return None
    pairs = tuple(sorted((i, j) for i, j in partner.items() if i < j))
    return pairs


def layer_decomposition(code: PrecisionCode, tol=None) -> Layers | None:
    """Split a code into two equal-size sets in parallel hyperplanes.

    Candidate normals are the normalized point sum (when nonzero) and the
    principal axes of the second-moment matrix; each candidate is refined
    to the difference of the two layer centroids and accepted when every
    point projects onto one of exactly two values within tol.  Returns
    None when no candidate splits the code.
    """
    prec = code.precision
    with mp.workdps(prec + 10):
        if tol is None:
            tol = mpf(10) ** -(prec // 2)
        else:
            tol = mpf(tol)
        pts = code.points
        n = code.dim
        count = code.count
        if count % 2:
            return None

        candidates = []
        total = [mp.fsum(p[a] for p in pts) for a in range(n)]
        tnorm = _norm(total)
        if tnorm > mpf("1e-6"):
            candidates.append(tuple(t / tnorm for t in total))
        fl = np.array([[float(x) for x in p] for p in pts])
        moments = fl.T @ fl
        _, vecs = np.linalg.eigh(moments)
        for col in range(n):
            v = [mpf(vecs[a, col]) for a in range(n)]
            nv = _norm(v)
            candidates.append(tuple(a / nv for a in v))

        coarse = mpf("1e-4")
        for cand in candidates:
            proj = [_dot(p, cand) for p in pts]
            split = _split_two(proj, coarse)
            if split is None:
                continue
            upper, lower = split
            # Refine: the exact normal is parallel to the difference of the
            # layer centroids (the in-layer components cancel).
            diff = [mp.fsum(pts[i][a] for i in upper) -
                    mp.fsum(pts[i][a] for i in lower) for a in range(n)]
            dnorm = _norm(diff)
            if dnorm < tol:
                continue
            normal = tuple(d / dnorm for d in diff)
            proj = [_dot(p, normal) for p in pts]
            split = _split_two(proj, tol)
            if split is None:
                continue
            upper, lower = split
            h_up = mp.fsum(proj[i] for i in upper) / len(upper)
            h_lo = mp.fsum(proj[i] for i in lower) / len(lower)

            equatorial = []
            for p in pts:
                h = _dot(p, normal)
                e = [a - h * b for a, b in zip(p, normal)]
                en = _norm(e)
                if en < tol:
                    break
                equatorial.append(tuple(a / en for a in e))
            else:
                equatorial = tuple(equatorial)
                pair_tol = max(tol, mpf("1e-9"))
                pairs = []
                flags = []
                for idx in (tuple(upper), tuple(lower)):
                    pr = _cross_polytope_pairs(idx, equatorial, n, pair_tol)
                    flags.append(pr is not None)
                    pairs.append(pr if pr is not None else ())
                return Layers(normal=normal,
                              heights=(h_up, h_lo),
                              index_sets=(tuple(sorted(upper)),
                                          tuple(sorted(lower))),
                              cross_polytope=tuple(flags),
                              pairs=tuple(pairs),
                              equatorial=equatorial,
                              precision=prec)
        return None


def _first_significant(vec, tol):
    for k, v in enumerate(vec):
        if abs(v) > tol:
            return k
    return len(vec)


def _canonical_rep(vec, tol):
    """Flip sign so the first significant entry is positive."""
    k = _first_significant(vec, tol)
    if k < len(vec) and vec[k] < 0:
        return tuple(-v for v in vec)
    return tuple(vec)


def relative_orientation(layers: Layers, u_value=None, minpoly=None,
                         precision: int = 200) -> OrientationMatrix:
    """Express the second layer's cross polytope in the basis of the first.

    The first layer's antipodal pairs provide an orthonormal basis of the
    equatorial hyperplane (signs fixed so each basis vector's first
    significant entry is positive); each second-layer pair contributes one
    sign-canonicalized row of coordinates in that basis.  When ``u_value``
    and ``minpoly`` are given, each entry is also expressed exactly as a
    polynomial in the field generator.
    """
    if not (layers.cross_polytope[0] and layers.cross_polytope[1]):
        raise ValueError("both layers must be cross polytopes")
    with mp.workdps(layers.precision + 10):
        tol = mpf(10) ** -(layers.precision // 2)
        sig = mpf("1e-6")
        basis = [_canonical_rep(layers.equatorial[i], sig)
                 for i, _ in layers.pairs[0]]
        basis.sort(key=lambda b: _first_significant(b, sig))
        rows = []
        for i, _ in layers.pairs[1]:
            w = layers.equatorial[i]
            coords = [_dot(w, b) for b in basis]
            err = abs(mp.fsum(c * c for c in coords) - 1)
            if err > max(tol, mpf("1e-9")):
                raise ValueError(
                    "second-layer vector does not lie in the span of the "
                    f"first layer's pairs (unit defect {mp.nstr(err, 5)})")
            rows.append(_canonical_rep(coords, sig))
        rows.sort(key=lambda r: [float(v) for v in r], reverse=True)
        exact_rows = None
        if u_value is not None and minpoly is not None:
            exact = []
            for row in rows:
                exact.append(tuple(
                    express_in_field(c, u_value, minpoly, precision=precision)
                    for c in row))
            exact_rows = tuple(exact)
        return OrientationMatrix(rows=tuple(tuple(r) for r in rows),
                                 exact_rows=exact_rows)


def _format_value(v):
    if isinstance(v, float):
        return f"{v: .12f}"
    return mp.nstr(v, 15)


def build_report(code: Code | PrecisionCode | None = None,
                 g: GramMatrix | ExactGram | None = None,
                 tol: float = DEFAULT_TOL) -> str:
    """Plain-text structural report: spectrum, classes, antipodal pairs,
    and (for high-precision codes) the two-layer decomposition."""
    if g is None:
        if code is None:
            raise ValueError("need a code or a Gram matrix")
        if isinstance(code, PrecisionCode):
            g = gram(code.to_code())
        else:
            g = gram(code)
    lines = []
    spec = edge_spectrum(g, tol)
    lines.append(f"edge spectrum: {spec.m} distinct cosine(s) over "
                 f"{spec.pair_total} pairs")
    for value, mult in spec.entries:
        shown = (str(value) if isinstance(g, ExactGram)
                 else _format_value(value))
        lines.append(f"  {shown}  x{mult}")
    classes = vertex_classes(g, tol).classes
    lines.append(f"vertex classes: {len(classes)}")
    for cls in classes:
        lines.append(f"  size {len(cls)}: {list(cls)}")
    if code is not None:
        pairs = antipodal_pairs(code, tol)
        lines.append(f"antipodal pairs: {len(pairs)} {pairs}")
        if isinstance(code, PrecisionCode):
            layers = layer_decomposition(code)
            if layers is None:
                lines.append("two-layer decomposition: none")
            else:
                up, lo = layers.index_sets
                lines.append(
                    f"two-layer decomposition: {len(up)} + {len(lo)} points, "
                    f"heights {mp.nstr(layers.heights[0], 10)} / "
                    f"{mp.nstr(layers.heights[1], 10)}")
                lines.append(
                    "  cross polytopes: "
                    f"upper={layers.cross_polytope[0]} "
                    f"lower={layers.cross_polytope[1]}")
                if all(layers.cross_polytope):
                    om = relative_orientation(layers)
                    lines.append("  relative orientation (second layer in "
                                 "the basis of the first):")
                    for row in om.rows:
                        lines.append("    [" + ", ".join(
                            mp.nstr(v, 12) for v in row) + "]")
    return "\n".join(lines) + "\n"
