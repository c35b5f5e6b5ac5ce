"""Contact graphs, rigidity classification, Newton equalization, rattlers."""

import numpy as np
import pytest
from mpmath import mp

import sphcode as sc
from sphcode import (ContactGraph, NotRigidError, PrecisionCode,
                     RigidityPartition, classify, contact_graph,
                     newton_polish, place_rattlers, precision_max_cosine,
                     precision_min_distance, read_precision_file, refine,
                     write_precision_file)
from conftest import cross_polytope, icosahedron


def _octa_edges(pts):
    return tuple((i, j) for i in range(6) for j in range(i + 1, 6)
                 if abs(float(pts[i] @ pts[j])) < 1e-12)


def test_contact_graph_icosahedron(icosa):
    contacts = contact_graph(icosa)
    assert len(contacts.edges) == 30
    assert abs(contacts.min_distance
               - 2.0 / np.sqrt(2.0 + (1 + 5**0.5) / 2)) < 1e-9
    degrees = np.zeros(12, dtype=int)
    for a, b in contacts.edges:
        degrees[a] += 1
        degrees[b] += 1
    assert all(d == 5 for d in degrees)


def test_contact_graph_tolerance_widens(icosa):
    wide = contact_graph(icosa, tol=2.0)  # (1+2) * dmin covers everything
    assert len(wide.edges) == 66
    with pytest.raises(ValueError):
        contact_graph(icosa, tol=-0.1)


def test_classify_all_rigid(icosa):
    contacts = contact_graph(icosa)
    part = classify(icosa, contacts)
    assert part.rigid == tuple(range(12))
    assert part.rattlers == ()


def test_classify_isolated_point_is_rattler(octa):
    # Hand-built contact graph: the octahedron's 12 short edges, with a
    # seventh point that touches nothing.
    pts = np.vstack([octa.points, [[1, 1, 1] / np.sqrt(3.0)]])
    code = sc.Code(pts)
    contacts = ContactGraph(edges=_octa_edges(octa.points),
                            min_distance=float(np.sqrt(2)), tolerance=1e-5)
    part = classify(code, contacts)
    assert part.rigid == tuple(range(6))
    assert part.rattlers == (6,)


def test_classify_cascades(octa):
    # Dropping an underpinned point discounts its contacts, which can
    # strip its neighbours in turn: 8, then 7, then 6 all unpin.
    extra = np.array([[1, 1, 1], [1, 1, -1], [1, -1, 1]]) / np.sqrt(3.0)
    code = sc.Code(np.vstack([octa.points, extra]))
    chain = ((6, 7), (6, 0), (6, 1),
             (7, 8), (7, 0),
             (8, 2))
    # Degrees among 6,7,8: deg(8)=2 < 3 drops first; that cuts 7 to 2,
    # which in turn cuts 6 to 2.
    contacts = ContactGraph(edges=_octa_edges(octa.points) + chain,
                            min_distance=1.0, tolerance=1e-5)
    part = classify(code, contacts)
    assert part.rigid == (0, 1, 2, 3, 4, 5)
    assert part.rattlers == (6, 7, 8)


def test_newton_polish_recovers_icosahedron_exactly():
    rng = np.random.default_rng(0)
    pts = icosahedron().points.copy()
    pts += 1e-7 * rng.standard_normal(pts.shape)
    code = sc.Code.from_points(pts)
    contacts = contact_graph(code, tol=1e-4)
    part = classify(code, contacts)
    refined = newton_polish(code, contacts, part, digits=150)
    assert isinstance(refined, PrecisionCode)
    assert refined.precision == 150
    with mp.workdps(170):
        u = precision_max_cosine(refined)
        target = 1 / mp.sqrt(5)
        assert abs(u - target) < mp.mpf(10) ** (-130)
        # Every contact distance agrees to working precision.
        d2 = []
        for a, b in contacts.edges:
            d2.append(mp.fsum((x - y) ** 2 for x, y in
                              zip(refined.points[a], refined.points[b])))
        assert max(d2) - min(d2) < mp.mpf(10) ** (-130)


def test_newton_polish_planar_scaffold_is_not_rigid():
    # A square in R^3 spans only a plane; the gauge fixing must refuse it.
    s = 1 / np.sqrt(2.0)
    code = sc.Code([[s, s, 0], [s, -s, 0], [-s, s, 0], [-s, -s, 0]])
    contacts = contact_graph(code, tol=1e-6)
    part = classify(code, contacts)
    with pytest.raises(NotRigidError):
        newton_polish(code, contacts, part, digits=60)


def test_place_rattlers_equalizes_contacts():
    # A rattler started inside the (+,+,+) octant must climb to the face
    # center, ending equidistant from the three nearest vertices.
    digits = 80
    with mp.workdps(digits + 10):
        rows = [[mp.mpf(v) for v in row] for row in np.eye(3)]
        rows += [[-v for v in row] for row in rows[:3]]
        start = [mp.mpf(1), mp.mpf(1), mp.mpf(2)]
        norm = mp.sqrt(mp.fsum(v * v for v in start))
        rows.append([v / norm for v in start])
        code = PrecisionCode(rows, digits)
    part = RigidityPartition(rigid=tuple(range(6)), rattlers=(6,))
    placed = place_rattlers(code, part)
    with mp.workdps(digits + 10):
        dists = sorted(
            mp.sqrt(mp.fsum((x - y) ** 2 for x, y in
                            zip(placed.points[6], placed.points[i])))
            for i in range(6)
        )
        target = mp.sqrt(2 - 2 / mp.sqrt(3))
        assert abs(dists[0] - target) < mp.mpf(10) ** (-(digits - 20))
        assert dists[2] - dists[0] < mp.mpf(10) ** (-(digits - 20))
        initial = float(mp.sqrt(2 - 2 * 2 / mp.sqrt(6)))  # start to e3
        assert float(dists[0]) > initial


def test_place_rattlers_no_rattlers_is_identity(icosa):
    placed, _, _ = refine(icosa, digits=60)
    part = RigidityPartition(rigid=tuple(range(12)), rattlers=())
    assert place_rattlers(placed, part) is placed


def test_refine_full_pipeline(icosa):
    placed, contacts, part = refine(icosa, digits=120)
    assert len(contacts.edges) == 30
    assert part.rattlers == ()
    with mp.workdps(140):
        assert abs(precision_max_cosine(placed) - 1 / mp.sqrt(5)) \
            < mp.mpf(10) ** (-100)
        dmin = precision_min_distance(placed)
        assert abs(dmin - mp.sqrt(2 - 2 / mp.sqrt(5))) < mp.mpf(10) ** (-100)


def test_precision_file_round_trip(tmp_path):
    placed, contacts, part = refine(icosahedron(), digits=100)
    path = tmp_path / "icosa.prec"
    write_precision_file(path, placed, contacts=len(contacts.edges),
                         rattlers=part.rattlers)
    back, header = read_precision_file(path)
    assert back.precision == 100
    assert back.dim == 3 and back.count == 12
    assert header["contacts"] == 30
    with mp.workdps(120):
        for row_a, row_b in zip(back.points, placed.points):
            for a, b in zip(row_a, row_b):
                assert abs(a - b) < mp.mpf(10) ** (-95)
