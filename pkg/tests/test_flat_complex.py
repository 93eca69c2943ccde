import math

import numpy as np
import pytest

from cat2d.errors import InvalidComplex, Unreachable
from cat2d.flat_complex import (ComplexPoint, SteinerGraph, TriComplex, approx_distance, book_complex,
                                cone_complex, grid_complex, link_girth_check, polygon_complex,
                                triangulate_simple_polygon)
from cat2d.polydomain import PolygonDomain


def unit_square():
    return TriComplex(4, [(0, 1, 2), (0, 2, 3)], None, 0.0, [(0, 0), (1, 0), (1, 1), (0, 1)])


def test_validation():
    with pytest.raises(InvalidComplex):
        TriComplex(3, [(0, 1, 2)], [(1, 1, 3)])
    with pytest.raises(InvalidComplex):
        TriComplex(3, [(0, 1, 1)], [(1, 1, 1)])
    # a shared edge with two different lengths
    with pytest.raises(InvalidComplex):
        TriComplex(4, [(0, 1, 2), (0, 2, 3)], [(1, 1, 1), (1.2, 1, 1)])


def test_topology_helpers():
    c = unit_square()
    assert c.is_disc() and c.euler_characteristic() == 1 and c.n_components() == 1
    assert sorted(c.boundary_cycles()[0]) == [0, 1, 2, 3]


def test_link_examples():
    assert link_girth_check(unit_square()).passed
    rep = link_girth_check(cone_complex(1.5 * math.pi, 4))
    assert not rep.passed
    assert rep.worst_loop_length == pytest.approx(1.5 * math.pi)
    assert rep.worst_vertex == 0
    assert link_girth_check(book_complex(3)).passed
    # a flat interior vertex has link length exactly 2 pi
    assert link_girth_check(cone_complex(2 * math.pi, 6)).passed


def test_steiner_node_counts():
    c = unit_square()
    g = SteinerGraph(c, 0.25)
    unit_edges = [e for e, L in enumerate(c.edge_len) if abs(L - 1) < 1e-12]
    assert all(g.edge_segments[e] - 1 == 3 for e in unit_edges)
    single = TriComplex(3, [(0, 1, 2)], [(1, 1, 1)])
    assert SteinerGraph(single, 2.0).n_nodes == 3
    n1 = SteinerGraph(c, 0.1).n_nodes
    n2 = SteinerGraph(c, 0.05).n_nodes
    assert n2 - 4 == pytest.approx(2 * (n1 - 4), rel=0.2)


def test_square_diagonal():
    c = unit_square()
    d = approx_distance(c, ComplexPoint.vertex(1), ComplexPoint.vertex(3), 0.05)
    assert d == pytest.approx(math.sqrt(2), abs=0.02)
    assert d >= math.sqrt(2) - 1e-12
    assert approx_distance(c, ComplexPoint.vertex(1), ComplexPoint.vertex(1), 0.05) == 0.0


def test_two_triangle_unfolding():
    """Points inside the two triangles of a square: compare with the straight line."""
    c = unit_square()
    rng = np.random.default_rng(0)
    for h in (0.2, 0.1, 0.05):
        for _ in range(10):
            la, lb = rng.dirichlet([1, 1, 1]), rng.dirichlet([1, 1, 1])
            p, q = c.face_point(0, la), c.face_point(1, lb)
            exact = float(np.hypot(*(c.xy(p) - c.xy(q))))
            d = approx_distance(c, p, q, h)
            assert exact - 1e-12 <= d <= exact + 2 * h


def test_upper_bound_and_monotone_on_planar_domains():
    polys = [
        [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)],
        [(0, 0), (4, 0), (4, 3), (2.5, 1.2), (1.5, 3.2), (0, 2.5), (1, 1.5)],
        [(0, 0), (3, 0), (3, 0.5), (0.5, 0.5), (0.5, 2.5), (3, 2.5), (3, 3), (0, 3)],
        [(0, 0), (1, 0), (1, 1), (0, 1)],
        [(0, 0), (2, 0), (1, 0.2), (0, 2)],
    ]
    rng = np.random.default_rng(3)
    for poly in polys:
        c = polygon_complex(poly)
        dom = PolygonDomain(poly)
        pts = [c.face_point(t, rng.dirichlet([1, 1, 1])) for t in rng.integers(0, len(c.triangles), 6)]
        xy = np.array([c.xy(p) for p in pts])
        exact = dom.pairwise(xy)
        h0 = max(c.edge_len) / 4
        prev = None
        for h in (h0, h0 / 2, h0 / 4):
            D = SteinerGraph(c, h).pairwise(pts)
            assert np.all(D >= exact - 1e-9)
            if prev is not None:
                assert np.all(D <= prev + 1e-12)
            prev = D
        assert np.max(prev - exact) < np.max(SteinerGraph(c, h0).pairwise(pts) - exact) + 1e-12


def test_disconnected_unreachable():
    c = TriComplex(6, [(0, 1, 2), (3, 4, 5)], [(1, 1, 1), (1, 1, 1)])
    with pytest.raises(Unreachable):
        approx_distance(c, ComplexPoint.vertex(0), ComplexPoint.vertex(4), 0.5)


def test_metric_axioms_on_complex_samples():
    m = np.ones((6, 6), bool)
    m[2:4, 0:4] = False
    c = grid_complex(6, 6, mask=m)
    rng = np.random.default_rng(5)
    pts = [c.face_point(t, rng.dirichlet([1, 1, 1])) for t in rng.integers(0, len(c.triangles), 15)]
    h = 0.25
    D = SteinerGraph(c, h).pairwise(pts)
    assert np.array_equal(D, D.T)
    assert np.all(D[:, :, None] <= D[:, None, :] + D[None, :, :].transpose(0, 2, 1) + 4 * h)


def test_ear_clipping_covers_polygon():
    poly = np.array([(0, 0), (4, 0), (4, 3), (2.5, 1.2), (1.5, 3.2), (0, 2.5), (1, 1.5)], float)
    tris = triangulate_simple_polygon(poly)
    assert len(tris) == len(poly) - 2
    area = sum(abs(PolygonDomain(poly[[a, b, c]]).area) for a, b, c in tris)
    assert area == pytest.approx(PolygonDomain(poly).area)


def test_json_round_trip():
    c = grid_complex(2, 2)
    d = TriComplex.from_json(c.to_json())
    assert np.array_equal(d.triangles, c.triangles)
    assert np.allclose(d.lengths, c.lengths)
