import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cat2d.errors import InvalidPolygon, OutOfDomain
from cat2d.polydomain import PolygonDomain, point_along, polygon_domain_distance
from oracles import brute_domain_distance, dijkstra_domain_distance, in_domain

L_DOM = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
ANN_OUT = [(0, 0), (3, 0), (3, 3), (0, 3)]
ANN_HOLE = [(1, 1), (2, 1), (2, 2), (1, 2)]
# frozen from brute-force vertex-sequence enumeration (oracles.brute_domain_distance)
ANNULUS_ACROSS = 1 + math.sqrt(2)


def test_convex_is_straight():
    d = PolygonDomain([(0, 0), (1, 0), (1, 1), (0, 1)])
    L, path = polygon_domain_distance(d, (0.1, 0.2), (0.9, 0.7))
    assert L == pytest.approx(math.hypot(0.8, 0.5), abs=1e-15)
    assert len(path) == 2


def test_l_domain_corner():
    d = PolygonDomain(L_DOM)
    L, path = d.shortest_path((1.5, 0.5), (0.5, 1.5))
    assert L == pytest.approx(2 * math.sqrt(0.5), abs=1e-12)
    # the straight chord grazes the reflex corner (1, 1)
    assert point_along(path, 0.5) == pytest.approx((1.0, 1.0))
    assert L == pytest.approx(brute_domain_distance(L_DOM, [], (1.5, 0.5), (0.5, 1.5)), abs=1e-9)


def test_annulus_around_hole():
    d = PolygonDomain(ANN_OUT, [ANN_HOLE])
    L, path = d.shortest_path((0.5, 1.5), (2.5, 1.5))
    assert L == pytest.approx(ANNULUS_ACROSS, abs=1e-12)
    assert L == pytest.approx(brute_domain_distance(ANN_OUT, [ANN_HOLE], (0.5, 1.5), (2.5, 1.5), max_len=3), abs=1e-9)


def test_validation():
    with pytest.raises(InvalidPolygon):
        PolygonDomain([(0, 0), (1, 1), (1, 0), (0, 1)])
    with pytest.raises(InvalidPolygon):
        PolygonDomain(ANN_OUT, [[(2, 2), (4, 2), (4, 4), (2, 4)]])
    with pytest.raises(OutOfDomain):
        PolygonDomain(L_DOM).shortest_path((1.5, 1.5), (0.1, 0.1))


def test_orientation_normalised():
    d = PolygonDomain(ANN_OUT[::-1], [ANN_HOLE[::-1]])
    assert d.area == pytest.approx(8.0)


def _random_points(d, n, rng):
    lo, hi = d.outer.min(0), d.outer.max(0)
    P = rng.uniform(lo, hi, (4 * n, 2))
    return P[d.contains_many(P)][:n]


@pytest.mark.parametrize("outer,holes", [
    (L_DOM, []),
    (ANN_OUT, [ANN_HOLE]),
    ([(0, 0), (4, 0), (4, 3), (2.5, 1.2), (1.5, 3.2), (0, 2.5), (1, 1.5)], []),
    ([(0, 0), (5, 0), (5, 4), (0, 4)], [[(1, 1), (2, 1), (2, 3), (1, 3)], [(3, 0.5), (4, 0.5), (3.5, 2.5)]]),
])
def test_distances_match_shapely_dijkstra(outer, holes):
    d = PolygonDomain(outer, holes)
    rng = np.random.default_rng(1)
    P = _random_points(d, 12, rng)
    D = d.pairwise(P)
    for i in range(0, len(P), 3):
        for j in range(len(P)):
            want = dijkstra_domain_distance(outer, holes, tuple(P[i]), tuple(P[j]))
            assert D[i, j] == pytest.approx(want, abs=1e-9)
    # metric axioms
    assert np.array_equal(D, D.T)
    assert np.all(D[:, :, None] <= D[:, None, :] + D[None, :, :].transpose(0, 2, 1) + 1e-9)


def test_paths_stay_inside():
    d = PolygonDomain(ANN_OUT, [ANN_HOLE])
    rng = np.random.default_rng(2)
    P = _random_points(d, 20, rng)
    for i in range(10):
        L, path = d.shortest_path(P[i], P[i + 10])
        path = np.array(path)
        assert sum(np.hypot(*np.diff(path, axis=0).T)) == pytest.approx(L)
        for a, b in zip(path, path[1:]):
            assert in_domain(ANN_OUT, [ANN_HOLE], tuple((a + b) / 2))


def test_geodesic_points_on_path():
    d = PolygonDomain(L_DOM)
    P = np.array([[1.5, 0.5], [1.8, 0.2]])
    Q = np.array([[0.5, 1.5], [0.2, 1.9]])
    M = d.geodesic_points(P, Q, np.array([0.3, 0.5]))
    for k in range(2):
        L = d.distance(P[k], Q[k])
        t = (0.3, 0.5)[k]
        assert d.distance(P[k], M[k]) == pytest.approx(t * L, abs=1e-12)
        assert d.distance(M[k], Q[k]) == pytest.approx((1 - t) * L, abs=1e-12)


def test_point_along():
    path = [(0, 0), (1, 0), (1, 1)]
    assert tuple(point_along(path, 0.75)) == pytest.approx((1, 0.5))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.floats(0.02, 0.98))
def test_boundary_points_see_along_edges(a, b, c, e):
    """Points on the boundary near a reflex corner (short, almost tangent segments)."""
    d = PolygonDomain(L_DOM)
    p = np.array([1 + a, 1.0])
    q = np.array([1.0, 1 + b])
    r = np.array([1 + c * 1e-5, 1.0])
    assert d.distance(p, q) == pytest.approx(a + b, abs=1e-12)
    assert d.distance(r, q) == pytest.approx(c * 1e-5 + b, abs=1e-12)
    assert np.isfinite(d.distance(r, np.array([e, 2 - 1e-9])))
