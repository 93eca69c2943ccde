from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import LineString, Point, Polygon

from cat2d.predicates import is_simple_polygon, orient, point_in_polygon, segments_intersect

coord = st.integers(-20, 20).map(lambda v: v / 8)
pt = st.tuples(coord, coord)


def _orient_fraction(a, b, c):
    v = (Fraction(b[0]) - Fraction(a[0])) * (Fraction(c[1]) - Fraction(a[1])) - \
        (Fraction(b[1]) - Fraction(a[1])) * (Fraction(c[0]) - Fraction(a[0]))
    return (v > 0) - (v < 0)


def test_orient_near_degenerate():
    # classic float failure: points almost on a line with large offsets
    a = (0.5, 0.5)
    b = (12.0, 12.0)
    c = (24.0, 24.0)
    assert orient(a, b, c) == 0
    c2 = (24.0, 24.000000000000004)
    assert orient(a, b, c2) == _orient_fraction(a, b, c2) == 1


@settings(max_examples=300, deadline=None)
@given(pt, pt, pt)
def test_orient_matches_rational(a, b, c):
    assert orient(a, b, c) == _orient_fraction(a, b, c)


@settings(max_examples=300, deadline=None)
@given(pt, pt, pt, pt)
def test_segment_intersection_matches_shapely(a, b, c, d):
    if a == b or c == d:
        return
    assert segments_intersect(a, b, c, d) == LineString([a, b]).intersects(LineString([c, d]))


def test_point_in_polygon():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert point_in_polygon((0.5, 0.5), sq) == 1
    assert point_in_polygon((1, 0.5), sq) == 0
    assert point_in_polygon((2, 0.5), sq) == -1


@settings(max_examples=200, deadline=None)
@given(st.lists(pt, min_size=3, max_size=7, unique=True))
def test_simplicity_matches_shapely(poly):
    shp = Polygon(poly)
    if shp.area == 0:
        return
    assert is_simple_polygon(poly) == (shp.is_valid and shp.exterior.is_simple)


def test_figure_eight_not_simple():
    assert not is_simple_polygon([(0, 0), (1, 1), (1, 0), (0, 1)])


@settings(max_examples=200, deadline=None)
@given(pt)
def test_pip_matches_shapely(p):
    poly = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
    shp = Polygon(poly)
    want = 0 if shp.boundary.intersects(Point(p)) else (1 if shp.contains(Point(p)) else -1)
    assert point_in_polygon(p, poly) == want
