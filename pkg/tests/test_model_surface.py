import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cat2d.errors import InvalidModelPoint, NonUniqueGeodesic, NotATriangle, PerimeterTooLarge
from cat2d.model_surface import (Kappa, angle_at, comparison_angle, comparison_triangle, geodesic_point,
                                 model_distance, model_point, opposite_side)
from oracles import ambient_distance, law_of_cosines_angle


def test_kappa_diameter_and_scale():
    assert Kappa(1).diameter == pytest.approx(math.pi)
    assert Kappa(4).diameter == pytest.approx(math.pi / 2)
    assert math.isinf(Kappa(0).diameter) and math.isinf(Kappa(-2).diameter)
    k = Kappa(-3.0)
    assert k.denormalize(k.normalize(1.7)) == pytest.approx(1.7, rel=1e-15)


def test_distance_examples():
    assert model_distance(0, model_point(0, (0, 0)), model_point(0, (3, 4))) == 5.0
    e1, e2 = model_point(1, (1, 0, 0)), model_point(1, (0, 1, 0))
    assert model_distance(1, e1, e2) == pytest.approx(math.pi / 2, abs=1e-15)
    h = model_point(-1, (math.sinh(1), 0, math.cosh(1)))
    assert model_distance(-1, model_point(-1, (0, 0, 1)), h) == pytest.approx(1.0, abs=1e-14)


def test_invalid_points_rejected():
    with pytest.raises(InvalidModelPoint):
        model_point(1, (1, 1, 0))
    with pytest.raises(InvalidModelPoint):
        model_point(-1, (0, 0, -1))
    with pytest.raises(InvalidModelPoint):
        model_distance(0, model_point(0, (0, 0)), model_point(1, (0, 0, 1)))


def test_comparison_triangle_examples():
    assert comparison_angle(0, 5, 3, 4) == pytest.approx(math.pi / 2, abs=1e-15)
    for a in comparison_triangle(1, *(3 * [math.pi / 2])):
        assert np.linalg.norm(a.coords) == pytest.approx(1.0)
    assert comparison_angle(1, math.pi / 2, math.pi / 2, math.pi / 2) == pytest.approx(math.pi / 2)
    # degenerate: collinear, angle 0 at the outer vertices and pi in the middle
    assert comparison_angle(0, 1, 2, 1) == pytest.approx(0.0, abs=1e-7)
    assert comparison_angle(0, 2, 1, 1) == pytest.approx(math.pi)
    with pytest.raises(NotATriangle):
        comparison_triangle(0, 1, 1, 3)
    with pytest.raises(PerimeterTooLarge):
        comparison_triangle(1, 2.2, 2.2, 2.2)


def test_canonical_placement():
    p0, p1, p2 = comparison_triangle(0, 2, 3, 4)
    assert p0.coords == (0.0, 0.0) and p1.coords[1] == 0.0 and p1.coords[0] > 0 and p2.coords[1] >= 0


def test_geodesic_point_examples():
    p, q = model_point(0, (0, 0)), model_point(0, (2, 0))
    assert geodesic_point(0, p, q, 0.5).coords == pytest.approx((1, 0))
    assert geodesic_point(0, p, q, 0.0).coords == p.coords
    e1, e2 = model_point(1, (1, 0, 0)), model_point(1, (0, 1, 0))
    m = geodesic_point(1, e1, e2, 0.5).coords
    assert m == pytest.approx((1 / math.sqrt(2), 1 / math.sqrt(2), 0))
    with pytest.raises(NonUniqueGeodesic):
        geodesic_point(1, e1, model_point(1, (-1, 0, 0)), 0.5)


sides = st.floats(0.05, 1.0)


def _tri(kappa, u, v, w):
    """Random valid triangle scaled to be well inside the perimeter bound."""
    a, b = u, v
    lo, hi = abs(a - b), a + b
    c = lo + (hi - lo) * (0.02 + 0.96 * w)
    if kappa > 0:
        f = min(1.0, 0.95 * 2 * math.pi / (a + b + c) / math.sqrt(kappa))
        a, b, c = a * f, b * f, c * f
    return a, b, c


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([-1.0, 0.0, 1.0, 0.25, -4.0]), sides, sides, st.floats(0, 1))
def test_round_trip_against_ambient_oracle(kappa, u, v, w):
    a, b, c = _tri(kappa, u * 3, v * 3, w)
    pts = comparison_triangle(kappa, a, b, c)
    k = Kappa(kappa)
    got = [ambient_distance(k.sign, pts[i].coords, pts[j].coords) / k.scale for i, j in ((0, 1), (0, 2), (1, 2))]
    assert got == pytest.approx([a, b, c], abs=1e-10)
    th = comparison_angle(kappa, c, a, b)
    assert th == pytest.approx(law_of_cosines_angle(k.sign, c * k.scale, a * k.scale, b * k.scale), abs=1e-7)
    assert opposite_side(kappa, a, b, th) == pytest.approx(c, abs=1e-10)
    assert angle_at(kappa, *pts) == pytest.approx(th, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([-1.0, 0.0, 1.0]), sides, sides, st.floats(0, 1), st.floats(0, 1))
def test_geodesic_point_distance(kappa, u, v, w, t):
    a, b, c = _tri(kappa, u, v, w)
    _, p, q = comparison_triangle(kappa, a, b, c)
    m = geodesic_point(kappa, p, q, t)
    assert model_distance(kappa, p, m) == pytest.approx(t * c, abs=1e-10)
    assert model_distance(kappa, m, q) == pytest.approx((1 - t) * c, abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(sides, sides, st.floats(0, 1), st.floats(0.2, 5.0))
def test_rescaling_covariance(u, v, w, s):
    a, b, c = _tri(1.0, u, v, w)
    k1 = comparison_angle(1.0, c, a, b)
    ks = comparison_angle(1.0 / s ** 2, c * s, a * s, b * s)
    assert ks == pytest.approx(k1, rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([-1.0, 0.0, 1.0]), sides, sides)
def test_angle_monotone_in_opposite(kappa, a, b):
    lo, hi = abs(a - b), a + b
    cs = np.linspace(lo, hi, 12)[1:-1]
    ang = [comparison_angle(kappa, c, a, b) for c in cs]
    assert all(x < y for x, y in zip(ang, ang[1:]))
