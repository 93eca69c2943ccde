import math

import numpy as np
import pytest

from cat2d.rho import defect_minimum, rho, rho_table
from oracles import ambient_distance


def _sph(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def _random_defect(l0, n, rng):
    """Defect ratios of random admissible triangles built in ambient coordinates."""
    out = []
    for _ in range(n):
        a = rng.uniform(0, l0 / 2)          # |x, y|
        b = rng.uniform(1e-3, math.pi / 2)  # |z, y|
        g = rng.uniform(math.pi / 2, math.pi)
        y = np.array([0.0, 0.0, 1.0])
        x = _sph(a, 0.0)
        z = _sph(b, g)
        xz = ambient_distance(1, x, z)
        out.append((xz + b - a) / b)
    return np.array(out)


def test_short_curves_have_rho_one():
    assert rho(1.0) == 1.0
    assert rho(math.pi) == 1.0
    assert defect_minimum(3.0) == 1.0


def test_table_is_monotone_and_positive():
    grid, vals = rho_table()
    assert np.all(np.diff(vals) <= 0)
    assert np.all(vals > 0) and np.all(vals <= 1)


def test_closed_form_corner():
    """The minimum sits at |y,z| = pi/2 with a right angle at y: 2 - l0/pi."""
    grid, vals = rho_table()
    m = grid >= math.pi
    assert np.allclose(vals[m], 2 - grid[m] / math.pi, atol=1e-9)


@pytest.mark.parametrize("l0", [3.5, 4.5, 5.5, 6.0])
def test_random_triangles_never_beat_table(l0):
    rng = np.random.default_rng(int(l0 * 10))
    r = _random_defect(l0, 4000, rng)
    assert r.min() >= rho(l0) - 1e-9
    # the extremal configuration is attained, so the table is sharp
    x, z = _sph(l0 / 2, 0.0), _sph(math.pi / 2, math.pi / 2)
    b = math.pi / 2
    sharp = (ambient_distance(1, x, z) + b - l0 / 2) / b
    assert sharp == pytest.approx(defect_minimum(l0), abs=1e-9)


def test_lookup_rounds_up():
    grid, vals = rho_table()
    assert rho(grid[10] - 1e-6) == vals[10]
    assert rho(2 * math.pi - 1e-9) == 0.0
