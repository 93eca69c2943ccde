"""Defect constant for spherical triangles with an obtuse angle.

rho(l0) is the largest constant with

    |x,y| <= |x,z| + |z,y| - rho |z,y|

for every spherical triangle with |y,z| <= pi/2, |x,y| <= l0/2 and angle at
y at least pi/2.  It equals 1 while l0/2 <= pi/2 and drops to 0 as l0 -> 2 pi.
The table does not assume a formula: it is obtained by minimizing the ratio
(|x,z| + |z,y| - |x,y|) / |z,y| on a dense grid and polishing the best grid
point with a bounded local optimizer.  (Numerically the minimum sits at the
corner |y,z| = pi/2 with a right angle at y, where the ratio is 2 - l0/pi;
the tests use this as an independent check.)  The table is made monotone by a
running minimum and queries round l0 up to the next grid node, so a looked-up
value never exceeds the minimum at the queried l0 by more than the polish
accuracy.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

TABLE_SIZE = 64


def _side(a, b, gamma):
    """Third side of a spherical triangle from two sides and the included angle (haversine)."""
    h = np.sin((a - b) / 2) ** 2 + np.sin(a) * np.sin(b) * np.sin(gamma / 2) ** 2
    return 2 * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def _ratio(a, b, gamma):
    return (_side(a, b, gamma) + b - a) / b


def defect_minimum(l0: float, n: int = 96) -> float:
    """min of the defect ratio over the constraint set for a given l0 < 2 pi."""
    if not 0 < l0 < 2 * math.pi:
        raise ValueError("l0 must lie in (0, 2 pi)")
    amax = l0 / 2
    if amax <= math.pi / 2:
        return 1.0
    a = np.linspace(math.pi / 2, amax, n)
    b = np.linspace(1e-3, math.pi / 2, n)
    g = np.linspace(math.pi / 2, math.pi, n // 2)
    A, B, G = np.meshgrid(a, b, g, indexing="ij")
    R = _ratio(A, B, G)
    k = np.unravel_index(np.argmin(R), R.shape)
    x0 = np.array([A[k], B[k], G[k]])
    res = minimize(lambda v: float(_ratio(v[0], v[1], v[2])), x0, method="L-BFGS-B",
                   bounds=[(math.pi / 2, amax), (1e-6, math.pi / 2), (math.pi / 2, math.pi)])
    return float(min(R[k], res.fun, 1.0))


@lru_cache(maxsize=None)
def rho_table(size: int = TABLE_SIZE):
    """(l0 grid, monotone non-increasing rho values)."""
    grid = np.linspace(2 * math.pi / size, 2 * math.pi * (1 - 1 / (4 * size)), size)
    vals = np.array([defect_minimum(float(l)) for l in grid])
    return grid, np.minimum.accumulate(vals)


def rho(l0: float) -> float:
    """Conservative table lookup of rho(l0) for curvature 1 (rounds l0 up)."""
    if l0 <= math.pi:
        return 1.0
    grid, vals = rho_table()
    i = int(np.searchsorted(grid, l0, side="left"))
    if i >= len(grid):
        return 0.0
    return float(vals[i])
