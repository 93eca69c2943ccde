"""Exact planar predicates.

Orientation is evaluated in floating point first and re-evaluated with
rational arithmetic whenever the float result is within its error bound, so
the returned sign is always the sign of the exact determinant of the given
(double precision) inputs.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

# Shewchuk's bound for the 2x2 orientation determinant
_ERRBOUND = 3.3306690738754716e-16


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = map(Fraction, (ax, ay, bx, by, cx, cy))
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def orient(a, b, c) -> int:
    """+1 if a, b, c turn left, -1 if right, 0 if collinear."""
    l = (b[0] - a[0]) * (c[1] - a[1])
    r = (b[1] - a[1]) * (c[0] - a[0])
    det = l - r
    bound = _ERRBOUND * (abs(l) + abs(r))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    if isinstance(a[0], Fraction) or isinstance(c[0], Fraction) or isinstance(b[0], Fraction):
        return _orient_exact(a[0], a[1], b[0], b[1], c[0], c[1])
    return _orient_exact(float(a[0]), float(a[1]), float(b[0]), float(b[1]), float(c[0]), float(c[1]))


def _between(a, b, p) -> bool:
    """p collinear with segment ab: is it on the closed segment?"""
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def on_segment(a, b, p) -> bool:
    return orient(a, b, p) == 0 and _between(a, b, p)


def segments_intersect(a, b, c, d) -> bool:
    """Closed segments ab and cd share at least one point."""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and _between(a, b, c):
        return True
    if o2 == 0 and _between(a, b, d):
        return True
    if o3 == 0 and _between(c, d, a):
        return True
    if o4 == 0 and _between(c, d, b):
        return True
    return False


def segments_cross_properly(a, b, c, d) -> bool:
    """Interiors cross at a single point that is interior to both segments."""
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def signed_area(poly) -> float:
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def point_in_polygon(pt, poly) -> int:
    """Exact location of ``pt`` w.r.t. a simple polygon: 1 inside, 0 on boundary, -1 outside.

    Winding-number test with exact orientation; orientation of ``poly`` may be
    either way.
    """
    n = len(poly)
    wn = 0
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        o = orient(a, b, pt)
        if o == 0 and _between(a, b, pt):
            return 0
        if a[1] <= pt[1]:
            if b[1] > pt[1] and o > 0:
                wn += 1
        elif b[1] <= pt[1] and o < 0:
            wn -= 1
    return 1 if wn != 0 else -1


def polygon_self_intersections(poly) -> list:
    """Index pairs of non-adjacent edges that touch, plus adjacent edges that overlap.

    Float screening with a generous bound, exact re-check of every candidate.
    """
    p = np.asarray(poly, dtype=float)
    n = len(p)
    a, b = p, np.roll(p, -1, axis=0)
    # bounding-box screen
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    ov = ((lo[:, None, 0] <= hi[None, :, 0]) & (lo[None, :, 0] <= hi[:, None, 0])
          & (lo[:, None, 1] <= hi[None, :, 1]) & (lo[None, :, 1] <= hi[:, None, 1]))
    bad = []
    pts = [tuple(map(float, q)) for q in p]
    ii, jj = np.nonzero(np.triu(ov, 1))
    for i, j in zip(ii.tolist(), jj.tolist()):
        ai, bi = pts[i], pts[(i + 1) % n]
        aj, bj = pts[j], pts[(j + 1) % n]
        if j == i + 1 or (i == 0 and j == n - 1):
            # adjacent: shared vertex is fine, but they must not fold back
            shared = bi if j == i + 1 else ai
            other_i = ai if j == i + 1 else bi
            other_j = bj if j == i + 1 else aj
            if orient(other_i, shared, other_j) == 0:
                # collinear: fold-back iff the far ends lie on the same side
                v1 = (other_i[0] - shared[0], other_i[1] - shared[1])
                v2 = (other_j[0] - shared[0], other_j[1] - shared[1])
                if v1[0] * v2[0] + v1[1] * v2[1] > 0:
                    bad.append((i, j))
            continue
        if segments_intersect(ai, bi, aj, bj):
            bad.append((i, j))
    return bad


def is_simple_polygon(poly) -> bool:
    p = [tuple(map(float, q)) for q in poly]
    if len(p) < 3:
        return False
    for i in range(len(p)):
        if p[i] == p[(i + 1) % len(p)]:
            return False
    if signed_area(p) == 0.0 and all(orient(p[0], p[1], q) == 0 for q in p):
        return False
    return not polygon_self_intersections(p)
