"""Closed-form geometry of the model surfaces of constant curvature.

Points live on the normalized surface of curvature sign(k) in {-1, 0, +1}:

* k = 0  -- the plane, chart ``(x, y)``;
* k = +1 -- the unit sphere in R^3, chart ``(x, y, z)``;
* k = -1 -- the upper sheet of the hyperboloid ``x^2 + y^2 - t^2 = -1``,
  chart ``(x, y, t)`` with ``t >= 1``.

An arbitrary real curvature is handled by rescaling: a length ``L`` on the
surface of curvature ``k`` is ``L * sqrt(|k|)`` on the normalized surface.
All public functions take and return lengths in the caller's (unnormalized)
units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (InvalidModelPoint, NonUniqueGeodesic, NotATriangle,
                     PerimeterTooLarge)

# relative slack on the triangle inequality before inputs are rejected
TRIANGLE_TOL = 1e-10
POINT_TOL = 1e-12


@dataclass(frozen=True)
class Kappa:
    value: float

    @property
    def sign(self) -> int:
        return (self.value > 0) - (self.value < 0)

    @property
    def scale(self) -> float:
        """Factor turning caller lengths into normalized lengths."""
        return math.sqrt(abs(self.value)) if self.value else 1.0

    @property
    def diameter(self) -> float:
        """D_k: pi / sqrt(k) for k > 0, infinite otherwise."""
        return math.pi / self.scale if self.value > 0 else math.inf

    def normalize(self, length: float) -> float:
        return length * self.scale

    def denormalize(self, length: float) -> float:
        return length / self.scale


def as_kappa(k) -> Kappa:
    return k if isinstance(k, Kappa) else Kappa(float(k))


def _mink(p, q) -> float:
    return p[0] * q[0] + p[1] * q[1] - p[2] * q[2]


@dataclass(frozen=True)
class ModelPoint:
    sign: int
    coords: tuple

    def __post_init__(self):
        c = self.coords
        if self.sign == 0:
            if len(c) != 2 or not all(map(math.isfinite, c)):
                raise InvalidModelPoint(f"planar point needs 2 finite coordinates, got {c}")
        elif self.sign == 1:
            if len(c) != 3 or abs(c[0] * c[0] + c[1] * c[1] + c[2] * c[2] - 1.0) > POINT_TOL * 10:
                raise InvalidModelPoint(f"not a unit vector: {c}")
        elif self.sign == -1:
            if len(c) != 3 or c[2] < 1.0 - POINT_TOL:
                raise InvalidModelPoint(f"not on the upper hyperboloid sheet: {c}")
            # absolute error of the Minkowski form grows like t^2
            if abs(_mink(c, c) + 1.0) > POINT_TOL * 10 * max(1.0, c[2] * c[2]):
                raise InvalidModelPoint(f"Minkowski norm != -1: {c}")
        else:
            raise InvalidModelPoint(f"bad curvature sign {self.sign}")

    def __iter__(self):
        return iter(self.coords)


def model_point(k, coords) -> ModelPoint:
    return ModelPoint(as_kappa(k).sign, tuple(float(x) for x in coords))


def origin(k) -> ModelPoint:
    s = as_kappa(k).sign
    return ModelPoint(s, (0.0, 0.0) if s == 0 else (0.0, 0.0, 1.0))


def _check_same(k: Kappa, *pts):
    for p in pts:
        if not isinstance(p, ModelPoint) or p.sign != k.sign:
            raise InvalidModelPoint(f"point {p!r} does not belong to the surface of curvature {k.value}")


# --- normalized-surface kernels (sign only, unit curvature) -----------------

def _dist_n(sign: int, p, q) -> float:
    if sign == 0:
        return math.hypot(p[0] - q[0], p[1] - q[1])
    if sign == 1:
        cx = p[1] * q[2] - p[2] * q[1]
        cy = p[2] * q[0] - p[0] * q[2]
        cz = p[0] * q[1] - p[1] * q[0]
        return math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz),
                          p[0] * q[0] + p[1] * q[1] + p[2] * q[2])
    dx, dy, dt = p[0] - q[0], p[1] - q[1], p[2] - q[2]
    chord2 = dx * dx + dy * dy - dt * dt
    # <p-q, p-q> = 4 sinh^2(d/2); stable for nearby points
    return 2.0 * math.asinh(math.sqrt(max(chord2, 0.0)) / 2.0)


def _exp_n(sign: int, r: float, theta: float) -> tuple:
    """Point at distance r from the chart origin in direction theta."""
    c, s = math.cos(theta), math.sin(theta)
    if sign == 0:
        return (r * c, r * s)
    if sign == 1:
        sr = math.sin(r)
        return (sr * c, sr * s, math.cos(r))
    sr = math.sinh(r)
    return (sr * c, sr * s, math.cosh(r))


def _f(sign: int):
    return (lambda x: x) if sign == 0 else (math.sin if sign == 1 else math.sinh)


def _angle_n(sign: int, opp: float, a1: float, a2: float) -> float:
    """Half-angle law of cosines; robust near 0 and pi."""
    if a1 <= 0.0 or a2 <= 0.0:
        return 0.0
    f = _f(sign)
    s = 0.5 * (opp + a1 + a2)
    num = max(f(s - a1), 0.0) * max(f(s - a2), 0.0)
    den = max(f(s), 0.0) * max(f(s - opp), 0.0)
    if num == 0.0 and den == 0.0:
        return 0.0
    return 2.0 * math.atan2(math.sqrt(num), math.sqrt(den))


def _side_n(sign: int, a1: float, a2: float, angle: float) -> float:
    """Opposite side from two sides and the included angle (haversine forms)."""
    h = math.sin(angle / 2.0) ** 2
    if sign == 0:
        d = a1 - a2
        return math.sqrt(d * d + 4.0 * a1 * a2 * h)
    if sign == 1:
        hv = math.sin((a1 - a2) / 2.0) ** 2 + math.sin(a1) * math.sin(a2) * h
        return 2.0 * math.asin(math.sqrt(min(max(hv, 0.0), 1.0)))
    hv = math.sinh((a1 - a2) / 2.0) ** 2 + math.sinh(a1) * math.sinh(a2) * h
    return 2.0 * math.asinh(math.sqrt(max(hv, 0.0)))


def _normalize(sign: int, v) -> tuple:
    if sign == 0:
        return (float(v[0]), float(v[1]))
    if sign == 1:
        n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
        return (v[0] / n, v[1] / n, v[2] / n)
    n = math.sqrt(-_mink(v, v))
    return (v[0] / n, v[1] / n, v[2] / n)


def _geo_n(sign: int, p, q, t: float) -> tuple:
    if t == 0.0:
        return tuple(p)
    if t == 1.0:
        return tuple(q)
    if sign == 0:
        return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))
    d = _dist_n(sign, p, q)
    if d < 1e-15:
        return tuple(p)
    if sign == 1:
        if math.pi - d < 1e-12:
            raise NonUniqueGeodesic("antipodal points have no unique geodesic")
        a, b = math.sin((1.0 - t) * d) / math.sin(d), math.sin(t * d) / math.sin(d)
    else:
        a, b = math.sinh((1.0 - t) * d) / math.sinh(d), math.sinh(t * d) / math.sinh(d)
    return _normalize(sign, [a * p[i] + b * q[i] for i in range(3)])


def _check_triangle(k: Kappa, a: float, b: float, c: float):
    if min(a, b, c) < 0 or not all(map(math.isfinite, (a, b, c))):
        raise NotATriangle(f"side lengths must be finite and nonnegative: {(a, b, c)}")
    per = a + b + c
    slack = TRIANGLE_TOL * max(per, 1e-300)
    if a > b + c + slack or b > a + c + slack or c > a + b + slack:
        raise NotATriangle(f"triangle inequality violated by {(a, b, c)}")
    if k.sign > 0 and k.normalize(per) >= 2.0 * math.pi:
        raise PerimeterTooLarge(f"perimeter {per} >= 2 D_k = {2 * k.diameter}")


# --- public API ---------------------------------------------------------------

def model_distance(k, p: ModelPoint, q: ModelPoint) -> float:
    k = as_kappa(k)
    _check_same(k, p, q)
    return k.denormalize(_dist_n(k.sign, p.coords, q.coords))


def comparison_angle(k, opposite: float, adj1: float, adj2: float) -> float:
    """Angle between the sides ``adj1`` and ``adj2`` of the comparison triangle."""
    k = as_kappa(k)
    _check_triangle(k, opposite, adj1, adj2)
    s = k.scale
    return _angle_n(k.sign, opposite * s, adj1 * s, adj2 * s)


def opposite_side(k, adj1: float, adj2: float, angle: float) -> float:
    """Inverse of :func:`comparison_angle` with the two adjacent sides fixed."""
    k = as_kappa(k)
    s = k.scale
    return _side_n(k.sign, adj1 * s, adj2 * s, angle) / s


def comparison_triangle(k, a: float, b: float, c: float):
    """Comparison triangle (P0, P1, P2) with |P0P1| = a, |P0P2| = b, |P1P2| = c.

    Canonical placement: P0 at the chart origin, P1 on the positive x-axis,
    P2 in the closed upper half (y >= 0).
    """
    k = as_kappa(k)
    _check_triangle(k, a, b, c)
    s, sg = k.scale, k.sign
    a_n, b_n, c_n = a * s, b * s, c * s
    theta = _angle_n(sg, c_n, a_n, b_n)
    p0 = origin(k)
    p1 = ModelPoint(sg, _exp_n(sg, a_n, 0.0))
    p2 = ModelPoint(sg, _exp_n(sg, b_n, theta))
    return p0, p1, p2


def geodesic_point(k, p: ModelPoint, q: ModelPoint, t: float) -> ModelPoint:
    """Point at fraction ``t`` of the way from p to q along the unique geodesic."""
    k = as_kappa(k)
    _check_same(k, p, q)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return ModelPoint(k.sign, _geo_n(k.sign, p.coords, q.coords, float(t)))


def angle_at(k, apex: ModelPoint, p: ModelPoint, q: ModelPoint) -> float:
    """Angle at ``apex`` between the geodesics towards p and q."""
    k = as_kappa(k)
    sg = k.sign
    a = _dist_n(sg, apex.coords, p.coords)
    b = _dist_n(sg, apex.coords, q.coords)
    c = _dist_n(sg, p.coords, q.coords)
    return _angle_n(sg, c, a, b)


def barycentric_point(k, pts, lam) -> ModelPoint:
    """Projective barycentric combination; geodesics of the triangle map to lines.

    In the plane this is the usual affine combination; on the sphere and the
    hyperboloid the linear combination is pushed back onto the surface, which
    is the gnomonic/Klein picture of the geodesic triangle.
    """
    k = as_kappa(k)
    sg = k.sign
    dim = 2 if sg == 0 else 3
    v = [sum(lam[j] * pts[j].coords[i] for j in range(3)) for i in range(dim)]
    return ModelPoint(sg, _normalize(sg, v))


def barycentric_coords(k, pts, x: ModelPoint):
    """Inverse of :func:`barycentric_point` (coordinates sum to one)."""
    k = as_kappa(k)
    if k.sign == 0:
        m = np.array([[p.coords[0] for p in pts], [p.coords[1] for p in pts], [1.0, 1.0, 1.0]])
        rhs = np.array([x.coords[0], x.coords[1], 1.0])
        return tuple(np.linalg.solve(m, rhs))
    m = np.array([[p.coords[i] for p in pts] for i in range(3)])
    lam = np.linalg.solve(m, np.array(x.coords))
    return tuple(lam / lam.sum())


# --- batch versions (numpy arrays of normalized or caller lengths) ---------------

def model_distances(k, P, Q):
    """Distances between rows of P and Q (chart coordinates), in caller units."""
    k = as_kappa(k)
    P, Q = np.asarray(P, dtype=float), np.asarray(Q, dtype=float)
    if k.sign == 0:
        d = P - Q
        return np.hypot(d[..., 0], d[..., 1])
    if k.sign == 1:
        return np.arctan2(np.linalg.norm(np.cross(P, Q), axis=-1), np.sum(P * Q, axis=-1)) / k.scale
    d = P - Q
    chord2 = d[..., 0] ** 2 + d[..., 1] ** 2 - d[..., 2] ** 2
    return 2.0 * np.arcsinh(np.sqrt(np.maximum(chord2, 0.0)) / 2.0) / k.scale


def comparison_angles(k, opposite, adj1, adj2):
    """Batch :func:`comparison_angle` (no input validation)."""
    k = as_kappa(k)
    s = k.scale
    o, a1, a2 = (np.asarray(x, dtype=float) * s for x in (opposite, adj1, adj2))
    f = {0: lambda x: x, 1: np.sin, -1: np.sinh}[k.sign]
    h = 0.5 * (o + a1 + a2)
    num = np.maximum(f(h - a1), 0.0) * np.maximum(f(h - a2), 0.0)
    den = np.maximum(f(h), 0.0) * np.maximum(f(h - o), 0.0)
    return 2.0 * np.arctan2(np.sqrt(num), np.sqrt(den))


def comparison_triangles(k, a, b, c):
    """Batch :func:`comparison_triangle`: arrays P0, P1, P2 of chart coordinates.

    Rows violating the triangle inequality or the perimeter bound raise NotATriangle
    / PerimeterTooLarge for the first offending row.
    """
    k = as_kappa(k)
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    per = a + b + c
    slack = TRIANGLE_TOL * per
    bad = (np.minimum(np.minimum(a, b), c) < 0) | (a > b + c + slack) | (b > a + c + slack) | (c > a + b + slack)
    if bad.any():
        i = int(np.argmax(bad))
        raise NotATriangle(f"triangle inequality violated by {(a[i], b[i], c[i])}")
    if k.sign > 0 and np.any(k.normalize(1.0) * per >= 2.0 * math.pi):
        raise PerimeterTooLarge("perimeter reaches 2 D_k")
    theta = comparison_angles(k, c, a, b)
    s = k.scale
    an, bn = a * s, b * s
    n = len(a)
    if k.sign == 0:
        P0 = np.zeros((n, 2))
        P1 = np.stack([a, np.zeros(n)], axis=1)
        P2 = np.stack([b * np.cos(theta), b * np.sin(theta)], axis=1)
        return P0, P1, P2
    f, g = (np.sin, np.cos) if k.sign == 1 else (np.sinh, np.cosh)
    P0 = np.tile([0.0, 0.0, 1.0], (n, 1))
    P1 = np.stack([f(an), np.zeros(n), g(an)], axis=1)
    P2 = np.stack([f(bn) * np.cos(theta), f(bn) * np.sin(theta), g(bn)], axis=1)
    return P0, P1, P2
