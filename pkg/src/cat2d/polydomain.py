"""Closed planar polygonal domains with holes and their intrinsic metric.

Shortest paths inside a closed polygonal region bend only at reflex corners,
so the metric is computed on the visibility graph of the reflex vertices
(all-pairs table precomputed once) plus the query endpoints.

Two segment-in-domain tests are provided.  ``visible`` is vectorized and
classifies computed (rounded) points with a length tolerance of
``1e-12 * diam`` so that points produced by interpolation along an edge count
as lying on it.  ``segment_in_domain_exact`` works on exact rationals and is
used to re-verify reported witnesses and accepted cuts.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import InvalidPolygon, OutOfDomain, Unreachable
from .predicates import (is_simple_polygon, orient, point_in_polygon,
                         segments_intersect, signed_area)

ANG_TOL = 1e-12
_CHUNK = 2_000_000


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


class PolygonDomain:
    """Closed region bounded by a CCW outer ring with CW holes.

    Input rings are re-oriented as needed.  Validation uses exact predicates:
    every ring simple, holes pairwise disjoint and strictly inside the outer ring.
    """

    def __init__(self, outer, holes=(), validate=True):
        outer = np.asarray(outer, dtype=float).reshape(-1, 2)
        holes = [np.asarray(h, dtype=float).reshape(-1, 2) for h in holes]
        if validate:
            self._validate(outer, holes)
        if signed_area(outer) < 0:
            outer = outer[::-1].copy()
        holes = [h[::-1].copy() if signed_area(h) > 0 else h for h in holes]
        self.outer = outer
        self.holes = tuple(holes)
        self.rings = (outer,) + self.holes
        self._build()

    # -- construction ---------------------------------------------------------

    @staticmethod
    def _validate(outer, holes):
        if not is_simple_polygon(outer):
            raise InvalidPolygon("outer ring is not a simple polygon")
        for k, h in enumerate(holes):
            if not is_simple_polygon(h):
                raise InvalidPolygon(f"hole {k} is not a simple polygon")
        rings = [outer] + holes
        segs = []
        for r, ring in enumerate(rings):
            n = len(ring)
            for i in range(n):
                segs.append((r, tuple(ring[i]), tuple(ring[(i + 1) % n])))
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                if segs[i][0] == segs[j][0]:
                    continue
                if segments_intersect(segs[i][1], segs[i][2], segs[j][1], segs[j][2]):
                    raise InvalidPolygon("rings touch or cross each other")
        outer_l = [tuple(p) for p in outer]
        for k, h in enumerate(holes):
            if point_in_polygon(tuple(h[0]), outer_l) != 1:
                raise InvalidPolygon(f"hole {k} is not inside the outer ring")
            for m, g in enumerate(holes):
                if m != k and point_in_polygon(tuple(h[0]), [tuple(p) for p in g]) == 1:
                    raise InvalidPolygon(f"hole {k} is nested in hole {m}")

    def _build(self):
        A, B, prev = [], [], []
        ring_of = []
        for r, ring in enumerate(self.rings):
            n = len(ring)
            for i in range(n):
                A.append(ring[i])
                B.append(ring[(i + 1) % n])
                prev.append(ring[(i - 1) % n])
                ring_of.append(r)
        self.A = np.array(A)
        self.B = np.array(B)
        self.P = np.array(prev)
        self.ring_of = np.array(ring_of)
        e = self.B - self.A
        self.edge_len = np.hypot(e[:, 0], e[:, 1])
        self.e_n = e / self.edge_len[:, None]
        ein = self.A - self.P
        self.ein_n = ein / np.hypot(ein[:, 0], ein[:, 1])[:, None]
        turn = _cross(self.ein_n, self.e_n)
        # 1 convex, -1 reflex, 0 straight
        self.kind = np.where(turn > ANG_TOL, 1, np.where(turn < -ANG_TOL, -1, 0))
        lo = np.min(self.A, axis=0)
        hi = np.max(self.A, axis=0)
        self.scale = max(float(np.hypot(*(hi - lo))), 1e-300)
        self.tol = 1e-12 * self.scale
        self.reflex_idx = np.nonzero(self.kind == -1)[0]
        self.nodes = self.A[self.reflex_idx]
        R = len(self.nodes)
        if R:
            ii, jj = np.meshgrid(np.arange(R), np.arange(R), indexing="ij")
            vis = self.visible(self.nodes[ii.ravel()], self.nodes[jj.ravel()]).reshape(R, R)
            w = np.hypot(*(self.nodes[ii] - self.nodes[jj]).transpose(2, 0, 1))
            graph = np.where(vis, w, np.inf)
            np.fill_diagonal(graph, 0.0)
            # csgraph treats 0 as "no edge"; coincident nodes cannot happen in a simple ring
            self.node_dist, self.node_pred = shortest_path(
                np.where(np.isinf(graph), 0.0, graph), method="FW", directed=False,
                return_predecessors=True)
        else:
            self.node_dist = np.zeros((0, 0))
            self.node_pred = np.zeros((0, 0), dtype=int)

    # -- basic queries ------------------------------------------------------

    @property
    def area(self) -> float:
        return signed_area(self.outer) + sum(signed_area(h) for h in self.holes)

    def locate(self, pt) -> int:
        """1 interior, 0 boundary (within tolerance), -1 outside; exact where it matters."""
        pt = (float(pt[0]), float(pt[1]))
        if self.boundary_distance(np.array([pt]))[0] <= self.tol:
            return 0
        o = point_in_polygon(pt, [tuple(p) for p in self.outer])
        if o < 0:
            return -1
        for h in self.holes:
            if point_in_polygon(pt, [tuple(p) for p in h]) > 0:
                return -1
        return 1

    def contains(self, pt) -> bool:
        return self.locate(pt) >= 0

    def contains_many(self, pts) -> np.ndarray:
        """Vectorized closed-domain membership (even-odd rule, boundary within tol)."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        x, y = pts[:, 0:1], pts[:, 1:2]
        ay, by = self.A[None, :, 1], self.B[None, :, 1]
        ax, bx = self.A[None, :, 0], self.B[None, :, 0]
        cond = (ay > y) != (by > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = ax + (y - ay) * (bx - ax) / (by - ay)
        inside = (np.sum(cond & (x < xint), axis=1) % 2) == 1
        return inside | (self.boundary_distance(pts) <= self.tol)

    def boundary_distance(self, pts) -> np.ndarray:
        """Euclidean distance from each point to the boundary."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = np.empty(len(pts))
        step = max(1, _CHUNK // max(len(self.A), 1))
        for s in range(0, len(pts), step):
            p = pts[s:s + step, None, :]
            rel = p - self.A[None]
            t = np.clip(np.sum(rel * self.e_n[None], axis=2), 0.0, self.edge_len[None])
            foot = self.A[None] + t[..., None] * self.e_n[None]
            out[s:s + step] = np.min(np.hypot(*(p - foot).transpose(2, 0, 1)), axis=1)
        return out

    # -- segment visibility -------------------------------------------------

    def _in_cone(self, j, x, atol=ANG_TOL):
        """Direction(s) x (unit, shape (..., 2)) inside the closed interior cone at vertex j."""
        a = _cross(self.e_n[j], x) >= -atol
        b = _cross(self.ein_n[j], x) >= -atol
        k = self.kind[j]
        return np.where(k == 1, a & b, np.where(k == -1, a | b, a))

    def visible(self, P, Q) -> np.ndarray:
        """Closed segments P[k]Q[k] contained in the closed domain (endpoints assumed inside)."""
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        Q = np.asarray(Q, dtype=float).reshape(-1, 2)
        P, Q = np.broadcast_arrays(P, Q)
        K = len(P)
        out = np.empty(K, dtype=bool)
        step = max(1, _CHUNK // max(len(self.A), 1))
        for s in range(0, K, step):
            out[s:s + step] = self._visible_chunk(P[s:s + step], Q[s:s + step])
        return out

    def _visible_chunk(self, P, Q):
        tol = self.tol
        d = Q - P
        L = np.hypot(d[:, 0], d[:, 1])
        short = L <= tol
        dn = d / np.where(short, 1.0, L)[:, None]
        A, B = self.A[None], self.B[None]
        Pm, Qm, dm = P[:, None, :], Q[:, None, :], dn[:, None, :]
        sA = _cross(dm, A - Pm)
        sB = _cross(dm, B - Pm)
        sP = _cross(self.e_n[None], Pm - A)
        sQ = _cross(self.e_n[None], Qm - A)
        zA, zB = np.abs(sA) <= tol, np.abs(sB) <= tol
        zP, zQ = np.abs(sP) <= tol, np.abs(sQ) <= tol
        proper = (sA * sB < 0) & ~zA & ~zB & (sP * sQ < 0) & ~zP & ~zQ
        blocked = proper.any(axis=1)

        # direction of a short segment is only known to about tol / L radians
        atol = np.maximum(ANG_TOL, tol / np.where(short, 1.0, L))[:, None]
        j = np.arange(len(self.A))[None, :]
        # vertex A_j strictly inside the segment
        tA = np.sum((A - Pm) * dm, axis=2)
        mid = zA & (tA > tol) & (tA < L[:, None] - tol)
        if mid.any():
            fwd = np.broadcast_to(dm, mid.shape + (2,))
            ok = self._in_cone(j, fwd, atol) & self._in_cone(j, -fwd, atol)
            blocked |= (mid & ~ok).any(axis=1)
        for E, dirn in ((Pm, dm), (Qm, -dm)):
            dist_v = np.hypot(*(E - A).transpose(2, 0, 1))
            at_v = dist_v <= tol
            if at_v.any():
                ok = self._in_cone(j, np.broadcast_to(dirn, at_v.shape + (2,)), atol)
                blocked |= (at_v & ~ok).any(axis=1)
            sE = _cross(self.e_n[None], E - A)
            tE = np.sum((E - A) * self.e_n[None], axis=2)
            on_e = (np.abs(sE) <= tol) & (tE > tol) & (tE < self.edge_len[None] - tol)
            if on_e.any():
                ok = _cross(self.e_n[None], np.broadcast_to(dirn, on_e.shape + (2,))) >= -atol
                blocked |= (on_e & ~ok).any(axis=1)
        return ~blocked | short

    def segment_in_domain_exact(self, p, q) -> bool:
        """Exact rational test that the closed segment pq lies in the closed domain.

        Split pq at every boundary vertex on it; reject any proper crossing;
        accept iff each piece's midpoint is in the closed domain.
        """
        p = (Fraction(p[0]), Fraction(p[1]))
        q = (Fraction(q[0]), Fraction(q[1]))
        if p == q:
            return self._locate_exact(p) >= 0
        cuts = {Fraction(0), Fraction(1)}
        dx, dy = q[0] - p[0], q[1] - p[1]
        dd = dx * dx + dy * dy
        for ring in self.rings:
            n = len(ring)
            R = [(Fraction(float(a)), Fraction(float(b))) for a, b in ring]
            for i in range(n):
                a, b = R[i], R[(i + 1) % n]
                o1, o2 = orient(p, q, a), orient(p, q, b)
                o3, o4 = orient(a, b, p), orient(a, b, q)
                if o1 * o2 < 0 and o3 * o4 < 0:
                    return False
                if o1 == 0:
                    t = ((a[0] - p[0]) * dx + (a[1] - p[1]) * dy) / dd
                    if 0 < t < 1:
                        cuts.add(t)
        ts = sorted(cuts)
        for t0, t1 in zip(ts, ts[1:]):
            tm = (t0 + t1) / 2
            m = (p[0] + tm * dx, p[1] + tm * dy)
            if self._locate_exact(m) < 0:
                return False
        return self._locate_exact(p) >= 0 and self._locate_exact(q) >= 0

    def _locate_exact(self, pt) -> int:
        rings = [[(Fraction(float(a)), Fraction(float(b))) for a, b in r] for r in self.rings]
        o = point_in_polygon(pt, rings[0])
        if o <= 0:
            return o
        for h in rings[1:]:
            oh = point_in_polygon(pt, h)
            if oh == 0:
                return 0
            if oh > 0:
                return -1
        return 1

    # -- metric -------------------------------------------------------------

    def _first_hop(self, P):
        """(K, R) Euclidean lengths P -> visible reflex nodes, inf otherwise."""
        R = len(self.nodes)
        K = len(P)
        if R == 0:
            return np.zeros((K, 0))
        Pr = np.repeat(P, R, axis=0)
        Nr = np.tile(self.nodes, (K, 1))
        vis = self.visible(Pr, Nr).reshape(K, R)
        w = np.hypot(*(P[:, None, :] - self.nodes[None]).transpose(2, 0, 1))
        return np.where(vis, w, np.inf)

    def node_distances(self, P) -> np.ndarray:
        """(K, R) intrinsic distances from points to every reflex node."""
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        H = self._first_hop(P)
        if H.shape[1] == 0:
            return H
        out = np.empty_like(H)
        step = max(1, _CHUNK // max(H.shape[1] ** 2, 1))
        for s in range(0, len(P), step):
            out[s:s + step] = np.min(H[s:s + step, :, None] + self.node_dist[None], axis=1)
        return out

    def distance_pairs(self, P, Q, P_nodes=None) -> np.ndarray:
        """Elementwise intrinsic distances |P[k], Q[k]|."""
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        Q = np.asarray(Q, dtype=float).reshape(-1, 2)
        P, Q = np.broadcast_arrays(P, Q)
        direct = np.hypot(*(P - Q).T)
        vis = self.visible(P, Q)
        out = np.where(vis, direct, np.inf)
        todo = ~vis
        if todo.any() and len(self.nodes):
            NP = self.node_distances(P[todo]) if P_nodes is None else np.broadcast_to(P_nodes, (len(P), len(self.nodes)))[todo]
            HQ = self._first_hop(Q[todo])
            out[todo] = np.min(NP + HQ, axis=1)
        return out

    def pairwise(self, pts) -> np.ndarray:
        """Symmetric matrix of intrinsic distances among ``pts``."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        n = len(pts)
        ii, jj = np.triu_indices(n, 1)
        direct = np.hypot(*(pts[ii] - pts[jj]).T)
        vis = self.visible(pts[ii], pts[jj])
        d = np.where(vis, direct, np.inf)
        if (~vis).any() and len(self.nodes):
            NP = self.node_distances(pts)
            H = self._first_hop(pts)
            bad = np.nonzero(~vis)[0]
            d[bad] = np.min(H[ii[bad]] + NP[jj[bad]], axis=1)
        D = np.zeros((n, n))
        D[ii, jj] = d
        D[jj, ii] = d
        return D

    def _check_point(self, p):
        if not self.contains(p):
            raise OutOfDomain(f"point {tuple(p)} is outside the domain")

    def shortest_path(self, p, q):
        """Exact shortest path: (length, list of polyline vertices)."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        self._check_point(p)
        self._check_point(q)
        if self.visible(p[None], q[None])[0]:
            return float(math.hypot(*(p - q))), [_t(p), _t(q)]
        if not len(self.nodes):
            raise Unreachable("no path between the points")
        HP = self._first_hop(p[None])[0]
        HQ = self._first_hop(q[None])[0]
        tot = HP[:, None] + self.node_dist + HQ[None, :]
        if not np.isfinite(tot).any():
            raise Unreachable("no path between the points")
        # lexicographic tie-break on (length, node ids)
        u, v = np.unravel_index(np.argmin(tot), tot.shape)
        seq = [v]
        while seq[-1] != u:
            seq.append(int(self.node_pred[u, seq[-1]]))
        seq.reverse()
        path = [_t(p)] + [_t(self.nodes[i]) for i in seq] + [_t(q)]
        return float(tot[u, v]), path

    def distance(self, p, q) -> float:
        return self.shortest_path(p, q)[0]

    def geodesic_points(self, P, Q, t) -> np.ndarray:
        """Points at arclength fraction t[k] of the shortest path P[k] -> Q[k]."""
        P = np.asarray(P, dtype=float).reshape(-1, 2)
        Q = np.asarray(Q, dtype=float).reshape(-1, 2)
        t = np.broadcast_to(np.asarray(t, dtype=float), (len(P),))
        out = P + t[:, None] * (Q - P)
        todo = np.nonzero(~self.visible(P, Q))[0]
        if len(todo) == 0:
            return out
        if not len(self.nodes):
            raise Unreachable("no path between the points")
        HP = self._first_hop(P[todo])
        HQ = self._first_hop(Q[todo])
        for r, k in enumerate(todo):
            tot = HP[r][:, None] + self.node_dist + HQ[r][None, :]
            u, v = np.unravel_index(np.argmin(tot), tot.shape)
            if not np.isfinite(tot[u, v]):
                raise Unreachable("no path between the points")
            seq = [v]
            while seq[-1] != u:
                seq.append(int(self.node_pred[u, seq[-1]]))
            path = np.concatenate([P[k][None], self.nodes[seq[::-1]], Q[k][None]])
            out[k] = point_along(path, float(t[k]))
        return out


def polygon_domain_distance(domain: PolygonDomain, p, q):
    """(length, polyline) of the shortest path from p to q inside ``domain``."""
    return domain.shortest_path(p, q)


def point_along(path, t: float):
    """Point at arclength fraction t of a polyline."""
    pts = np.asarray(path, dtype=float)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    total = seg.sum()
    if total == 0.0:
        return pts[0].copy()
    target = t * total
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    i = int(np.clip(np.searchsorted(cum, target, side="right") - 1, 0, len(seg) - 1))
    if seg[i] == 0.0:
        return pts[i].copy()
    u = min(max((target - cum[i]) / seg[i], 0.0), 1.0)
    return pts[i] + u * (pts[i + 1] - pts[i])


def _t(p) -> tuple:
    return (float(p[0]), float(p[1]))
