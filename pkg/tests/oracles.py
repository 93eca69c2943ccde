"""Independent reference computations used by the tests.

Nothing here imports the package's geometry kernels: each oracle takes a
different route (ambient coordinates, brute-force enumeration, rational
arithmetic, shapely containment) so that agreement is meaningful.
"""
from __future__ import annotations

import heapq
import itertools
import math
from fractions import Fraction

import numpy as np
from shapely.geometry import LineString, Point, Polygon


# -- model surfaces via ambient coordinates ---------------------------------------------

def ambient_distance(sign, p, q):
    p, q = np.asarray(p, float), np.asarray(q, float)
    if sign == 0:
        return float(np.hypot(*(p - q)))
    if sign == 1:
        return float(math.atan2(np.linalg.norm(np.cross(p, q)), np.dot(p, q)))
    b = -(p[0] * q[0] + p[1] * q[1] - p[2] * q[2])
    return float(math.acosh(max(b, 1.0)))


def law_of_cosines_angle(sign, opp, a1, a2):
    """Angle between sides a1, a2 from the textbook cosine rules."""
    if sign == 0:
        c = (a1 * a1 + a2 * a2 - opp * opp) / (2 * a1 * a2)
    elif sign == 1:
        c = (math.cos(opp) - math.cos(a1) * math.cos(a2)) / (math.sin(a1) * math.sin(a2))
    else:
        c = (math.cosh(a1) * math.cosh(a2) - math.cosh(opp)) / (math.sinh(a1) * math.sinh(a2))
    return math.acos(max(-1.0, min(1.0, c)))


# -- planar intrinsic distance by enumeration --------------------------------------------

def _region(outer, holes=()):
    return Polygon(outer, [h for h in holes]).buffer(1e-9)


def brute_domain_distance(outer, holes, p, q, max_len=None):
    """Shortest polyline p -> vertices -> q inside the closed domain, by enumerating
    every simple vertex sequence (feasible for a handful of vertices)."""
    reg = _region(outer, holes)
    verts = [tuple(v) for v in outer] + [tuple(v) for h in holes for v in h]
    ok = lambda a, b: reg.covers(LineString([a, b])) if a != b else True
    best = math.hypot(p[0] - q[0], p[1] - q[1]) if ok(tuple(p), tuple(q)) else math.inf
    n = len(verts)
    max_len = n if max_len is None else max_len
    for r in range(1, max_len + 1):
        for seq in itertools.permutations(range(n), r):
            pts = [tuple(p)] + [verts[i] for i in seq] + [tuple(q)]
            L = sum(math.dist(a, b) for a, b in zip(pts, pts[1:]))
            if L >= best:
                continue
            if all(ok(a, b) for a, b in zip(pts, pts[1:])):
                best = L
    return best


def dijkstra_domain_path(outer, holes, p, q):
    """Visibility graph over all polygon vertices with shapely containment and heapq.

    Returns (length, list of path points)."""
    reg = _region(outer, holes)
    nodes = [tuple(p), tuple(q)] + [tuple(v) for v in outer] + [tuple(v) for h in holes for v in h]
    n = len(nodes)
    adj = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if nodes[i] == nodes[j] or reg.covers(LineString([nodes[i], nodes[j]])):
                w = math.dist(nodes[i], nodes[j])
                adj[i].append((j, w))
                adj[j].append((i, w))
    dist = [math.inf] * n
    prev = [None] * n
    dist[0] = 0.0
    pq = [(0.0, 0)]
    while pq:
        d, u = heapq.heappop(pq)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            if d + w < dist[v]:
                dist[v] = d + w
                prev[v] = u
                heapq.heappush(pq, (dist[v], v))
    path, u = [], 1
    while u is not None:
        path.append(nodes[u])
        u = prev[u]
    return dist[1], path[::-1]


def dijkstra_domain_distance(outer, holes, p, q):
    return dijkstra_domain_path(outer, holes, p, q)[0]


def walk(path, s):
    """Point at arclength s along a polyline."""
    for a, b in zip(path, path[1:]):
        L = math.dist(a, b)
        if s <= L or b == path[-1]:
            f = 0.0 if L == 0 else min(s / L, 1.0)
            return (a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]))
        s -= L
    return path[-1]


def in_domain(outer, holes, pt, tol=1e-9):
    return _region(outer, holes).buffer(tol).covers(Point(pt))


# -- spherical cap by boundary-sample graph ------------------------------------------------

def _sph(theta, phi):
    """Point at polar angle theta from the cap centre (north pole) and azimuth phi."""
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def cap_distance_graph(R, p, q, n=2000, arc_checks=64):
    """Intrinsic distance in the cap {polar angle <= R} of the unit sphere.

    Nodes: p, q and n points on the boundary circle.  Arcs: great-circle
    segments that stay in the cap (checked by sampling), and boundary-circle
    steps.  Shortest path by Dijkstra; converges from above as n grows.
    """
    zmin = math.cos(R) - 1e-9
    bd = np.array([_sph(R, 2 * math.pi * k / n) for k in range(n)])
    nodes = [np.asarray(p, float), np.asarray(q, float)] + list(bd)
    N = len(nodes)
    adj = [[] for _ in range(N)]
    step = 2 * math.pi * math.sin(R) / n
    for k in range(n):
        i, j = 2 + k, 2 + (k + 1) % n
        adj[i].append((j, step))
        adj[j].append((i, step))
    ts = np.linspace(0, 1, arc_checks)[:, None, None]
    for s in (0, 1):
        a = nodes[s]
        others = np.array([nodes[j] for j in range(N) if j != s])
        idx = [j for j in range(N) if j != s]
        ang = np.arccos(np.clip(others @ a, -1.0, 1.0))
        safe = np.where(ang < 1e-15, 1.0, ang)
        v = (np.sin((1 - ts) * safe[None, :, None]) * a[None, None, :]
             + np.sin(ts * safe[None, :, None]) * others[None]) / np.sin(safe)[None, :, None]
        ok = (ang < 1e-15) | np.all(v[..., 2] >= zmin, axis=0)
        for j, good, w in zip(idx, ok, ang):
            if good:
                adj[s].append((j, float(w)))
                adj[j].append((s, float(w)))
        # a point on the boundary circle also walks along it
        if abs(a[2] - math.cos(R)) < 1e-12:
            phi = math.atan2(a[1], a[0]) % (2 * math.pi)
            k = int(phi / (2 * math.pi) * n) % n
            for kk, dphi in ((k, phi - 2 * math.pi * k / n), ((k + 1) % n, 2 * math.pi * (k + 1) / n - phi)):
                w = math.sin(R) * abs(dphi)
                adj[s].append((2 + kk, w))
                adj[2 + kk].append((s, w))
    dist = [math.inf] * N
    dist[0] = 0.0
    pq = [(0.0, 0)]
    while pq:
        d, u = heapq.heappop(pq)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            if d + w < dist[v]:
                dist[v] = d + w
                heapq.heappush(pq, (dist[v], v))
    return dist[1]


# -- rational linear algebra -------------------------------------------------------------

def rational_rank(rows):
    """Rank over Q by exact incremental elimination on sparse rows.

    ``rows`` holds dense sequences or {column: value} dicts.
    """
    pivots = {}
    for r in rows:
        items = r.items() if isinstance(r, dict) else enumerate(r)
        v = {j: Fraction(x) for j, x in items if x}
        while v:
            j = min(v)
            p = pivots.get(j)
            if p is None:
                pivots[j] = v
                break
            f = v[j] / p[j]
            for kk, val in p.items():
                nv = v.get(kk, 0) - f * val
                if nv:
                    v[kk] = nv
                else:
                    v.pop(kk, None)
    return len(pivots)


def complex_betti_q(n_vertices, triangles):
    """b0, b1, b2 over Q from boundary matrices built from scratch (columns as sparse rows)."""
    edges = sorted({tuple(sorted((t[i], t[j]))) for t in triangles for i, j in ((0, 1), (1, 2), (0, 2))})
    eidx = {e: k for k, e in enumerate(edges)}
    used = sorted({v for t in triangles for v in t})
    vidx = {v: k for k, v in enumerate(used)}
    d1 = [{vidx[a]: -1, vidx[b]: 1} for a, b in edges]
    d2 = []
    for a, b, c in triangles:
        col = {}
        for u, v in ((a, b), (b, c), (c, a)):
            e = eidx[tuple(sorted((u, v)))]
            col[e] = col.get(e, 0) + (1 if u < v else -1)
        d2.append(col)
    r1 = rational_rank(d1)
    r2 = rational_rank(d2)
    return len(used) - r1, len(edges) - r1 - r2, len(triangles) - r2


# -- Vietoris-Rips over GF(2), from scratch --------------------------------------------

def gf2_rank(vectors):
    basis = {}
    for v in vectors:
        while v:
            h = v.bit_length() - 1
            if h in basis:
                v ^= basis[h]
            else:
                basis[h] = v
                break
    return len(basis)


def rips_cycle_death(d, cycle_edges):
    """Smallest distance value r at which the edge cycle bounds in VR_r, by direct
    rank comparison over all triangles of VR_r (no reduction caching)."""
    d = np.asarray(d)
    n = len(d)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    eid = {e: k for k, e in enumerate(edges)}
    z = 0
    for i, j in cycle_edges:
        z ^= 1 << eid[(min(i, j), max(i, j))]
    for r in sorted(set(d[np.triu_indices(n, 1)].tolist())):
        cols = []
        for i, j, k in itertools.combinations(range(n), 3):
            if max(d[i, j], d[i, k], d[j, k]) <= r:
                cols.append((1 << eid[(i, j)]) | (1 << eid[(i, k)]) | (1 << eid[(j, k)]))
        if gf2_rank(cols + [z]) == gf2_rank(cols):
            return r
    return math.inf


def longest_chord(poly, n=200):
    """Longest segment between boundary samples whose relative interior lies in the open interior.

    Brute force with shapely; independent of the ray casting in the package.
    """
    P = Polygon(poly)
    ring = P.exterior
    pts = [ring.interpolate(t, normalized=True) for t in np.arange(n) / n]
    pts += [Point(p) for p in poly]
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            a, b = pts[i], pts[j]
            L = a.distance(b)
            if L <= best or L == 0:
                continue
            seg = LineString([a, b])
            if not P.covers(seg):
                continue
            touch = seg.intersection(ring)
            if touch.geom_type == "MultiPoint" and len(touch.geoms) == 2:
                best = L
    return best
