"""Piecewise-model simplicial 2-complexes.

Every triangle is a geodesic triangle of the model surface with the
complex-wide curvature, determined by its three side lengths.  Each triangle
gets a chart: its comparison triangle placed with the first vertex at the
chart origin and the second on the positive x-axis (see
:func:`model_surface.comparison_triangle`), in normalized coordinates.

Geodesics are approximated on a Steiner graph whose nodes are the vertices
plus evenly spaced points on every edge; arcs join node pairs of a common
triangle and carry the in-chart model distance.  Every graph path is an
actual path in the complex, so graph distances over-estimate the intrinsic
metric.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import InvalidComplex, Unreachable
from .model_surface import Kappa, as_kappa, comparison_angle, comparison_triangle

LENGTH_TOL = 1e-12
GIRTH_TOL = 1e-9
BARY_TOL = 1e-12
_SIDES = ((0, 1), (1, 2), (2, 0))


# -- vectorized normalized-surface kernels --------------------------------------

def _vdist(sign, P, Q):
    if sign == 0:
        d = P - Q
        return np.hypot(d[..., 0], d[..., 1])
    if sign == 1:
        c = np.cross(P, Q)
        return np.arctan2(np.linalg.norm(c, axis=-1), np.sum(P * Q, axis=-1))
    d = P - Q
    ch2 = d[..., 0] ** 2 + d[..., 1] ** 2 - d[..., 2] ** 2
    return 2.0 * np.arcsinh(np.sqrt(np.maximum(ch2, 0.0)) / 2.0)


def _vnormalize(sign, V):
    if sign == 0:
        return V
    if sign == 1:
        return V / np.linalg.norm(V, axis=-1, keepdims=True)
    m = -(V[..., 0] ** 2 + V[..., 1] ** 2 - V[..., 2] ** 2)
    return V / np.sqrt(m)[..., None]


def _vgeo(sign, P, Q, t):
    """Points at fraction t along chart geodesics P -> Q (broadcasting)."""
    t = np.asarray(t, dtype=float)
    if sign == 0:
        return P + t[..., None] * (Q - P)
    d = _vdist(sign, P, Q)
    f = np.sin if sign == 1 else np.sinh
    small = d < 1e-12
    ds = np.where(small, 1.0, d)
    a = np.where(small, 1.0 - t, f((1.0 - t) * ds) / f(ds))
    b = np.where(small, t, f(t * ds) / f(ds))
    return _vnormalize(sign, a[..., None] * P + b[..., None] * Q)


def _to_bary(sign, tri_pts, X):
    """Projective barycentric coordinates of chart points X in a chart triangle."""
    if sign == 0:
        M = np.vstack([tri_pts.T, np.ones(3)])
        rhs = np.vstack([np.atleast_2d(X).T, np.ones(len(np.atleast_2d(X)))])
        lam = np.linalg.solve(M, rhs).T
    else:
        lam = np.linalg.solve(tri_pts.T, np.atleast_2d(X).T).T
        lam = lam / lam.sum(axis=1, keepdims=True)
    return lam


def _from_bary(sign, tri_pts, lam):
    return _vnormalize(sign, np.atleast_2d(lam) @ tri_pts)


# -- points ------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexPoint:
    """A point of a complex: a vertex, an edge point, or a triangle point.

    ``kind`` is ``"vertex"`` (``index`` = vertex id), ``"edge"`` (``index`` =
    edge id, ``param`` = fraction from the lower vertex id, in (0,1)) or
    ``"face"`` (``index`` = triangle id, ``param`` = barycentric triple in
    stored vertex order).
    """

    kind: str
    index: int
    param: object = None

    def __post_init__(self):
        if self.kind == "vertex":
            return
        if self.kind == "edge":
            if not 0.0 < float(self.param) < 1.0:
                raise InvalidComplex(f"edge parameter {self.param} not in (0,1)")
            return
        if self.kind == "face":
            lam = tuple(float(x) for x in self.param)
            if len(lam) != 3 or min(lam) < -BARY_TOL or abs(sum(lam) - 1.0) > BARY_TOL:
                raise InvalidComplex(f"bad barycentric coordinates {lam}")
            object.__setattr__(self, "param", lam)
            return
        raise InvalidComplex(f"unknown point kind {self.kind!r}")

    @staticmethod
    def vertex(v: int) -> "ComplexPoint":
        return ComplexPoint("vertex", int(v))

    @staticmethod
    def edge(e: int, t: float) -> "ComplexPoint":
        return ComplexPoint("edge", int(e), float(t))

    @staticmethod
    def face(tri: int, lam) -> "ComplexPoint":
        return ComplexPoint("face", int(tri), tuple(float(x) for x in lam))


# -- the complex --------------------------------------------------------------------

class TriComplex:
    """Simplicial 2-complex with model-geometry triangles.

    ``lengths[t]`` holds the side lengths (|v0v1|, |v1v2|, |v2v0|) of
    triangle ``t = (v0, v1, v2)``.  Optional ``coords`` (n x 2) is a planar
    layout used for plotting and for comparisons with planar domains.
    """

    def __init__(self, n_vertices, triangles, lengths=None, kappa=0.0, coords=None, validate=True):
        self.kappa = as_kappa(kappa)
        self.n_vertices = int(n_vertices)
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
        self.coords = None if coords is None else np.asarray(coords, dtype=float).reshape(-1, 2)
        if lengths is None:
            if self.coords is None or self.kappa.sign != 0:
                raise InvalidComplex("lengths are required unless the complex is flat with coordinates")
            c = self.coords[self.triangles]
            lengths = np.stack([np.hypot(*(c[:, j] - c[:, i]).T) for i, j in _SIDES], axis=1)
        self.lengths = np.asarray(lengths, dtype=float).reshape(-1, 3)
        if len(self.lengths) != len(self.triangles):
            raise InvalidComplex("one length triple per triangle is required")
        self._build_edges()
        if validate:
            self._validate()
        self._build_charts()

    def _build_edges(self):
        T = self.triangles
        if T.size and (T.min() < 0 or T.max() >= self.n_vertices):
            raise InvalidComplex("triangle refers to a missing vertex")
        pairs = np.concatenate([np.sort(T[:, [i, j]], axis=1) for i, j in _SIDES])
        uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
        self.edges = uniq
        nt = len(T)
        self.tri_edges = inv.reshape(3, nt).T.copy() if nt else np.zeros((0, 3), dtype=np.int64)
        self.edge_index = {(int(a), int(b)): k for k, (a, b) in enumerate(uniq)}
        lens = self.lengths.T.ravel() if nt else np.zeros(0)
        self.edge_len = np.zeros(len(uniq))
        self._edge_len_spread = np.zeros(len(uniq))
        if nt:
            mx = np.full(len(uniq), -np.inf)
            mn = np.full(len(uniq), np.inf)
            np.maximum.at(mx, inv.ravel(), lens)
            np.minimum.at(mn, inv.ravel(), lens)
            self.edge_len = mx
            self._edge_len_spread = mx - mn
        self.edge_tris = [[] for _ in range(len(uniq))]
        for t in range(nt):
            for s in range(3):
                self.edge_tris[self.tri_edges[t, s]].append(t)
        self.vertex_tris = [[] for _ in range(self.n_vertices)]
        for t, tri in enumerate(T):
            for v in tri:
                self.vertex_tris[int(v)].append(t)

    def _validate(self):
        T = self.triangles
        if len(T) == 0:
            raise InvalidComplex("complex has no triangles")
        if np.any((T[:, 0] == T[:, 1]) | (T[:, 1] == T[:, 2]) | (T[:, 0] == T[:, 2])):
            raise InvalidComplex("a triangle repeats a vertex")
        keys = np.sort(T, axis=1)
        if len(np.unique(keys, axis=0)) != len(T):
            raise InvalidComplex("two triangles span the same vertex set")
        for t, (a, b, c) in enumerate(self.lengths):
            if min(a, b, c) <= 0 or not (a < b + c and b < a + c and c < a + b):
                raise InvalidComplex(f"triangle {t} violates the strict triangle inequality {(a, b, c)}")
            if self.kappa.sign > 0 and self.kappa.normalize(a + b + c) >= 2 * math.pi:
                raise InvalidComplex(f"triangle {t} has perimeter >= 2 D_k")
        bad = self._edge_len_spread > LENGTH_TOL * np.maximum(1.0, self.edge_len)
        if bad.any():
            e = int(np.nonzero(bad)[0][0])
            raise InvalidComplex(f"edge {tuple(self.edges[e])} has inconsistent lengths")

    def _build_charts(self):
        k, sg = self.kappa, self.kappa.sign
        dim = 2 if sg == 0 else 3
        self.chart = np.zeros((len(self.triangles), 3, dim))
        for t, (a, b, c) in enumerate(self.lengths):
            # |P0P1| = a, |P0P2| = |v2v0| = c, |P1P2| = b
            P = comparison_triangle(k, float(a), float(c), float(b))
            self.chart[t] = [p.coords for p in P]

    # -- derived structure ----------------------------------------------------

    @property
    def sign(self) -> int:
        return self.kappa.sign

    def boundary_edges(self) -> np.ndarray:
        return np.array([e for e, ts in enumerate(self.edge_tris) if len(ts) == 1], dtype=np.int64)

    def used_vertices(self) -> np.ndarray:
        return np.unique(self.triangles)

    def euler_characteristic(self) -> int:
        return len(self.used_vertices()) - len(self.edges) + len(self.triangles)

    def n_components(self) -> int:
        nt = len(self.triangles)
        rows, cols = [], []
        for ts in self.edge_tris:
            for a in ts[1:]:
                rows.append(ts[0])
                cols.append(a)
        for ts in self.vertex_tris:
            for a in ts[1:]:
                rows.append(ts[0])
                cols.append(a)
        g = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(nt, nt))
        return int(connected_components(g, directed=False)[0])

    def boundary_cycles(self) -> list:
        """Boundary edges arranged into closed vertex cycles (raises if not a 1-manifold)."""
        be = self.boundary_edges()
        nbr = {}
        for e in be:
            a, b = map(int, self.edges[e])
            nbr.setdefault(a, []).append(b)
            nbr.setdefault(b, []).append(a)
        if any(len(v) != 2 for v in nbr.values()):
            raise InvalidComplex("boundary is not a disjoint union of circles")
        seen, cycles = set(), []
        for start in sorted(nbr):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            prev, cur = None, start
            while True:
                a, b = nbr[cur]
                nxt = a if a != prev else b
                if nxt == start:
                    break
                cyc.append(nxt)
                seen.add(nxt)
                prev, cur = cur, nxt
            cycles.append(cyc)
        return cycles

    def is_disc(self) -> bool:
        if any(len(ts) > 2 for ts in self.edge_tris):
            return False
        if self.n_components() != 1 or self.euler_characteristic() != 1:
            return False
        try:
            return len(self.boundary_cycles()) == 1
        except InvalidComplex:
            return False

    def angle(self, t: int, corner: int) -> float:
        """Model angle of triangle t at its local corner 0, 1 or 2."""
        a, b, c = self.lengths[t]
        opp, adj = {0: (b, (a, c)), 1: (c, (a, b)), 2: (a, (b, c))}[corner]
        return comparison_angle(self.kappa, opp, *adj)

    def subcomplex(self, tri_ids) -> "TriComplex":
        """Complex spanned by a subset of triangles, vertices re-indexed compactly."""
        tri_ids = np.asarray(sorted(set(int(t) for t in tri_ids)), dtype=np.int64)
        T = self.triangles[tri_ids]
        used, inv = np.unique(T, return_inverse=True)
        coords = None if self.coords is None else self.coords[used]
        sub = TriComplex(len(used), inv.reshape(-1, 3), self.lengths[tri_ids], self.kappa, coords)
        sub.parent_vertices = used
        sub.parent_triangles = tri_ids
        return sub

    # -- points ------------------------------------------------------------------

    def incident_triangles(self, p: ComplexPoint) -> list:
        if p.kind == "vertex":
            return list(self.vertex_tris[p.index])
        if p.kind == "edge":
            return list(self.edge_tris[p.index])
        return [p.index]

    def chart_position(self, t: int, p: ComplexPoint) -> np.ndarray:
        """Normalized chart coordinates of p in triangle t (p must lie on t)."""
        sg = self.sign
        tri = self.triangles[t]
        P = self.chart[t]
        if p.kind == "vertex":
            i = int(np.nonzero(tri == p.index)[0][0])
            return P[i]
        if p.kind == "edge":
            a, b = self.edges[p.index]
            i = int(np.nonzero(tri == a)[0][0])
            j = int(np.nonzero(tri == b)[0][0])
            return _vgeo(sg, P[i], P[j], p.param)
        return _from_bary(sg, P, np.array(p.param))[0]

    def point_from_chart(self, t: int, X) -> ComplexPoint:
        """Chart point in triangle t turned back into a ComplexPoint (snapped to the closed face)."""
        lam = _to_bary(self.sign, self.chart[t], np.asarray(X))[0]
        lam = np.clip(lam, 0.0, None)
        lam = lam / lam.sum()
        return self.face_point(t, lam)

    def face_point(self, t: int, lam) -> ComplexPoint:
        """Canonical ComplexPoint for barycentric coordinates, dropping to edges/vertices."""
        lam = np.asarray(lam, dtype=float)
        tri = self.triangles[t]
        nz = lam > BARY_TOL
        if nz.sum() == 1:
            return ComplexPoint.vertex(int(tri[int(np.argmax(lam))]))
        if nz.sum() == 2:
            i, j = np.nonzero(nz)[0]
            a, b = int(tri[i]), int(tri[j])
            e = self.edge_index[(min(a, b), max(a, b))]
            # geodesic param along the edge from its lower vertex
            P = self.chart[t]
            X = _from_bary(self.sign, P, lam)[0]
            lo = i if a < b else j
            d0 = _vdist(self.sign, P[lo], X) / max(_vdist(self.sign, P[i], P[j]), 1e-300)
            return ComplexPoint.edge(e, float(min(max(d0, 1e-15), 1 - 1e-15)))
        return ComplexPoint.face(t, lam / lam.sum())

    def xy(self, p: ComplexPoint) -> np.ndarray:
        """Planar layout position of a point (requires ``coords``)."""
        if self.coords is None:
            raise InvalidComplex("complex has no planar layout")
        if p.kind == "vertex":
            return self.coords[p.index].copy()
        if p.kind == "edge":
            a, b = self.edges[p.index]
            return self.coords[a] + p.param * (self.coords[b] - self.coords[a])
        return np.asarray(p.param) @ self.coords[self.triangles[p.index]]

    def point_at_xy(self, xy) -> ComplexPoint:
        """Inverse of :meth:`xy` for flat complexes with a planar layout."""
        xy = np.asarray(xy, dtype=float)
        C = self.coords[self.triangles]
        v0, v1, v2 = C[:, 0], C[:, 1], C[:, 2]
        den = (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1]) - (v1[:, 1] - v0[:, 1]) * (v2[:, 0] - v0[:, 0])
        l1 = ((xy[0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1]) - (xy[1] - v0[:, 1]) * (v2[:, 0] - v0[:, 0])) / den
        l2 = ((v1[:, 0] - v0[:, 0]) * (xy[1] - v0[:, 1]) - (v1[:, 1] - v0[:, 1]) * (xy[0] - v0[:, 0])) / den
        lam = np.stack([1 - l1 - l2, l1, l2], axis=1)
        worst = lam.min(axis=1)
        t = int(np.argmax(worst))
        if worst[t] < -1e-9:
            raise InvalidComplex(f"point {tuple(xy)} is not on the complex")
        lam = np.clip(lam[t], 0.0, None)
        return self.face_point(t, lam / lam.sum())

    # -- serialization -------------------------------------------------------------

    def to_json(self) -> dict:
        d = {"schema": 1, "kappa": self.kappa.value,
             "vertices": (self.coords.tolist() if self.coords is not None else self.n_vertices),
             "triangles": self.triangles.tolist(), "lengths": self.lengths.tolist()}
        return d

    @staticmethod
    def from_json(d: dict) -> "TriComplex":
        try:
            verts = d["vertices"]
            tris = d["triangles"]
            kappa = float(d.get("kappa", 0.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidComplex(f"bad complex JSON: {exc}") from None
        if isinstance(verts, int):
            n, coords = verts, None
        else:
            coords = np.asarray(verts, dtype=float)
            n = len(coords)
        return TriComplex(n, tris, d.get("lengths"), kappa, coords)


# -- local CAT(k) condition ---------------------------------------------------------

@dataclass
class LinkReport:
    passed: bool
    worst_vertex: int | None
    worst_loop_length: float
    worst_loop: list

    def to_json(self) -> dict:
        return {"pass": self.passed, "worst_vertex": self.worst_vertex,
                "worst_loop_length": None if math.isinf(self.worst_loop_length) else self.worst_loop_length,
                "worst_loop": self.worst_loop}


def _link_girth(nodes, arcs):
    """Shortest injective loop of an angle-weighted multigraph.

    For each arc (u, v, w, label): w + shortest u->v path avoiding that arc.
    Returns (length, list of arc labels).
    """
    best, best_loop = math.inf, []
    adj = {n: [] for n in nodes}
    for k, (u, v, w, lab) in enumerate(arcs):
        adj[u].append((v, w, k))
        adj[v].append((u, w, k))
    for k, (u, v, w, lab) in enumerate(arcs):
        dist = {u: 0.0}
        pred = {}
        heap = [(0.0, u)]
        while heap:
            d, x = heapq.heappop(heap)
            if d > dist.get(x, math.inf) or x == v:
                continue
            for y, wy, ky in adj[x]:
                if ky == k:
                    continue
                nd = d + wy
                if nd < dist.get(y, math.inf) - 1e-15:
                    dist[y] = nd
                    pred[y] = (x, ky)
                    heapq.heappush(heap, (nd, y))
        if v in dist and dist[v] + w < best:
            best = dist[v] + w
            loop, x = [lab], v
            while x != u:
                x, ky = pred[x]
                loop.append(arcs[ky][3])
            best_loop = loop
    return best, best_loop


def link_girth_check(c: TriComplex, kappa=None) -> LinkReport:
    """Gromov link condition: every injective loop in every vertex link has length >= 2 pi."""
    if kappa is not None and as_kappa(kappa).value != c.kappa.value:
        c = TriComplex(c.n_vertices, c.triangles, c.lengths, kappa, c.coords)
    worst, worst_v, worst_loop = math.inf, None, []
    for v in range(c.n_vertices):
        ts = c.vertex_tris[v]
        if len(ts) < 2:
            continue
        arcs, nodes = [], set()
        for t in ts:
            tri = c.triangles[t]
            i = int(np.nonzero(tri == v)[0][0])
            a, b = int(tri[(i + 1) % 3]), int(tri[(i + 2) % 3])
            ea = c.edge_index[(min(v, a), max(v, a))]
            eb = c.edge_index[(min(v, b), max(v, b))]
            nodes.update((ea, eb))
            arcs.append((ea, eb, c.angle(t, i), int(t)))
        L, loop = _link_girth(nodes, arcs)
        if L < worst:
            worst, worst_v, worst_loop = L, v, loop
    return LinkReport(worst >= 2 * math.pi - GIRTH_TOL, worst_v, worst, worst_loop)


# -- Steiner graph --------------------------------------------------------------------

def _segments_for(length: float, h: float) -> int:
    """Power-of-two subdivision count with spacing <= h (nested when h halves)."""
    r = length / h
    if r <= 1.0 + 1e-9:
        return 1
    return 1 << int(math.ceil(math.log2(r - 1e-9)))


class SteinerGraph:
    """Discretization of a complex for approximate geodesics at spacing ``h``."""

    def __init__(self, c: TriComplex, h: float):
        if not h > 0:
            raise ValueError("spacing h must be positive")
        self.c, self.h = c, float(h)
        sg = c.sign
        self.edge_segments = np.array([_segments_for(L, h) for L in c.edge_len], dtype=np.int64)
        starts = np.concatenate([[c.n_vertices], c.n_vertices + np.cumsum(self.edge_segments - 1)])
        self.edge_start = starts[:-1]
        self.n_nodes = int(starts[-1])
        # node descriptions (ComplexPoints) are created lazily
        self._tri_nodes = []
        I, J, W = [], [], []
        for t in range(len(c.triangles)):
            ids, X = self._triangle_nodes(t)
            self._tri_nodes.append((ids, X))
            ii, jj = np.triu_indices(len(ids), 1)
            I.append(ids[ii])
            J.append(ids[jj])
            W.append(c.kappa.denormalize(1.0) * _vdist(sg, X[ii], X[jj]))
        self._I = np.concatenate(I) if I else np.zeros(0, dtype=np.int64)
        self._J = np.concatenate(J) if J else np.zeros(0, dtype=np.int64)
        self._W = np.concatenate(W) if W else np.zeros(0)
        self.graph = self._assemble(self._I, self._J, self._W, self.n_nodes)

    def _triangle_nodes(self, t):
        c, sg = self.c, self.c.sign
        tri = c.triangles[t]
        P = c.chart[t]
        ids = [int(v) for v in tri]
        X = [P[0], P[1], P[2]]
        for s, (i, j) in enumerate(_SIDES):
            e = c.tri_edges[t, s]
            m = self.edge_segments[e]
            if m == 1:
                continue
            a, b = c.edges[e]
            lo, hi = (i, j) if tri[i] == a else (j, i)
            k = np.arange(1, m)
            ids.extend((self.edge_start[e] + k - 1).tolist())
            X.extend(_vgeo(sg, np.broadcast_to(P[lo], (m - 1, P.shape[1])),
                           np.broadcast_to(P[hi], (m - 1, P.shape[1])), k / m))
        return np.array(ids, dtype=np.int64), np.array(X)

    @staticmethod
    def _assemble(I, J, W, n):
        a, b = np.minimum(I, J), np.maximum(I, J)
        key = a * n + b
        order = np.lexsort((W, key))
        key, a, b, W = key[order], a[order], b[order], W[order]
        first = np.ones(len(key), dtype=bool)
        first[1:] = key[1:] != key[:-1]
        a, b, W = a[first], b[first], W[first]
        return sp.csr_matrix((np.concatenate([W, W]), (np.concatenate([a, b]), np.concatenate([b, a]))),
                             shape=(n, n))

    def node_point(self, k: int) -> ComplexPoint:
        if k < self.c.n_vertices:
            return ComplexPoint.vertex(k)
        e = int(np.searchsorted(self.edge_start, k, side="right") - 1)
        j = k - self.edge_start[e] + 1
        return ComplexPoint.edge(e, j / self.edge_segments[e])

    def with_points(self, points):
        """Augmented graph containing extra nodes for ``points``; returns (csr, node ids, descriptions)."""
        c, sg = self.c, self.c.sign
        n = self.n_nodes
        ids = []
        I, J, W = [self._I], [self._J], [self._W]
        per_tri = {}
        extra = []
        for p in points:
            if p.kind == "vertex":
                ids.append(p.index)
                continue
            k = n + len(extra)
            extra.append(p)
            ids.append(k)
            for t in c.incident_triangles(p):
                X = c.chart_position(t, p)
                tn, TX = self._tri_nodes[t]
                I.append(np.full(len(tn), k))
                J.append(tn)
                W.append(c.kappa.denormalize(1.0) * _vdist(sg, TX, X[None]))
                per_tri.setdefault(t, []).append((k, X))
        for t, lst in per_tri.items():
            if len(lst) < 2:
                continue
            ks = np.array([k for k, _ in lst])
            Xs = np.array([x for _, x in lst])
            ii, jj = np.triu_indices(len(ks), 1)
            I.append(ks[ii])
            J.append(ks[jj])
            W.append(c.kappa.denormalize(1.0) * _vdist(sg, Xs[ii], Xs[jj]))
        total = n + len(extra)
        g = self._assemble(np.concatenate(I), np.concatenate(J), np.concatenate(W), total)
        return g, np.array(ids, dtype=np.int64), extra

    def pairwise(self, points) -> np.ndarray:
        """Approximate intrinsic distance matrix among ``points``."""
        g, ids, _ = self.with_points(points)
        uniq, inv = np.unique(ids, return_inverse=True)
        D = dijkstra(g, directed=False, indices=uniq)[inv][:, ids]
        # both directions are lengths of actual graph paths; keep the shorter
        return np.minimum(D, D.T)

    def distances_from(self, sources, targets) -> np.ndarray:
        """(len(sources), len(targets)) approximate distances."""
        g, ids, _ = self.with_points(list(sources) + list(targets))
        s_ids, t_ids = ids[:len(sources)], ids[len(sources):]
        uniq, inv = np.unique(s_ids, return_inverse=True)
        D = dijkstra(g, directed=False, indices=uniq)
        return D[inv][:, t_ids]

    def geodesic(self, p: ComplexPoint, q: ComplexPoint):
        """(length, list of ComplexPoints) of the graph shortest path from p to q."""
        g, ids, extra = self.with_points([p, q])
        D, pred = dijkstra(g, directed=False, indices=int(ids[0]), return_predecessors=True)
        if not np.isfinite(D[ids[1]]):
            raise Unreachable("points lie in different components")
        seq = [int(ids[1])]
        while seq[-1] != ids[0]:
            seq.append(int(pred[seq[-1]]))
        seq.reverse()
        desc = {int(ids[0]): p, int(ids[1]): q}
        pts = [desc.get(k) or self.node_point(k) for k in seq]
        return float(D[ids[1]]), pts

    def point_along(self, pts, t: float) -> ComplexPoint:
        """Point at arclength fraction t of a node path returned by :meth:`geodesic`."""
        c, sg = self.c, self.c.sign
        segs = []
        for a, b in zip(pts, pts[1:]):
            common = sorted(set(c.incident_triangles(a)) & set(c.incident_triangles(b)))
            tri = common[0]
            Xa, Xb = c.chart_position(tri, a), c.chart_position(tri, b)
            segs.append((tri, Xa, Xb, c.kappa.denormalize(float(_vdist(sg, Xa, Xb)))))
        total = sum(s[3] for s in segs)
        if total == 0.0 or not segs:
            return pts[0]
        target = t * total
        acc = 0.0
        for tri, Xa, Xb, L in segs:
            if acc + L >= target or (tri, Xa, Xb, L) is segs[-1]:
                u = 0.0 if L == 0 else min(max((target - acc) / L, 0.0), 1.0)
                return c.point_from_chart(tri, _vgeo(sg, Xa, Xb, u))
            acc += L
        return pts[-1]


def steiner_graph(c: TriComplex, h: float) -> SteinerGraph:
    return SteinerGraph(c, h)


def approx_distance(c: TriComplex, p: ComplexPoint, q: ComplexPoint, h: float, graph: SteinerGraph | None = None) -> float:
    """Steiner-graph distance; an upper bound for the intrinsic distance."""
    if p == q:
        return 0.0
    g = graph if graph is not None else SteinerGraph(c, h)
    d = g.pairwise([p, q])[0, 1]
    if not np.isfinite(d):
        raise Unreachable("points lie in different components")
    return float(d)


# -- builders ----------------------------------------------------------------------------

def grid_complex(nx: int, ny: int, cell: float = 1.0, mask=None, origin=(0.0, 0.0)) -> TriComplex:
    """Flat grid of nx x ny square cells, each split along its main diagonal.

    ``mask`` (ny x nx booleans) selects the cells kept.  Triangles of cell
    (i, j) are numbered 2*(j*nx+i) and 2*(j*nx+i)+1 in the full grid.
    """
    xs = origin[0] + cell * np.arange(nx + 1)
    ys = origin[1] + cell * np.arange(ny + 1)
    X, Y = np.meshgrid(xs, ys)
    coords = np.stack([X.ravel(), Y.ravel()], axis=1)
    vid = lambda i, j: j * (nx + 1) + i
    tris = []
    for j in range(ny):
        for i in range(nx):
            if mask is not None and not mask[j][i]:
                continue
            a, b, c_, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c_))
            tris.append((a, c_, d))
    tris = np.array(tris, dtype=np.int64)
    used, inv = np.unique(tris, return_inverse=True)
    comp = TriComplex(len(used), inv.reshape(-1, 3), None, 0.0, coords[used])
    comp.grid_vertex = {int(u): k for k, u in enumerate(used)}
    comp.grid_shape = (nx, ny)
    return comp


def cone_complex(total_angle: float, n: int = 4, radius: float = 1.0) -> TriComplex:
    """n isosceles flat triangles around vertex 0 with apex angles summing to ``total_angle``."""
    a = total_angle / n
    base = 2 * radius * math.sin(a / 2)
    tris = [(0, 1 + i, 1 + (i + 1) % n) for i in range(n)]
    lengths = [(radius, base, radius)] * n
    return TriComplex(n + 1, tris, lengths, 0.0)


def book_complex(pages: int = 3, width: float = 1.0, height: float = 1.0) -> TriComplex:
    """``pages`` flat rectangles glued along the common spine edge (0, 1)."""
    tris, lengths = [], []
    diag = math.hypot(width, height)
    for p in range(pages):
        a, b = 2 + 2 * p, 3 + 2 * p  # a opposite 0, b opposite 1
        tris.append((0, a, b))
        lengths.append((width, height, diag))
        tris.append((0, b, 1))
        lengths.append((diag, width, height))
    return TriComplex(2 + 2 * pages, tris, lengths, 0.0)


def triangulate_simple_polygon(poly) -> np.ndarray:
    """Ear clipping of a simple polygon (either orientation); returns index triples (CCW)."""
    from .predicates import orient, point_in_polygon, signed_area

    pts = [tuple(map(float, p)) for p in poly]
    idx = list(range(len(pts)))
    if signed_area(pts) < 0:
        idx.reverse()
    out = []
    guard = 0
    while len(idx) > 3 and guard < 10 * len(pts) ** 2:
        guard += 1
        m = len(idx)
        for k in range(m):
            i, j, l = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            if orient(pts[i], pts[j], pts[l]) <= 0:
                continue
            tri = [pts[i], pts[j], pts[l]]
            if any(point_in_polygon(pts[o], tri) >= 0 for o in idx if o not in (i, j, l)):
                continue
            out.append((i, j, l))
            idx.pop(k)
            break
        else:
            raise InvalidComplex("ear clipping failed (polygon not simple?)")
    out.append(tuple(idx))
    return np.array(out, dtype=np.int64)


def polygon_complex(poly) -> TriComplex:
    poly = np.asarray(poly, dtype=float)
    return TriComplex(len(poly), triangulate_simple_polygon(poly), None, 0.0, poly)


def with_kappa(c: TriComplex, kappa) -> TriComplex:
    return TriComplex(c.n_vertices, c.triangles, c.lengths, kappa, c.coords)


__all__ = [
    "ComplexPoint", "TriComplex", "LinkReport", "link_girth_check", "SteinerGraph",
    "steiner_graph", "approx_distance", "grid_complex", "cone_complex", "book_complex",
    "triangulate_simple_polygon", "polygon_complex", "with_kappa", "Kappa",
]
