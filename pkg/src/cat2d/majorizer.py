"""Majorizing discs for planar Jordan polygons.

A majorization of a curve G is a CAT(k) disc Z with a 1-Lipschitz map w into
the scene that sends the boundary of Z onto G preserving arclength.  Discs are
built the way the classical inductive proof builds them: every triangle of a
triangulation of the polygon (a fan, or ear clipping when a fan is blocked)
is replaced by its comparison triangle in the model surface, and comparison
triangles are glued along the sides they share.  Discs of sub-curves are
glued along cuts in the same way, after inserting each side's subdivision
points into the other side.

The scene is the Euclidean plane (or a closed subset of it), which is
CAT(0).  Comparison triangles are therefore taken flat, and the map on each
triangle is the affine isometry onto the planar triangle.  A flat disc is
CAT(0), hence CAT(k) for every k >= 0, so the same disc majorizes the curve
in a curvature-1 scene as well.  (Spherical comparison triangles would be
fatter than their planar images, and the radial map from a corner of such a
triangle is not 1-Lipschitz in general.)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (ContainmentViolated, FanObstructed, GlueMismatch, InvariantViolated,
                     PreconditionError, Unsupported)
from .flat_complex import (ComplexPoint, SteinerGraph, TriComplex, link_girth_check,
                           triangulate_simple_polygon)
from .jordan import CutTree, JordanPolygon
from .predicates import orient

ARC_TOL = 1e-9
PAIRS = 10_000


def _seg_distance(P, S):
    """Euclidean distance of points P (m,2) to the union of segments S (k,2,2)."""
    P = np.asarray(P, dtype=float)
    A, B = S[:, 0], S[:, 1]
    out = np.full(len(P), np.inf)
    step = max(1, 1_000_000 // max(len(S), 1))
    AB = B - A
    L2 = np.maximum(np.sum(AB * AB, axis=1), 1e-300)
    for i in range(0, len(P), step):
        p = P[i:i + step, None, :]
        t = np.clip(np.sum((p - A[None]) * AB[None], axis=2) / L2[None], 0.0, 1.0)
        foot = A[None] + t[..., None] * AB[None]
        out[i:i + step] = np.hypot(*(p - foot).transpose(2, 0, 1)).min(axis=1)
    return out


def curve_segments(curve: JordanPolygon) -> np.ndarray:
    return np.stack([curve.A, curve.B], axis=1)


@dataclass
class MajDisc:
    """Disc complex, vertex images and the boundary cycle (starting at the curve's base point)."""

    disc: TriComplex
    images: np.ndarray
    boundary: list
    curve: JordanPolygon
    meta: dict = field(default_factory=dict)

    @property
    def kappa(self):
        return self.disc.kappa

    def boundary_edge_lengths(self) -> np.ndarray:
        B = self.boundary
        idx = self.disc.edge_index
        return np.array([self.disc.edge_len[idx[(min(a, b), max(a, b))]]
                         for a, b in zip(B, B[1:] + B[:1])])

    def boundary_params(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.boundary_edge_lengths())[:-1]])

    @property
    def boundary_length(self) -> float:
        return float(self.boundary_edge_lengths().sum())

    # -- the map --------------------------------------------------------------------

    def image(self, points) -> np.ndarray:
        """Images in the plane of a list of ComplexPoints."""
        out = np.zeros((len(points), 2))
        c = self.disc
        faces = []
        for k, p in enumerate(points):
            if p.kind == "vertex":
                out[k] = self.images[p.index]
            elif p.kind == "edge":
                a, b = c.edges[p.index]
                out[k] = self.images[a] + p.param * (self.images[b] - self.images[a])
            else:
                faces.append(k)
        if faces:
            T = np.array([points[k].index for k in faces])
            lam = np.array([points[k].param for k in faces], dtype=float)
            out[faces] = np.einsum("ki,kij->kj", lam, self.images[c.triangles[T]])
        return out

    def sample_points(self, n: int, rng: np.random.Generator) -> list:
        """Random points, triangles chosen proportionally to their (planar Heron) area."""
        L = self.disc.lengths
        s = L.sum(axis=1) / 2
        area = np.sqrt(np.clip(s * (s - L[:, 0]) * (s - L[:, 1]) * (s - L[:, 2]), 0.0, None))
        T = rng.choice(len(area), size=n, p=area / area.sum())
        lam = rng.dirichlet(np.ones(3), size=n)
        lam = np.clip(lam, 1e-9, None)
        lam = lam / lam.sum(axis=1, keepdims=True)
        return [ComplexPoint.face(int(t), l) for t, l in zip(T, lam)]

    # -- checks --------------------------------------------------------------------------

    def check(self, tol: float = ARC_TOL) -> dict:
        """Disc topology, flat interior edges, arclength-preserving boundary."""
        c = self.disc
        if not c.is_disc():
            raise InvariantViolated("majorizing complex is not a disc")
        cyc = c.boundary_cycles()[0]
        B = self.boundary
        if sorted(cyc) != sorted(B) or len(cyc) != len(B):
            raise InvariantViolated("marked boundary differs from the complex boundary")
        interior_edges = [e for e, ts in enumerate(c.edge_tris) if len(ts) == 2]
        spread = float(c._edge_len_spread[interior_edges].max()) if interior_edges else 0.0
        ell = self.curve.length
        blen = self.boundary_length
        if abs(blen - ell) > tol * max(1.0, ell):
            raise InvariantViolated(f"boundary length {blen} differs from curve length {ell}")
        pts = self.curve.point_at(self.boundary_params())
        chart_err = float(np.max(np.hypot(*(pts - self.images[B]).T)))
        if chart_err > tol * max(1.0, self.curve.diameter):
            raise InvariantViolated(f"boundary chart is not arclength preserving (error {chart_err})")
        link = link_girth_check(c)
        if not link.passed:
            raise InvariantViolated("majorizing disc fails the link condition")
        return {"disc": True, "n_triangles": int(len(c.triangles)), "interior_edge_spread": spread,
                "boundary_length": blen, "curve_length": ell, "length_error": abs(blen - ell),
                "boundary_chart_error": chart_err, "link_worst_loop": link.worst_loop_length}

    def to_json(self) -> dict:
        return {"schema": 1, "disc": self.disc.to_json(), "images": self.images.tolist(),
                "boundary": [int(b) for b in self.boundary],
                "curve": self.curve.to_json(), "meta": self.meta}


# -- building discs from triangulations ---------------------------------------------------

def _strictly_inside_segment(V, u, v, cand):
    a, b = tuple(V[u]), tuple(V[v])
    for k in cand:
        p = tuple(V[k])
        if p == a or p == b:
            continue
        if orient(a, b, p) != 0:
            continue
        if min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]):
            return k
    return None


def refine_triangulation(V, tris):
    """Drop zero-area triangles and split triangles at vertices lying inside their sides."""
    V = np.asarray(V, dtype=float)
    pts = [tuple(map(float, p)) for p in V]
    stack = [tuple(int(x) for x in t) for t in tris if orient(pts[t[0]], pts[t[1]], pts[t[2]]) != 0]
    out = []
    allv = range(len(V))
    while stack:
        a, b, c = stack.pop()
        lo, hi = V[[a, b, c]].min(axis=0), V[[a, b, c]].max(axis=0)
        near = [k for k in allv if k not in (a, b, c) and np.all(V[k] >= lo) and np.all(V[k] <= hi)]
        for u, v, w in ((a, b, c), (b, c, a), (c, a, b)):
            k = _strictly_inside_segment(V, u, v, near)
            if k is not None:
                stack += [(u, k, w), (k, v, w)]
                break
        else:
            if orient(pts[a], pts[b], pts[c]) < 0:
                b, c = c, b
            out.append((a, b, c))
    return sorted(out)


def _disc_from_triangles(curve: JordanPolygon, tris, construction: str) -> MajDisc:
    V = curve.vertices
    n = len(V)
    tris = refine_triangulation(V, tris)
    if not tris:
        raise FanObstructed("triangulation is empty")
    T = np.array(tris, dtype=np.int64)
    C = V[T]
    lengths = np.stack([np.hypot(*(C[:, j] - C[:, i]).T) for i, j in ((0, 1), (1, 2), (2, 0))], axis=1)
    u, v = C[:, 1] - C[:, 0], C[:, 2] - C[:, 0]
    area = 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]).sum()
    if abs(area - curve.area) > 1e-9 * max(1.0, curve.area) or len(np.unique(T)) != n:
        raise FanObstructed(f"{construction} does not tile the curve")
    disc = TriComplex(n, T, lengths, 0.0, V)
    Z = MajDisc(disc, V.copy(), list(range(n)), curve,
                {"construction": construction, "scene_kappa": curve.kappa.value})
    cyc = disc.boundary_cycles() if disc.is_disc() else None
    if cyc is None or len(cyc[0]) != n:
        raise FanObstructed(f"{construction} does not produce a disc bounded by the curve")
    return Z


def _check_kappa(curve: JordanPolygon):
    if curve.kappa.sign < 0:
        raise Unsupported("planar scenes are not CAT(k) for k < 0")


def fan_majorize(curve: JordanPolygon, apex: int = 0) -> MajDisc:
    """Comparison triangles of (x0, xi, xi+1) glued along the diagonals x0 xi."""
    _check_kappa(curve)
    V = curve.vertices
    n = len(V)
    order = [(apex + k) % n for k in range(n)]
    dom = curve.domain
    for k in range(2, n - 1):
        if not dom.segment_in_domain_exact(V[apex], V[order[k]]):
            raise FanObstructed(f"diagonal {apex}-{order[k]} leaves the closed interior")
    pts = [tuple(map(float, p)) for p in V]
    tris = []
    for k in range(1, n - 1):
        t = (apex, order[k], order[k + 1])
        if orient(pts[t[0]], pts[t[1]], pts[t[2]]) < 0:
            raise FanObstructed(f"fan triangle {t} is reversed")
        tris.append(t)
    Z = _disc_from_triangles(curve, tris, "fan")
    Z.meta["apex"] = int(apex)
    return Z


def triangulation_majorize(curve: JordanPolygon) -> MajDisc:
    """Comparison triangles of an ear-clipping triangulation, glued along its diagonals."""
    _check_kappa(curve)
    return _disc_from_triangles(curve, triangulate_simple_polygon(curve.vertices), "ear clipping")


def majorize_polygon(curve: JordanPolygon) -> MajDisc:
    """Fan from the first unobstructed apex, else ear clipping."""
    for a in range(curve.n):
        try:
            return fan_majorize(curve, a)
        except FanObstructed:
            continue
    return triangulation_majorize(curve)


def controlled_majorization(curve: JordanPolygon, eps: float, tol: float = 1e-6,
                            samples: int = 256, seed: int = 0) -> MajDisc:
    """Majorization whose image stays within eps + tol of the curve."""
    if curve.diameter > eps * (1 + 1e-12):
        raise PreconditionError(f"curve diameter {curve.diameter} exceeds eps = {eps}")
    if curve.kappa.sign > 0 and eps > curve.kappa.diameter / 2:
        raise PreconditionError("eps must not exceed half the model diameter")
    Z = majorize_polygon(curve)
    rng = np.random.Generator(np.random.Philox(seed))
    P = np.concatenate([Z.image(Z.sample_points(samples, rng)), Z.images])
    d = _seg_distance(P, curve_segments(curve))
    k = int(np.argmax(d))
    Z.meta["containment"] = {"eps": eps, "worst": float(d[k]), "tol": tol}
    if d[k] > eps + tol:
        raise ContainmentViolated(f"image point at distance {d[k]} > eps = {eps}", P[k].tolist())
    return Z


# -- gluing ---------------------------------------------------------------------------------

class _Builder:
    """Mutable copy of a MajDisc used for boundary refinement."""

    def __init__(self, Z: MajDisc):
        self.tris = [list(map(int, t)) for t in Z.disc.triangles]
        self.lengths = [list(map(float, l)) for l in Z.disc.lengths]
        self.chart = [P.copy() for P in Z.disc.chart]
        self.images = [np.array(p) for p in Z.images]
        self.boundary = list(Z.boundary)

    def edge_len(self, u, v):
        for t, tri in enumerate(self.tris):
            if u in tri and v in tri:
                i, j = tri.index(u), tri.index(v)
                side = {(0, 1): 0, (1, 0): 0, (1, 2): 1, (2, 1): 1, (2, 0): 2, (0, 2): 2}[(i, j)]
                return self.lengths[t][side]
        raise InvariantViolated(f"no triangle on edge {u}-{v}")

    def arc(self, a, b):
        B = self.boundary
        i, j = B.index(a), B.index(b)
        return [B[(i + k) % len(B)] for k in range((j - i) % len(B) + 1)]

    def positions(self, arc):
        return np.concatenate([[0.0], np.cumsum([self.edge_len(u, v) for u, v in zip(arc, arc[1:])])])

    def split(self, u, v, x):
        """Insert a vertex on boundary edge u->v at distance x from u; returns its id."""
        ts = [t for t, tri in enumerate(self.tris) if u in tri and v in tri]
        if len(ts) != 1:
            raise InvariantViolated(f"edge {u}-{v} is not a boundary edge")
        t = ts[0]
        tri = self.tris[t]
        iu, iv = tri.index(u), tri.index(v)
        iw = 3 - iu - iv
        w = tri[iw]
        P = self.chart[t]
        f = x / float(np.hypot(*(P[iv] - P[iu])))
        Xp = P[iu] + f * (P[iv] - P[iu])
        p = len(self.images)
        self.images.append(self.images[u] + f * (self.images[v] - self.images[u]))
        new = []
        for a, b, Xa, Xb in ((u, p, P[iu], Xp), (p, v, Xp, P[iv])):
            # keep the orientation of the original triangle
            if (iv - iu) % 3 == 1:
                corners = [(a, Xa), (b, Xb), (w, P[iw])]
            else:
                corners = [(b, Xb), (a, Xa), (w, P[iw])]
            ids = [c[0] for c in corners]
            X = [c[1] for c in corners]
            lens = [float(np.hypot(*(X[j] - X[i]))) for i, j in ((0, 1), (1, 2), (2, 0))]
            new.append((ids, lens, X))
        self.tris[t], self.lengths[t], self.chart[t] = new[0][0], new[0][1], np.array(new[0][2])
        self.tris.append(new[1][0])
        self.lengths.append(new[1][1])
        self.chart.append(np.array(new[1][2]))
        k = self.boundary.index(u)
        if self.boundary[(k + 1) % len(self.boundary)] != v:
            raise InvariantViolated("split edge is not oriented along the boundary")
        self.boundary.insert(k + 1, p)
        return p

    def refine(self, arc, targets, tol):
        """Insert boundary vertices at the given arclength positions along the arc."""
        arc = list(arc)
        for x in sorted(targets):
            pos = self.positions(arc)
            if np.min(np.abs(pos - x)) <= tol:
                continue
            k = int(np.searchsorted(pos, x)) - 1
            u, v = arc[k], arc[k + 1]
            p = self.split(u, v, x - pos[k])
            arc.insert(k + 1, p)
        return arc


def boundary_vertex_at(Z: MajDisc, point, tol: float | None = None) -> int:
    """Boundary vertex of Z whose image is the given point."""
    tol = 1e-9 * max(1.0, Z.curve.diameter) if tol is None else tol
    B = np.array(Z.boundary)
    d = np.hypot(*(Z.images[B] - np.asarray(point, dtype=float)).T)
    k = int(np.argmin(d))
    if d[k] > tol:
        raise GlueMismatch(f"no boundary vertex maps to {tuple(point)} (closest {d[k]})")
    return int(B[k])


def glue_majorizations(zp: MajDisc, zm: MajDisc, arc_p, arc_m, curve: JordanPolygon | None = None,
                       tol: float = ARC_TOL) -> MajDisc:
    """Glue two discs along boundary arcs mapped onto the same geodesic.

    ``arc_p = (a, b)`` runs counterclockwise on zp's boundary and ``arc_m =
    (c, d)`` counterclockwise on zm's; a is identified with d and b with c.
    The glued boundary starts at the vertex mapped to ``curve``'s base point.
    """
    if zp.disc.kappa.value != zm.disc.kappa.value:
        raise GlueMismatch("discs have different curvature")
    bp, bm = _Builder(zp), _Builder(zm)
    ap = bp.arc(*arc_p)
    am = bm.arc(*arc_m)
    pos_p = bp.positions(ap)
    pos_m = bm.positions(am)
    Lp, Lm = pos_p[-1], pos_m[-1]
    scale = max(1.0, Lp, Lm)
    if abs(Lp - Lm) > tol * scale:
        raise GlueMismatch(f"arc lengths differ: {Lp} vs {Lm}")
    e0 = np.hypot(*(bp.images[ap[0]] - bm.images[am[-1]]))
    e1 = np.hypot(*(bp.images[ap[-1]] - bm.images[am[0]]))
    if max(e0, e1) > tol * scale:
        raise GlueMismatch("arc endpoints have different images")
    A, Bq = bp.images[ap[0]], bp.images[ap[-1]]
    chord = np.hypot(*(Bq - A))
    for img in [bp.images[v] for v in ap] + [bm.images[v] for v in am]:
        if abs(np.hypot(*(img - A)) + np.hypot(*(img - Bq)) - chord) > tol * scale:
            raise GlueMismatch("glued arc is not mapped onto a geodesic segment")
    if abs(chord - Lp) > tol * scale:
        raise GlueMismatch("glued arc is not mapped isometrically onto its segment")
    # common refinement, positions measured from zp's arc start
    ap = bp.refine(ap, Lp - pos_m, tol * scale)
    am = bm.refine(am, Lm - pos_p, tol * scale)
    pos_p = bp.positions(ap)
    pos_m = Lm - bm.positions(am)[::-1]
    am_rev = am[::-1]
    if len(ap) != len(am_rev) or np.max(np.abs(pos_p - pos_m)) > 10 * tol * scale:
        raise GlueMismatch("arc subdivisions do not match after refinement")
    np_ = len(bp.images)
    ident = {v: u for u, v in zip(ap, am_rev)}
    relabel = {}
    nxt = np_
    for v in range(len(bm.images)):
        if v in ident:
            relabel[v] = ident[v]
        else:
            relabel[v] = nxt
            nxt += 1
    images = list(bp.images) + [None] * (nxt - np_)
    for v, r in relabel.items():
        if r >= np_:
            images[r] = bm.images[v]
        elif np.hypot(*(images[r] - bm.images[v])) > 10 * tol * scale:
            raise GlueMismatch("identified vertices have different images")
    tris = bp.tris + [[relabel[v] for v in t] for t in bm.tris]
    lengths = bp.lengths + bm.lengths
    # boundary: zp from b round to a, then zm from d round to c
    Bp = bp.boundary
    i = Bp.index(ap[-1])
    rest_p = [Bp[(i + k) % len(Bp)] for k in range(len(Bp) - len(ap) + 2)]
    Bm = bm.boundary
    j = Bm.index(am[-1])
    rest_m = [relabel[Bm[(j + k) % len(Bm)]] for k in range(len(Bm) - len(am) + 2)]
    if rest_p[-1] != relabel[am[-1]] or rest_m[-1] != ap[-1]:
        raise InvariantViolated("boundary walk after gluing is inconsistent")
    boundary = rest_p[:-1] + rest_m[:-1]
    images = np.array(images)
    kappa = zp.disc.kappa
    disc = TriComplex(len(images), tris, lengths, kappa, images)
    if curve is None:
        curve = JordanPolygon(images[boundary], kappa)
    base = boundary_vertex_at_images(images, boundary, curve.vertices[0], tol * max(1.0, curve.diameter))
    k = boundary.index(base)
    boundary = boundary[k:] + boundary[:k]
    Z = MajDisc(disc, images, boundary, curve,
                {"construction": "glued", "scene_kappa": curve.kappa.value, "parts": [zp.meta.get("construction"), zm.meta.get("construction")]})
    return Z


def boundary_vertex_at_images(images, boundary, point, tol):
    B = np.array(boundary)
    d = np.hypot(*(images[B] - np.asarray(point)).T)
    k = int(np.argmin(d))
    if d[k] > tol:
        raise GlueMismatch("base point of the curve is not a boundary vertex of the glued disc")
    return int(B[k])


# -- assembly over a cut tree -----------------------------------------------------------------

def assemble_limit_majorization(tree: CutTree, tol: float = 1e-6, seed: int = 0) -> MajDisc:
    """Glue leaf majorizations bottom-up along the cuts of the tree."""
    nodes = tree.nodes
    eps = tree.epsilon

    def build(nid):
        nd = nodes[nid]
        if not nd.children:
            if nd.curve.diameter <= eps:
                return controlled_majorization(nd.curve, eps, tol, seed=seed + nid)
            return majorize_polygon(nd.curve)
        a, b = nd.children
        za, zb = build(a), build(b)
        c = nd.cut
        arc_a = (boundary_vertex_at(za, c.p1), boundary_vertex_at(za, c.p0))
        arc_b = (boundary_vertex_at(zb, c.p0), boundary_vertex_at(zb, c.p1))
        return glue_majorizations(za, zb, arc_a, arc_b, nd.curve)

    Z = build(0)
    Z.meta["construction"] = "cut tree"
    Z.meta["epsilon"] = eps
    Z.meta["leaves"] = len(tree.leaves())
    return Z


def tree_segments(tree: CutTree) -> np.ndarray:
    """Segments of G_k: the root curve and every cut."""
    segs = [curve_segments(tree.root)]
    cuts = [np.array([[n.cut.p0, n.cut.p1]]) for n in tree.nodes if n.cut is not None]
    return np.concatenate(segs + cuts)


def containment_report(Z: MajDisc, segments, eps: float, tol: float = 1e-6, samples: int = 4096,
                       seed: int = 0) -> dict:
    rng = np.random.Generator(np.random.Philox(seed))
    P = np.concatenate([Z.image(Z.sample_points(samples, rng)), Z.images])
    d = _seg_distance(P, segments)
    k = int(np.argmax(d))
    return {"eps": eps, "tol": tol, "samples": int(len(P)), "worst": float(d[k]),
            "worst_point": P[k].tolist(), "passed": bool(d[k] <= eps + tol)}


def lipschitz_report(Z: MajDisc, n_pairs: int = PAIRS, h: float | None = None, seed: int = 0,
                     scene=None) -> dict:
    """Compare scene distances of images with Steiner-graph distances in the disc.

    The pairs are all pairs among the smallest number of random disc points
    giving at least ``n_pairs`` pairs.  The scene metric is the intrinsic
    metric of the curve's closed interior unless another domain is given.
    """
    m = int(math.ceil((1 + math.sqrt(1 + 8 * n_pairs)) / 2))
    rng = np.random.Generator(np.random.Philox(seed))
    pts = Z.sample_points(m, rng)
    if h is None:
        h = float(Z.curve.diameter) / 64
    g = SteinerGraph(Z.disc, h)
    Dd = g.pairwise(pts)
    img = Z.image(pts)
    dom = (scene or Z.curve.domain)
    Di = dom.pairwise(img)
    iu, ju = np.triu_indices(m, 1)
    dd, di = Dd[iu, ju], Di[iu, ju]
    tol = 1e-6 + 2 * h
    excess = di - dd
    k = int(np.argmax(excess))
    pos = dd > 0
    ratio = float(np.max(di[pos] / dd[pos])) if pos.any() else 1.0
    return {"pairs": int(len(dd)), "points": m, "h": h, "tol": tol, "seed": seed,
            "max_excess": float(excess[k]), "max_ratio": ratio,
            "violations": int(np.sum(excess > tol)), "passed": bool(excess[k] <= tol)}


def convergence_study(curve: JordanPolygon, eps: float, halvings: int = 2, **cut_kw) -> list:
    """Image-to-G_k distance for eps, eps/2, ...; it should not increase."""
    from .jordan import iterated_cut

    out = []
    for k in range(halvings + 1):
        e = eps / 2 ** k
        tree = iterated_cut(curve, e, **cut_kw)
        Z = assemble_limit_majorization(tree)
        rep = containment_report(Z, tree_segments(tree), e, samples=1024)
        out.append({"eps": e, "leaves": len(tree.leaves()), "image_to_G": rep["worst"]})
    return out
