"""Sampling-based CAT(k) tests by triangle comparison.

For a random triple (a, b, c) of sample points and t in {0.25, 0.5, 0.75}
the point m at fraction t of a geodesic from b to c is compared with its
partner on the comparison triangle: the space passes the test on this
triple if |a, m| <= |a~, m~| + tol.  Sampling can refute CAT(k) but never
certify it, so a clean run yields CONSISTENT at best.

Three sampled spaces are provided: planar polygonal domains (exact
shortest paths), simplicial complexes (Steiner-graph approximations) and
spherical caps with their intrinsic metric (closed-form geodesics around
the complementary disc).  A finite metric without geodesics can only be
wrapped for other uses; the comparison test refuses it.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra

from . import __version__
from .errors import NeedsGeodesics, NotATriangle, Unreachable
from .fillrad import FiniteMetric
from .flat_complex import ComplexPoint, SteinerGraph, TriComplex, link_girth_check
from .model_surface import as_kappa, comparison_triangle, geodesic_point, model_distance
from .polydomain import PolygonDomain, point_along

T_VALUES = (0.25, 0.5, 0.75)
N_WITNESSES = 10


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


# -- comparison distances (closed form, vectorized) -----------------------------------------

def comparison_median(kappa, ab, ac, bc, t):
    """|a~, m~| with m~ at fraction t from b~ to c~ on the comparison triangle (Stewart's relation)."""
    k = as_kappa(kappa)
    s = k.scale
    ab, ac, bc, t = (np.asarray(x, dtype=float) for x in (ab, ac, bc, t))
    if k.sign == 0:
        sq = (1 - t) * ab ** 2 + t * ac ** 2 - t * (1 - t) * bc ** 2
        return np.sqrt(np.clip(sq, 0.0, None))
    x, y, z = ab * s, ac * s, bc * s
    small = z < 1e-12
    zz = np.where(small, 1.0, z)
    if k.sign > 0:
        c = (np.sin((1 - t) * zz) * np.cos(x) + np.sin(t * zz) * np.cos(y)) / np.sin(zz)
        r = np.arccos(np.clip(c, -1.0, 1.0))
    else:
        c = (np.sinh((1 - t) * zz) * np.cosh(x) + np.sinh(t * zz) * np.cosh(y)) / np.sinh(zz)
        r = np.arccosh(np.maximum(c, 1.0))
    return np.where(small, x, r) / s


def comparison_median_scalar(kappa, ab, ac, bc, t) -> float:
    """Same quantity through explicit model points (independent route)."""
    k = as_kappa(kappa)
    A, B, C = comparison_triangle(k, ab, ac, bc)
    return model_distance(k, A, geodesic_point(k, B, C, t))


# -- sampled spaces ------------------------------------------------------------------------

class SampledSpace:
    """Finite window onto a geodesic space: sample points, distances, geodesic points."""

    kind = "abstract"
    exact = False
    oracle_tol = 0.0
    has_geodesics = True

    def pairwise(self) -> np.ndarray:
        raise NotImplementedError

    def geodesic_distances(self, A, B, C, T):
        """|a_k, m_k| with m_k at fraction T[k] of a geodesic from b_k to c_k."""
        raise NotImplementedError

    def verify_witness(self, a, b, c, t):
        """Independent recomputation of (|ab|, |ac|, |bc|, |am|) for one witness."""
        raise NotImplementedError

    def describe(self, i):
        return None

    def meta(self) -> dict:
        return {"kind": self.kind, "exact": self.exact, "oracle_tol": self.oracle_tol}


class PlanarSpace(SampledSpace):
    kind = "planar"
    exact = True

    def __init__(self, domain: PolygonDomain, points):
        self.domain = domain
        self.points = np.asarray(points, dtype=float).reshape(-1, 2)
        self.oracle_tol = 1e-9 * domain.scale
        self._D = None

    @property
    def n(self):
        return len(self.points)

    def pairwise(self):
        if self._D is None:
            self._D = self.domain.pairwise(self.points)
        return self._D

    def geodesic_distances(self, A, B, C, T):
        P = self.points
        M = self.domain.geodesic_points(P[B], P[C], T)
        return self.domain.distance_pairs(P[A], M)

    def verify_witness(self, a, b, c, t):
        dom, P = self.domain, self.points
        ab = dom.shortest_path(P[a], P[b])[0]
        ac = dom.shortest_path(P[a], P[c])[0]
        bc, path = dom.shortest_path(P[b], P[c])
        m = point_along(path, t)
        am = dom.shortest_path(P[a], m)[0]
        return ab, ac, bc, am

    def describe(self, i):
        return [float(x) for x in self.points[i]]

    def meta(self):
        d = super().meta()
        d.update({"points": int(self.n), "holes": len(self.domain.holes)})
        return d


def sample_domain(domain: PolygonDomain, n: int, rng: np.random.Generator, boundary_share: float = 0.25):
    """Uniform interior points plus random boundary points plus all vertices."""
    lo = domain.A.min(axis=0)
    hi = domain.A.max(axis=0)
    nb = int(round(n * boundary_share))
    ni = n - nb
    pts = []
    while sum(len(p) for p in pts) < ni:
        X = lo + rng.random((2 * ni + 16, 2)) * (hi - lo)
        pts.append(X[domain.contains_many(X)])
    inner = np.concatenate(pts)[:ni]
    e = rng.choice(len(domain.A), size=nb, p=domain.edge_len / domain.edge_len.sum())
    u = rng.random(nb)
    bnd = domain.A[e] + u[:, None] * (domain.B[e] - domain.A[e])
    return np.concatenate([domain.A, inner, bnd])


class ComplexSpace(SampledSpace):
    """Intrinsic metric of a complex through a Steiner graph of spacing h."""

    kind = "complex"

    def __init__(self, c: TriComplex, points, h: float):
        self.c = c
        self.points = list(points)
        self.h = float(h)
        self.oracle_tol = 4 * self.h
        self.graph = SteinerGraph(c, h)
        g, ids, extra = self.graph.with_points(self.points)
        self._g, self._ids, self._extra = g, ids, extra
        self._D, self._pred = dijkstra(g, directed=False, indices=ids, return_predecessors=True)

    @property
    def n(self):
        return len(self.points)

    def pairwise(self):
        return self._D[:, self._ids]

    def _node_desc(self, k):
        base = self.graph.n_nodes
        if k >= base:
            return self._extra[k - base]
        return self.graph.node_point(k)

    def _path(self, b, c):
        src, dst = int(self._ids[b]), int(self._ids[c])
        seq = [dst]
        while seq[-1] != src:
            nxt = int(self._pred[b, seq[-1]])
            if nxt < 0:
                raise NeedsGeodesics("sample points lie in different components")
            seq.append(nxt)
        seq.reverse()
        pts = [self._node_desc(k) for k in seq]
        pts[0], pts[-1] = self.points[b], self.points[c]
        return pts

    def geodesic_distances(self, A, B, C, T):
        M = []
        for b, c, t in zip(B, C, T):
            if b == c:
                M.append(self.points[b])
                continue
            M.append(self.graph.point_along(self._path(b, c), float(t)))
        g, ids, _ = self.graph.with_points(self.points + M)
        src = ids[:self.n]
        mids = ids[self.n:]
        uniq, inv = np.unique(A, return_inverse=True)
        D = dijkstra(g, directed=False, indices=src[uniq])
        return D[inv, mids]

    def verify_witness(self, a, b, c, t):
        D = self.pairwise()
        am = self.geodesic_distances(np.array([a]), np.array([b]), np.array([c]), np.array([t]))[0]
        return D[a, b], D[a, c], D[b, c], am

    def describe(self, i):
        p = self.points[i]
        return {"kind": p.kind, "index": int(p.index),
                "param": p.param if isinstance(p.param, float) else [float(x) for x in p.param]}

    def meta(self):
        d = super().meta()
        d.update({"points": int(self.n), "h": self.h, "nodes": int(self.graph.n_nodes)})
        return d


def sample_complex(c: TriComplex, n: int, rng: np.random.Generator) -> list:
    pts = [ComplexPoint.vertex(int(v)) for v in c.used_vertices()]
    L = c.lengths
    s = L.sum(axis=1) / 2
    area = np.sqrt(np.clip(s * (s - L[:, 0]) * (s - L[:, 1]) * (s - L[:, 2]), 0.0, None))
    T = rng.choice(len(area), size=n, p=area / area.sum())
    lam = rng.dirichlet(np.ones(3), size=n)
    lam = np.clip(lam, 1e-6, None)
    lam = lam / lam.sum(axis=1, keepdims=True)
    return pts + [ComplexPoint.face(int(t), l) for t, l in zip(T, lam)]


# -- spherical cap ------------------------------------------------------------------------------

def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


class SphereCap:
    """Closed ball of radius R about the north pole of the unit sphere, intrinsic metric.

    For R > pi/2 the complement is an open disc of radius rho = pi - R about
    the south pole S.  A shortest path is either a great-circle arc avoiding
    that disc, or wraps it: tangent arc, arc of the boundary circle, tangent
    arc.  The tangent from a point at angle alpha from S has length tau with
    cos(alpha) = cos(tau) cos(rho) and touches at azimuth offset beta with
    cos(beta) = tan(rho) / tan(alpha).
    """

    def __init__(self, radius: float):
        if not 0 < radius < math.pi:
            raise ValueError("cap radius must lie in (0, pi)")
        self.R = float(radius)
        self.rho = math.pi - self.R
        self.S = np.array([0.0, 0.0, -1.0])

    def point(self, colat, phi):
        colat, phi = np.asarray(colat, dtype=float), np.asarray(phi, dtype=float)
        return np.stack([np.sin(colat) * np.cos(phi), np.sin(colat) * np.sin(phi), np.cos(colat)], axis=-1)

    def sample(self, n: int, rng: np.random.Generator, boundary_share: float = 0.5):
        nb = int(round(n * boundary_share))
        z = rng.uniform(math.cos(self.R), 1.0, n - nb)
        phi = rng.uniform(0, 2 * math.pi, n)
        inner = self.point(np.arccos(z), phi[:n - nb])
        bnd = self.point(np.full(nb, self.R), phi[n - nb:])
        return np.concatenate([inner, bnd])

    def _candidates(self, p, q):
        """Lengths and descriptions of the candidate shortest paths (vectorized)."""
        p, q = np.atleast_2d(p), np.atleast_2d(q)
        dot = np.clip(np.sum(p * q, axis=1), -1.0, 1.0)
        d = np.arccos(dot)
        cr = np.cross(p, q)
        nn = np.linalg.norm(cr, axis=1)
        ok = nn > 1e-15
        n = np.where(ok[:, None], cr / np.where(ok, nn, 1.0)[:, None], np.array([1.0, 0.0, 0.0]))
        sn = n @ self.S
        circ = np.arcsin(np.clip(np.abs(sn), 0.0, 1.0))
        c = _unit(self.S[None] - sn[:, None] * n)
        on_minor = (np.sum(np.cross(p, c) * n, axis=1) >= 0) & (np.sum(np.cross(c, q) * n, axis=1) >= 0)
        if self.R <= math.pi / 2:
            # convex cap: the minor arc never leaves it
            inf = np.full(len(p), np.inf)
            return np.stack([d, inf, inf, inf], axis=1), n, np.zeros(len(p)), (None,) * 6
        blocked = circ < self.rho
        minor_ok = ~(blocked & on_minor)
        major_ok = ~(blocked & ~on_minor) & ok
        alpha_p = np.arccos(np.clip(p @ self.S, -1.0, 1.0))
        alpha_q = np.arccos(np.clip(q @ self.S, -1.0, 1.0))
        cr_ = math.cos(self.rho)
        tau_p = np.arccos(np.clip(np.cos(alpha_p) / cr_, -1.0, 1.0))
        tau_q = np.arccos(np.clip(np.cos(alpha_q) / cr_, -1.0, 1.0))
        tr = math.tan(self.rho)
        with np.errstate(divide="ignore"):
            beta_p = np.arccos(np.clip(tr / np.tan(alpha_p), -1.0, 1.0))
            beta_q = np.arccos(np.clip(tr / np.tan(alpha_q), -1.0, 1.0))
        phi_p = np.arctan2(p[:, 1], p[:, 0])
        phi_q = np.arctan2(q[:, 1], q[:, 0])
        dphi = np.mod(phi_q - phi_p + math.pi, 2 * math.pi) - math.pi
        sr = math.sin(self.rho)
        short = np.abs(dphi) - beta_p - beta_q
        long = 2 * math.pi - np.abs(dphi) - beta_p - beta_q
        inf = np.full(len(p), np.inf)
        L = np.stack([
            np.where(minor_ok, d, inf),
            np.where(major_ok, 2 * math.pi - d, inf),
            np.where(short >= 0, tau_p + tau_q + sr * short, inf),
            np.where(long >= 0, tau_p + tau_q + sr * long, inf),
        ], axis=1)
        return L, n, dphi, (tau_p, tau_q, beta_p, beta_q, phi_p, phi_q)

    def distance(self, p, q):
        L, *_ = self._candidates(p, q)
        return L.min(axis=1)

    def pairwise(self, P):
        n = len(P)
        ii, jj = np.triu_indices(n, 1)
        D = np.zeros((n, n))
        d = self.distance(P[ii], P[jj])
        D[ii, jj] = d
        D[jj, ii] = d
        return D

    def geodesic_point(self, p, q, t: float):
        L, n, dphi, (tp, tq, bp, bq, fp, fq) = self._candidates(p, q)
        k = int(np.argmin(L[0]))
        total = L[0, k]
        s = t * total
        p = np.asarray(p, dtype=float).reshape(3)
        q = np.asarray(q, dtype=float).reshape(3)
        if k < 2:
            axis = n[0] if k == 0 else -n[0]
            return math.cos(s) * p + math.sin(s) * np.cross(axis, p)
        sig = np.sign(dphi[0]) or 1.0
        if k == 3:
            sig = -sig
        tau_p, tau_q = float(tp[0]), float(tq[0])
        phi_tp = float(fp[0]) + sig * float(bp[0])
        phi_tq = float(fq[0]) - sig * float(bq[0])
        Tp = self.point(self.R, phi_tp)
        Tq = self.point(self.R, phi_tq)
        if s <= tau_p:
            return _slerp(p, Tp, s / tau_p if tau_p > 0 else 1.0)
        arc = total - tau_p - tau_q
        if s <= tau_p + arc:
            f = (s - tau_p) / arc if arc > 0 else 0.0
            dphi_arc = arc / math.sin(self.rho)
            return self.point(self.R, phi_tp + sig * f * dphi_arc)
        return _slerp(Tq, q, (s - tau_p - arc) / tau_q if tau_q > 0 else 1.0)


def _slerp(p, q, t):
    om = math.acos(min(max(float(np.dot(p, q)), -1.0), 1.0))
    if om < 1e-15:
        return p.copy()
    return (math.sin((1 - t) * om) * p + math.sin(t * om) * q) / math.sin(om)


class CapSpace(SampledSpace):
    kind = "spherical cap"
    exact = True

    def __init__(self, cap: SphereCap, points):
        self.cap = cap
        self.points = np.asarray(points, dtype=float).reshape(-1, 3)
        self.oracle_tol = 1e-9
        self._D = None

    @property
    def n(self):
        return len(self.points)

    def pairwise(self):
        if self._D is None:
            self._D = self.cap.pairwise(self.points)
        return self._D

    def geodesic_distances(self, A, B, C, T):
        P = self.points
        M = np.array([self.cap.geodesic_point(P[b], P[c], t) for b, c, t in zip(B, C, T)])
        return self.cap.distance(P[A], M)

    def verify_witness(self, a, b, c, t):
        P, cap = self.points, self.cap
        m = cap.geodesic_point(P[b], P[c], t)
        f = lambda x, y: float(cap.distance(x, y)[0])
        return f(P[a], P[b]), f(P[a], P[c]), f(P[b], P[c]), f(P[a], m)

    def describe(self, i):
        return [float(x) for x in self.points[i]]

    def meta(self):
        d = super().meta()
        d.update({"points": int(self.n), "radius": self.cap.R})
        return d


class MetricSpace(SampledSpace):
    """A finite metric: distances only."""

    kind = "finite metric"
    has_geodesics = False

    def __init__(self, m: FiniteMetric):
        self.m = m

    @property
    def n(self):
        return self.m.n

    def pairwise(self):
        return self.m.d


# -- the test ------------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    passed: bool
    kappa: float
    trials: int
    evaluated: int
    skipped: int
    tol: float
    oracle_tol: float
    seed: int
    violations: int
    candidates: int
    max_margin: float
    witnesses: list = field(default_factory=list)
    space: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def triangle_comparison_test(space: SampledSpace, kappa=0.0, trials: int = 10_000, tol: float = 1e-9,
                             seed: int = 0, t_values=T_VALUES) -> ComparisonReport:
    """Random triples; margin = |a,m| - |a~,m~| - tol; a violation needs margin > oracle_tol."""
    if not space.has_geodesics:
        raise NeedsGeodesics("the comparison test needs a geodesic oracle")
    k = as_kappa(kappa)
    rng = rng_for(seed)
    n = space.n
    D = space.pairwise()
    tri = np.stack([rng.integers(0, n, trials) for _ in range(3)], axis=1)
    distinct = (tri[:, 0] != tri[:, 1]) & (tri[:, 1] != tri[:, 2]) & (tri[:, 0] != tri[:, 2])
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab, ac, bc = D[a, b], D[a, c], D[b, c]
    keep = distinct & np.isfinite(ab) & np.isfinite(ac) & np.isfinite(bc)
    if k.sign > 0:
        keep &= (ab + ac + bc) < 2 * k.diameter
    skipped = int(trials - keep.sum())
    idx = np.nonzero(keep)[0]
    tv = np.asarray(t_values, dtype=float)
    A = np.repeat(a[idx], len(tv))
    B = np.repeat(b[idx], len(tv))
    C = np.repeat(c[idx], len(tv))
    T = np.tile(tv, len(idx))
    if len(A):
        am = space.geodesic_distances(A, B, C, T)
        comp = comparison_median(k, D[A, B], D[A, C], D[B, C], T)
        margin = am - comp - tol
    else:
        am = comp = margin = np.zeros(0)
    viol = np.nonzero(margin > space.oracle_tol)[0]
    order = viol[np.lexsort((np.arange(len(viol)), -margin[viol]))][:N_WITNESSES]
    witnesses = []
    for j in order:
        aa, bb, cc, tt = int(A[j]), int(B[j]), int(C[j]), float(T[j])
        try:
            x_ab, x_ac, x_bc, x_am = space.verify_witness(aa, bb, cc, tt)
            x_margin = x_am - comparison_median_scalar(k, x_ab, x_ac, x_bc, tt) - tol
        except (NotATriangle, Unreachable):
            # the independent route cannot reproduce the triple: not confirmed
            x_margin = None
        witnesses.append({
            "a": aa, "b": bb, "c": cc, "t": tt,
            "points": [space.describe(aa), space.describe(bb), space.describe(cc)],
            "d_am": float(am[j]), "d_comparison": float(comp[j]), "margin": float(margin[j]),
            "recheck_margin": None if x_margin is None else float(x_margin),
            "reverified": x_margin is not None and bool(x_margin > space.oracle_tol),
        })
    witnesses = [w for w in witnesses if w["reverified"]] + [w for w in witnesses if not w["reverified"]]
    # a refutation stands only if at least one witness survives the independent recheck
    confirmed = any(w["reverified"] for w in witnesses)
    n_total = int(len(viol)) if confirmed else 0
    return ComparisonReport(
        passed=n_total == 0, kappa=k.value, trials=int(trials), evaluated=int(len(idx)),
        skipped=skipped, tol=float(tol), oracle_tol=float(space.oracle_tol), seed=int(seed),
        violations=n_total, candidates=int(len(viol)),
        max_margin=float(margin.max()) if len(margin) else 0.0,
        witnesses=witnesses, space=space.meta())


# -- Theorem 1.1 pipeline ---------------------------------------------------------------------

def _verdict(comparison: ComparisonReport, hypotheses: dict) -> str:
    if comparison.violations:
        return "VIOLATION"
    if not all(v for v in hypotheses.values() if isinstance(v, bool)) or comparison.evaluated == 0:
        return "INCONCLUSIVE"
    return "CONSISTENT"


def verify_theorem_1_1(scene, kappa=0.0, samples: int = 200, trials: int = 10_000, tol: float = 1e-9,
                       seed: int = 0, h: float | None = None) -> dict:
    """Hypotheses (connectivity, H1 = 0, ambient) plus the comparison test on the intrinsic metric."""
    from .chains import homology_ranks

    k = as_kappa(kappa)
    rng = rng_for(seed)
    hyp = {}
    if isinstance(scene, PolygonDomain):
        space = PlanarSpace(scene, sample_domain(scene, samples, rng))
        hyp["h1_rank"] = len(scene.holes)
        hyp["ambient"] = "euclidean plane"
        hyp["ambient_contractible"] = True
        hyp["ambient_cat_kappa"] = k.sign >= 0
    elif isinstance(scene, TriComplex):
        hh = h if h is not None else float(np.median(scene.edge_len)) / 4
        space = ComplexSpace(scene, sample_complex(scene, samples, rng), hh)
        hr = homology_ranks(scene)
        hyp["h1_rank"] = int(hr["b1"])
        hyp["h1_torsion"] = [int(x) for x in hr["torsion"]]
        link = link_girth_check(scene, k)
        hyp["link_condition"] = bool(link.passed)
        hyp["ambient"] = "the complex itself"
        hyp["ambient_contractible"] = bool(hr["b1"] == 0 and hr["b2"] == 0 and not hr["torsion"])
    elif isinstance(scene, SphereCap):
        space = CapSpace(scene, scene.sample(samples, rng))
        hyp["h1_rank"] = 0
        hyp["ambient"] = "unit sphere"
        hyp["ambient_contractible"] = False
        hyp["ambient_cat_kappa"] = k.value >= 1.0
    else:
        raise TypeError(f"unsupported scene type {type(scene).__name__}")
    D = space.pairwise()
    hyp["lipschitz_connected"] = bool(np.all(np.isfinite(D)))
    hyp["h1_trivial"] = hyp["h1_rank"] == 0 and not hyp.get("h1_torsion")
    comp = triangle_comparison_test(space, k, trials, tol, seed)
    return {"tool": "cat2d", "version": __version__, "seed": int(seed), "kappa": k.value,
            "verdict": _verdict(comp, {kk: v for kk, v in hyp.items() if kk in (
                "lipschitz_connected", "h1_trivial", "ambient_contractible", "ambient_cat_kappa", "link_condition")}),
            "hypotheses": hyp, "comparison": comp.to_json(),
            "tolerances": {"tol": tol, "oracle_tol": space.oracle_tol}}


def witnesses_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "c", "t", "d_am", "d_comparison", "margin", "recheck_margin", "reverified"])
    for x in report["comparison"]["witnesses"]:
        w.writerow([x["a"], x["b"], x["c"], x["t"], repr(x["d_am"]), repr(x["d_comparison"]),
                    repr(x["margin"]), repr(x["recheck_margin"]), x["reverified"]])
    return buf.getvalue()
