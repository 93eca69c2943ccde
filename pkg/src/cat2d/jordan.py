"""Cutting Jordan polygons: cuts, essential 2-fold cuts and iterated cuts.

Planar scenes: the ambient space is the plane (curvature 0, or curvature 1
with the length restriction of the spherical setting), so the closed interior
S of a simple polygon is itself a closed polygonal domain and a cut is a
straight chord whose open part lies in the open interior.

Candidate chords come from ray casting: from every boundary sample (uniform
in arclength, plus all vertices) rays are cast in a fixed fan of directions
and towards every vertex; the first boundary hit ends the chord.  A ray that
grazes a vertex stops there, which is how tangential chords get split into
two cuts.  Float decisions use a length tolerance of 1e-12 times the curve
diameter; every cut that is returned is re-checked with exact rational
predicates.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (CutConstructionFailed, BudgetExceeded, InvalidPolygon,
                     InvariantViolated, PerimeterTooLarge, PreconditionError,
                     ResolutionExceeded)
from .model_surface import as_kappa
from .polydomain import PolygonDomain
from .predicates import is_simple_polygon, orient, point_in_polygon, signed_area
from .rho import rho as rho_of

N_DIR = 180
ANG_TOL = 1e-12
MAX_SAMPLES = 4096


def delta_theory(eps0: float) -> float:
    return eps0 / (1000.0 * math.pi)


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


class JordanPolygon:
    """Simple closed polygon, stored counterclockwise, parametrized by arclength from vertex 0."""

    def __init__(self, vertices, kappa=0.0, validate=True):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if len(v) < 3:
            raise InvalidPolygon("a Jordan polygon needs at least 3 vertices")
        if np.any(np.all(v == np.roll(v, -1, axis=0), axis=1)):
            raise InvalidPolygon("consecutive vertices coincide")
        if validate and not is_simple_polygon(v):
            raise InvalidPolygon("curve is not simple")
        if signed_area(v) < 0:
            v = np.concatenate([v[:1], v[:0:-1]])
        self.vertices = v
        self.kappa = as_kappa(kappa)
        self.A = v
        self.B = np.roll(v, -1, axis=0)
        e = self.B - self.A
        self.edge_len = np.hypot(e[:, 0], e[:, 1])
        self.cum = np.concatenate([[0.0], np.cumsum(self.edge_len)])
        self.length = float(self.cum[-1])
        self.diameter = float(np.max(np.hypot(*(v[:, None] - v[None]).transpose(2, 0, 1))))
        self.area = float(signed_area(v))
        self.tol = 1e-12 * max(self.diameter, 1e-300)
        if self.kappa.sign > 0 and self.kappa.normalize(self.length) >= 2 * math.pi:
            raise PerimeterTooLarge(f"curve length {self.length} >= 2 D_k = {2 * self.kappa.diameter}")
        self._domain = None

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def domain(self) -> PolygonDomain:
        """Closed interior as a polygonal domain (with its intrinsic metric)."""
        if self._domain is None:
            self._domain = PolygonDomain(self.vertices, validate=False)
        return self._domain

    def point_at(self, s):
        s = np.mod(np.asarray(s, dtype=float), self.length)
        e = np.clip(np.searchsorted(self.cum, s, side="right") - 1, 0, self.n - 1)
        u = (s - self.cum[e]) / self.edge_len[e]
        return self.A[e] + u[..., None] * (self.B[e] - self.A[e])

    def locate_param(self, s):
        """(edge index, fraction along edge) of a parameter."""
        s = float(np.mod(s, self.length))
        e = int(np.clip(np.searchsorted(self.cum, s, side="right") - 1, 0, self.n - 1))
        return e, (s - self.cum[e]) / self.edge_len[e]

    def exact_point(self, s):
        e, u = self.locate_param(s)
        a = [Fraction(float(x)) for x in self.A[e]]
        b = [Fraction(float(x)) for x in self.B[e]]
        if u <= 0.0:
            return tuple(a)
        if u >= 1.0:
            return tuple(b)
        fu = Fraction(u)
        return (a[0] + fu * (b[0] - a[0]), a[1] + fu * (b[1] - a[1]))

    def snap(self, s):
        """Parameters within tolerance of a vertex are moved onto it."""
        s = np.mod(np.asarray(s, dtype=float), self.length)
        k = np.searchsorted(self.cum, s)
        out = s.copy()
        for off in (0, -1):
            kk = np.clip(k + off, 0, self.n)
            close = np.abs(self.cum[kk] - s) <= self.tol
            out = np.where(close, self.cum[kk], out)
        return np.mod(out, self.length)

    def samples(self, n_b: int):
        """Uniform arclength samples merged with all vertex parameters."""
        s = np.concatenate([self.cum[:-1], np.arange(n_b) * (self.length / n_b)])
        s = np.unique(self.snap(s))
        return s

    def in_arc(self, s, a, b):
        """s in the closed arc from parameter a forward to parameter b."""
        L = self.length
        return np.mod(np.asarray(s) - a, L) <= np.mod(b - a, L) + self.tol

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist(), "length": self.length, "diameter": self.diameter}

    def _edge_dirs(self):
        e = (self.B - self.A) / self.edge_len[:, None]
        ein = np.roll(e, 1, axis=0)
        turn = _cross(ein, e)
        kind = np.where(turn > ANG_TOL, 1, np.where(turn < -ANG_TOL, -1, 0))
        return e, ein, kind


# -- ray casting ----------------------------------------------------------------------

def cast_rays(curve: JordanPolygon, P, D):
    """First boundary hit of each ray P + t D (t > tol).  Returns (t, hit parameter)."""
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    D = np.asarray(D, dtype=float).reshape(-1, 2)
    A, B = curve.A, curve.B
    E = B - A
    tol = curve.tol
    out_t = np.full(len(P), np.inf)
    out_s = np.full(len(P), np.nan)
    step = max(1, 2_000_000 // curve.n)
    for s0 in range(0, len(P), step):
        p = P[s0:s0 + step, None, :]
        d = D[s0:s0 + step, None, :]
        den = _cross(d, E[None])
        r = A[None] - p
        with np.errstate(divide="ignore", invalid="ignore"):
            t = _cross(r, E[None]) / den
            u = _cross(r, d) / den
        ulen = u * curve.edge_len[None]
        ok = (np.abs(den) > 1e-15) & (t > tol) & (ulen >= -tol) & (ulen <= curve.edge_len[None] + tol)
        t = np.where(ok, t, np.inf)
        k = np.argmin(t, axis=1)
        tt = t[np.arange(len(k)), k]
        uu = np.clip(u[np.arange(len(k)), k], 0.0, 1.0)
        out_t[s0:s0 + step] = tt
        out_s[s0:s0 + step] = np.where(np.isfinite(tt), curve.cum[k] + uu * curve.edge_len[k], np.nan)
    return out_t, np.where(np.isnan(out_s), np.nan, curve.snap(np.nan_to_num(out_s)))


def _inward(curve: JordanPolygon, s, D):
    """Strictly inward directions D at boundary parameters s (broadcast)."""
    e_n, ein_n, kind = curve._edge_dirs()
    s = np.asarray(s)
    k = np.clip(np.searchsorted(curve.cum, s, side="right") - 1, 0, curve.n - 1)
    at_v = np.abs(curve.cum[k] - s) <= curve.tol
    a = _cross(e_n[k], D) > ANG_TOL
    b = _cross(ein_n[k], D) > ANG_TOL
    vert = np.where(kind[k] == 1, a & b, np.where(kind[k] == -1, a | b, a))
    return np.where(at_v, vert, a)


# -- cuts -----------------------------------------------------------------------------------

@dataclass
class Cut:
    """Chord between boundary parameters s0 < s1 of its curve."""

    s0: float
    s1: float
    p0: tuple
    p1: tuple
    length: float

    @property
    def geometry(self):
        return [self.p0, self.p1]

    def pieces(self, curve: JordanPolygon):
        a = self.s1 - self.s0
        return (a + self.length, curve.length - a + self.length)

    def to_json(self) -> dict:
        return {"s0": self.s0, "s1": self.s1, "p0": list(self.p0), "p1": list(self.p1), "length": self.length}


def make_cut(curve: JordanPolygon, s0: float, s1: float) -> Cut:
    s0, s1 = (float(x) for x in curve.snap(np.array([s0, s1])))
    if s1 < s0:
        s0, s1 = s1, s0
    p0, p1 = curve.point_at(np.array([s0, s1]))
    return Cut(s0, s1, (float(p0[0]), float(p0[1])), (float(p1[0]), float(p1[1])),
               float(math.hypot(*(p1 - p0))))


def cut_is_valid_exact(curve: JordanPolygon, cut: Cut) -> bool:
    """Exact test of c in closed interior and c meeting the curve only at its endpoints."""
    p = curve.exact_point(cut.s0)
    q = curve.exact_point(cut.s1)
    if p == q:
        return False
    V = [(Fraction(float(x)), Fraction(float(y))) for x, y in curve.vertices]
    n = len(V)
    for i in range(n):
        a, b = V[i], V[(i + 1) % n]
        o1, o2 = orient(p, q, a), orient(p, q, b)
        o3, o4 = orient(a, b, p), orient(a, b, q)
        if o1 * o2 < 0 and o3 * o4 < 0:
            return False
    for a in V:
        if a == p or a == q:
            continue
        if orient(p, q, a) == 0 and min(p[0], q[0]) <= a[0] <= max(p[0], q[0]) \
                and min(p[1], q[1]) <= a[1] <= max(p[1], q[1]):
            return False
    mid = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
    return point_in_polygon(mid, V) == 1


@dataclass
class CutCandidates:
    s0: np.ndarray
    s1: np.ndarray
    length: np.ndarray
    n_b: int
    n_dir: int

    def __len__(self):
        return len(self.s0)


def default_nb(curve: JordanPolygon, eps: float | None) -> int:
    if eps is None or eps <= 0:
        return 64
    return int(min(MAX_SAMPLES, max(64, math.ceil(curve.length / (eps / 8)))))


def candidate_cuts(curve: JordanPolygon, n_b: int = 64, n_dir: int = N_DIR) -> CutCandidates:
    """All chords found by the ray fan from boundary samples, deduplicated."""
    s = curve.samples(n_b)
    P = curve.point_at(s)
    th = np.arange(n_dir) * (2 * math.pi / n_dir)
    fan = np.stack([np.cos(th), np.sin(th)], axis=1)
    S, Dd = [], []
    ns = len(s)
    S.append(np.repeat(s, n_dir))
    Dd.append(np.tile(fan, (ns, 1)))
    if curve.n <= 400:
        # towards every vertex
        to_v = curve.vertices[None, :, :] - P[:, None, :]
        nrm = np.hypot(to_v[..., 0], to_v[..., 1])
        good = nrm > curve.tol
        to_v = to_v / np.where(good, nrm, 1.0)[..., None]
        ii, jj = np.nonzero(good)
        S.append(s[ii])
        Dd.append(to_v[ii, jj])
    S = np.concatenate(S)
    Dd = np.concatenate(Dd)
    inw = _inward(curve, S, Dd)
    S, Dd = S[inw], Dd[inw]
    t, hit = cast_rays(curve, curve.point_at(S), Dd)
    ok = np.isfinite(t) & ~np.isnan(hit)
    S, hit, t = S[ok], hit[ok], t[ok]
    diff = np.abs(S - hit)
    ok = np.minimum(diff, curve.length - diff) > curve.tol
    a = np.minimum(S[ok], hit[ok])
    b = np.maximum(S[ok], hit[ok])
    key = np.stack([np.round(a / max(curve.tol, 1e-300)), np.round(b / max(curve.tol, 1e-300))], axis=1)
    _, first = np.unique(key, axis=0, return_index=True)
    first = np.sort(first)
    a, b = a[first], b[first]
    pa, pb = curve.point_at(a), curve.point_at(b)
    L = np.hypot(*(pb - pa).T)
    return CutCandidates(a, b, L, n_b, n_dir)


def _pick(order_keys):
    return np.lexsort(order_keys)


def find_long_cut(curve: JordanPolygon, threshold: float, n_b: int | None = None,
                  n_dir: int = N_DIR, candidates: CutCandidates | None = None) -> Cut | None:
    """Longest sampled cut of length >= threshold, or None (degenerate at this resolution)."""
    if not threshold > 0:
        raise PreconditionError("threshold must be positive")
    cand = candidates or candidate_cuts(curve, n_b or 64, n_dir)
    idx = np.nonzero(cand.length >= threshold)[0]
    if len(idx) == 0:
        return None
    order = idx[np.lexsort((cand.s1[idx], cand.s0[idx], -cand.length[idx]))]
    for k in order[:64]:
        c = make_cut(curve, cand.s0[k], cand.s1[k])
        if cut_is_valid_exact(curve, c):
            return c
    return None


def longest_cut(curve: JordanPolygon, n_b: int = 64, n_dir: int = N_DIR):
    cand = candidate_cuts(curve, n_b, n_dir)
    return float(cand.length.max()) if len(cand) else 0.0


# -- splitting -----------------------------------------------------------------------------

def split_curve(curve: JordanPolygon, cut: Cut):
    """The two Jordan curves arising from a cut.

    Child A runs along the arc [s0, s1] and closes along the chord; child B
    runs along the arc [s1, s0 + l] and closes along the chord.  Both start
    at their first arc point, so child parameters map back to the parent by a
    shift (arc part) or to chord positions (closing part).
    """
    L = curve.length
    tol = curve.tol
    p0 = np.array(cut.p0)
    p1 = np.array(cut.p1)
    inner_a = [curve.vertices[i] for i in range(curve.n) if cut.s0 + tol < curve.cum[i] < cut.s1 - tol]
    inner_b = [curve.vertices[i] for i in range(curve.n) if curve.cum[i] > cut.s1 + tol] + \
              [curve.vertices[i] for i in range(curve.n) if curve.cum[i] < cut.s0 - tol]
    va = np.array([p0] + inner_a + [p1])
    vb = np.array([p1] + inner_b + [p0])
    try:
        A = JordanPolygon(va, curve.kappa)
        B = JordanPolygon(vb, curve.kappa)
    except InvalidPolygon as exc:
        raise CutConstructionFailed(f"cut does not split the curve into Jordan curves: {exc}") from None
    if abs(A.vertices[0] - p0).max() > 0 or abs(B.vertices[0] - p1).max() > 0:
        raise InvariantViolated("child curve lost its base point")
    del L
    return A, B


def parent_to_child(curve: JordanPolygon, cut: Cut, side: str, s: float) -> float:
    """Parameter of a parent arc point in child A ('A') or child B ('B')."""
    if side == "A":
        return float(s - cut.s0)
    return float(np.mod(s - cut.s1, curve.length))


def _chord_mid_param(curve: JordanPolygon, cut: Cut, side: str) -> float:
    arc = cut.s1 - cut.s0 if side == "A" else curve.length - (cut.s1 - cut.s0)
    return arc + cut.length / 2


# -- 2-fold cuts ------------------------------------------------------------------------------

@dataclass
class TwoFold:
    curve: JordanPolygon
    cut: Cut
    children: tuple
    child_cuts: tuple
    grandchildren: tuple      # ((A1, A2), (B1, B2))
    branch: str
    delta_used: float
    delta_guaranteed: float
    delta_achieved: float
    reports: dict = field(default_factory=dict)

    def piece_lengths(self):
        return [g.length for pair in self.grandchildren for g in pair]


def _normal_hits(curve: JordanPolygon, s0, s1, perturb=0.0):
    """Midpoints and the first hits of the two chord normals (vectorized)."""
    p0, p1 = curve.point_at(s0), curve.point_at(s1)
    m = 0.5 * (p0 + p1)
    d = p1 - p0
    d = d / np.hypot(d[:, 0], d[:, 1])[:, None]
    nrm = np.stack([-d[:, 1], d[:, 0]], axis=1)
    c, s = math.cos(perturb), math.sin(perturb)
    rot = lambda v: np.stack([c * v[:, 0] - s * v[:, 1], s * v[:, 0] + c * v[:, 1]], axis=1)
    _, hp = cast_rays(curve, m, rot(nrm))
    _, hm = cast_rays(curve, m, rot(-nrm))
    return m, hp, hm


def _twofold_pieces(curve: JordanPolygon, s0, s1, L, m, hits):
    """Lengths of the two pieces each normal cut creates (nan when tangent or missing)."""
    out = []
    ell = curve.length
    for h in hits:
        y = curve.point_at(np.nan_to_num(h))
        my = np.hypot(*(y - m).T)
        inA = (h > s0 + curve.tol) & (h < s1 - curve.tol)
        inB = ((h > s1 + curve.tol) | (h < s0 - curve.tol))
        # child A pieces
        a1 = (h - s0) + my + L / 2
        a2 = (s1 - h) + my + L / 2
        hb = np.mod(h - s1, ell)
        blen = ell - (s1 - s0)
        b1 = hb + my + L / 2
        b2 = (blen - hb) + my + L / 2
        side = np.where(inA, 0, np.where(inB, 1, -1))
        bad = np.isnan(h) | (side < 0)
        p1 = np.where(side == 0, a1, b1)
        p2 = np.where(side == 0, a2, b2)
        out.append((np.where(bad, np.nan, p1), np.where(bad, np.nan, p2), side))
    return out


def essential_2fold_nondegenerate(curve: JordanPolygon, c: Cut, delta: float | None = None) -> TwoFold:
    """Cut by c, then by the two normals of c at its midpoint."""
    if c.length <= curve.tol:
        raise PreconditionError("cut has zero length")
    if delta is not None and c.length < 2 * delta * curve.length - curve.tol:
        raise PreconditionError(f"cut length {c.length} < 2 delta l = {2 * delta * curve.length}")
    A, B = split_curve(curve, c)
    for perturb in (0.0, 0.01, -0.01):
        m, hp, hm = _normal_hits(curve, np.array([c.s0]), np.array([c.s1]), perturb)
        pcs = _twofold_pieces(curve, c.s0, c.s1, c.length, m, (hp, hm))
        sides = {int(pcs[0][2][0]), int(pcs[1][2][0])}
        if sides == {0, 1}:
            break
    else:
        raise CutConstructionFailed("normal ray exits through an endpoint of the cut")
    child_cut = {}
    for h, (_, _, side) in zip((hp[0], hm[0]), pcs):
        nm = "A" if side[0] == 0 else "B"
        ch = A if nm == "A" else B
        sy = parent_to_child(curve, c, nm, h)
        sm = _chord_mid_param(curve, c, nm)
        cc = make_cut(ch, sy, sm)
        if not cut_is_valid_exact(ch, cc):
            raise CutConstructionFailed("normal chord is not a cut of the child curve")
        child_cut[nm] = cc
    gA = split_curve(A, child_cut["A"])
    gB = split_curve(B, child_cut["B"])
    lens = [g.length for g in gA + gB]
    dach = 1.0 - max(lens) / curve.length
    d = 0.0 if delta is None else delta
    return TwoFold(curve, c, (A, B), (child_cut["A"], child_cut["B"]), (gA, gB), "nondegenerate",
                   d, d * _rho_for(curve), dach, {"perturbation": perturb})


def _rho_for(curve: JordanPolygon) -> float:
    if curve.kappa.sign <= 0:
        return 1.0
    return rho_of(curve.kappa.normalize(curve.length))


# -- degenerate branch -------------------------------------------------------------------------

def _degenerate_samples(curve: JordanPolygon, n: int):
    s = curve.samples(n)
    if len(s) > MAX_SAMPLES // 8:
        s = np.unique(np.concatenate([curve.cum[:-1], np.arange(n) * curve.length / n]))[:MAX_SAMPLES // 8]
    return s


def essential_cut_degenerate(curve: JordanPolygon, delta: float, n_samples: int = 256,
                             n_dir: int = N_DIR, n_z: int = 64, check: bool = True,
                             n_b: int | None = None):
    """Cut crossing from one diameter arc to the other near the close pair x+, x-.

    Returns (cut, report).  Raises PreconditionError when a cut of length
    >= 2 delta l exists, ResolutionExceeded when the scan finds no admissible cut.
    """
    ell = curve.length
    if check:
        long = find_long_cut(curve, 2 * delta * ell, n_b=n_b or default_nb(curve, None), n_dir=n_dir)
        if long is not None:
            raise PreconditionError(f"curve is not degenerate: cut of length {long.length} >= {2 * delta * ell}")
    dom = curve.domain
    s = _degenerate_samples(curve, n_samples)
    P = curve.point_at(s)
    D = dom.pairwise(P)
    i, j = np.unravel_index(np.argmax(D), D.shape)
    i, j = (int(i), int(j)) if i < j else (int(j), int(i))
    sp_, sq_ = float(s[i]), float(s[j])
    d = float(D[i, j])
    plus = curve.in_arc(s, sp_, sq_)
    minus = curve.in_arc(s, sq_, sp_)
    far = (D[i] >= d / 3) & (D[j] >= d / 3)
    g0p = np.nonzero(plus & far)[0]
    g0m = np.nonzero(minus & far & ~plus)[0]
    rep = {"samples": int(len(s)), "p": sp_, "q": sq_, "d_hat": d, "delta": delta,
           "n_dir": n_dir, "n_z": n_z, "bound_4_delta_l": 4 * delta * ell,
           "lemma_hypothesis_12_delta_l_le_d": bool(12 * delta * ell <= d)}
    if len(g0p) == 0 or len(g0m) == 0:
        raise ResolutionExceeded("trimmed arcs are empty at this sampling", rep)
    sub = D[np.ix_(g0p, g0m)]
    a, b = np.unravel_index(np.argmin(sub), sub.shape)
    xp, xm = int(g0p[a]), int(g0m[b])
    rep.update({"x_plus": float(s[xp]), "x_minus": float(s[xm]), "dist_x": float(D[xp, xm]),
                "close_pair_within_bound": bool(D[xp, xm] <= 4 * delta * ell)})
    _, path = dom.shortest_path(P[xp], P[xm])
    # contacts of the path with the curve, in path order, labelled by arc
    contact = []
    for k, pt in enumerate(path):
        sk = _param_of_point(curve, np.array(pt))
        if sk is None:
            continue
        lab = "+" if curve.in_arc(sk, sp_, sq_) else "-"
        contact.append((k, sk, lab))
    first_minus = next((idx for idx, c in enumerate(contact) if c[2] == "-"), None)
    if first_minus is None or first_minus == 0:
        raise ResolutionExceeded("path between the close pair has no + to - transition", rep)
    k0, s0p, _ = contact[first_minus - 1]
    k1, s0m, _ = contact[first_minus]
    eta = np.array(path[k0:k1 + 1])
    rep.update({"x0_plus": s0p, "x0_minus": s0m,
                "eta_length": float(np.sum(np.hypot(*np.diff(eta, axis=0).T)))})
    # scan points z along eta and chord directions through z
    seg = np.diff(eta, axis=0)
    seglen = np.hypot(*seg.T)
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    tz = (np.arange(n_z) + 0.5) / n_z * cum[-1]
    k = np.clip(np.searchsorted(cum, tz, side="right") - 1, 0, len(seg) - 1)
    Z = eta[k] + ((tz - cum[k]) / seglen[k])[:, None] * seg[k]
    Z = Z[dom.boundary_distance(Z) > curve.tol]
    th = np.arange(n_dir) * (math.pi / n_dir)
    dirs = [np.stack([np.cos(th), np.sin(th)], axis=1)]
    for v in seg:
        u = v / np.hypot(*v)
        dirs.append(np.array([u, [-u[1], u[0]]]))
    dirs = np.concatenate(dirs)
    ZZ = np.repeat(Z, len(dirs), axis=0)
    DD = np.tile(dirs, (len(Z), 1))
    _, h1 = cast_rays(curve, ZZ, DD)
    _, h2 = cast_rays(curve, ZZ, -DD)
    ok = ~np.isnan(h1) & ~np.isnan(h2)
    in1 = curve.in_arc(np.nan_to_num(h1), sp_, sq_)
    in2 = curve.in_arc(np.nan_to_num(h2), sp_, sq_)
    in1m = curve.in_arc(np.nan_to_num(h1), sq_, sp_)
    in2m = curve.in_arc(np.nan_to_num(h2), sq_, sp_)
    cross = ok & ((in1 & in2m) | (in2 & in1m))
    lo = np.minimum(h1, h2)
    hi = np.maximum(h1, h2)
    L = np.hypot(*(curve.point_at(np.nan_to_num(hi)) - curve.point_at(np.nan_to_num(lo))).T)
    arc = hi - lo
    worst = np.maximum(arc, ell - arc) + L
    good = cross & (worst <= (1 - delta) * ell) & (np.abs(hi - lo) > curve.tol)
    rep.update({"scan_points": int(len(Z)), "scan_directions": int(len(dirs)),
                "crossing_chords": int(cross.sum()), "admissible_chords": int(good.sum())})
    idx = np.nonzero(good)[0]
    if len(idx) == 0:
        raise ResolutionExceeded("no crossing cut satisfies the essential bound at this resolution", rep)
    order = idx[np.lexsort((hi[idx], lo[idx], L[idx], worst[idx]))]
    for kk in order[:64]:
        c = make_cut(curve, lo[kk], hi[kk])
        if cut_is_valid_exact(curve, c) and max(c.pieces(curve)) <= (1 - delta) * ell:
            rep.update({"z": ZZ[kk].tolist(), "delta_achieved": 1 - max(c.pieces(curve)) / ell})
            return c, rep
    raise ResolutionExceeded("no exactly valid crossing cut found", rep)


def _param_of_point(curve: JordanPolygon, pt, tol=None):
    """Boundary parameter of a point on the curve, or None."""
    tol = curve.tol * 10 if tol is None else tol
    rel = pt[None] - curve.A
    e = (curve.B - curve.A) / curve.edge_len[:, None]
    u = np.clip(np.sum(rel * e, axis=1), 0.0, curve.edge_len)
    foot = curve.A + u[:, None] * e
    dist = np.hypot(*(pt[None] - foot).T)
    k = int(np.argmin(dist))
    if dist[k] > tol:
        return None
    return float(curve.snap(np.array([curve.cum[k] + u[k]]))[0])


def _best_single_cut(curve: JordanPolygon, cand: CutCandidates) -> Cut:
    arc = cand.s1 - cand.s0
    worst = np.maximum(arc, curve.length - arc) + cand.length
    order = np.lexsort((cand.s1, cand.s0, cand.length, worst))
    for k in order[:64]:
        c = make_cut(curve, cand.s0[k], cand.s1[k])
        if cut_is_valid_exact(curve, c):
            return c
    raise CutConstructionFailed("no valid cut found")


def essential_2fold_cut(curve: JordanPolygon, eps0: float, delta: float | None = None,
                        n_b: int | None = None, n_dir: int = N_DIR) -> TwoFold:
    """Essential 2-fold cut: non-degenerate branch if a cut of length >= 2 delta l exists."""
    if curve.diameter < eps0:
        raise PreconditionError(f"diameter {curve.diameter} < eps0 = {eps0}")
    dth = delta_theory(eps0)
    d = dth if delta is None else float(delta)
    rho = _rho_for(curve)
    ell = curve.length
    n_b = n_b or default_nb(curve, eps0)
    cand = candidate_cuts(curve, n_b, n_dir)
    long = np.nonzero(cand.length >= 2 * d * ell)[0]
    tf = None
    if len(long):
        s0, s1, L = cand.s0[long], cand.s1[long], cand.length[long]
        m, hp, hm = _normal_hits(curve, s0, s1)
        (a1, a2, sa), (b1, b2, sb) = _twofold_pieces(curve, s0, s1, L, m, (hp, hm))
        worst = np.nanmax(np.stack([a1, a2, b1, b2]), axis=0)
        valid = ~np.isnan(a1) & ~np.isnan(b1) & (sa != sb)
        dach = np.where(valid, 1 - worst / ell, -np.inf)
        order = np.lexsort((s1, s0, L, -dach))
        for k in order[:32]:
            c = make_cut(curve, s0[k], s1[k])
            if not cut_is_valid_exact(curve, c):
                continue
            try:
                tf = essential_2fold_nondegenerate(curve, c, d)
                break
            except CutConstructionFailed:
                continue
        if tf is None:
            raise CutConstructionFailed("no long cut admits a normal 2-fold construction")
        tf.delta_guaranteed = min(d, rho * d)
    else:
        c, rep = essential_cut_degenerate(curve, d, n_dir=n_dir, check=False)
        A, B = split_curve(curve, c)
        ccs, reps = [], {"first": rep}
        for nm, ch in (("A", A), ("B", B)):
            ccand = candidate_cuts(ch, default_nb(ch, eps0), n_dir)
            deg = not np.any(ccand.length >= 2 * d * ch.length)
            cc = None
            if deg and ch.diameter >= eps0:
                try:
                    cc, r2 = essential_cut_degenerate(ch, d, n_dir=n_dir, check=False)
                    reps[nm] = r2
                except ResolutionExceeded as exc:
                    reps[nm] = {"fallback": str(exc)}
            if cc is None:
                cc = _best_single_cut(ch, ccand)
                reps.setdefault(nm, {"arbitrary": True})
            ccs.append(cc)
        gA, gB = split_curve(A, ccs[0]), split_curve(B, ccs[1])
        lens = [g.length for g in gA + gB]
        tf = TwoFold(curve, c, (A, B), tuple(ccs), (gA, gB), "degenerate", d, d,
                     1 - max(lens) / ell, reps)
    worst = max(tf.piece_lengths())
    if worst > (1 - tf.delta_guaranteed) * ell + 1e-12 * ell:
        raise InvariantViolated(f"2-fold cut is not {tf.delta_guaranteed}-essential")
    tf.reports["delta_theory"] = dth
    tf.reports["theory_certificate"] = bool(worst <= (1 - dth) * ell)
    tf.reports["resolution"] = {"n_b": n_b, "n_dir": n_dir}
    return tf


# -- iterated cut ---------------------------------------------------------------------------

@dataclass
class TreeNode:
    id: int
    parent: int | None
    curve: JordanPolygon
    depth: int
    level: int
    cut: Cut | None = None
    children: list = field(default_factory=list)
    branch: str | None = None
    delta_achieved: float | None = None
    frozen: bool = False

    def to_json(self) -> dict:
        return {"id": self.id, "parent": self.parent, "depth": self.depth, "level": self.level,
                "length": self.curve.length, "diameter": self.curve.diameter, "area": self.curve.area,
                "vertices": self.curve.vertices.tolist(),
                "cut": None if self.cut is None else self.cut.to_json(),
                "children": list(self.children), "branch": self.branch,
                "delta_achieved": self.delta_achieved, "frozen": self.frozen}


@dataclass
class CutTree:
    root: JordanPolygon
    epsilon: float
    delta_theory: float
    nodes: list
    checks: dict
    resolution: dict
    partial: bool = False

    def leaves(self) -> list:
        return [n for n in self.nodes if not n.children]

    def cut_segments(self) -> list:
        return [n.cut.geometry for n in self.nodes if n.cut is not None]

    def depth(self) -> int:
        return max(n.depth for n in self.nodes)

    def to_json(self) -> dict:
        return {"schema": 1, "epsilon": self.epsilon, "delta_theory": self.delta_theory,
                "partial": self.partial, "resolution": self.resolution, "checks": self.checks,
                "root": self.root.to_json(), "nodes": [n.to_json() for n in self.nodes]}


def _seg_dist_to_curve(curve: JordanPolygon, pts):
    return curve.domain.boundary_distance(pts)


def iterated_cut(curve: JordanPolygon, eps: float, leaf_budget: int = 2 ** 14,
                 n_b: int | None = None, n_dir: int = N_DIR, delta: float | None = None,
                 jobs: int = 1) -> CutTree:
    """Iterate essential 2-fold cuts until every leaf has diameter <= eps."""
    if not eps > 0:
        raise PreconditionError("epsilon must be positive")
    dth = delta_theory(eps)
    nodes = [TreeNode(0, None, curve, 0, 0)]
    checks = {"length_additivity": True, "strict_decrease": True, "area_partition": True,
              "delta_certificates": True, "level_bound": True, "neighborhood": True,
              "max_length_additivity_error": 0.0, "max_area_error": 0.0}
    res = {"n_b": n_b, "n_dir": n_dir}
    tree = CutTree(curve, eps, dth, nodes, checks, res)
    active = [0] if curve.diameter > eps else []
    if not active:
        nodes[0].frozen = True
    level = 0
    while active:
        level += 1
        leaves_now = len(tree.leaves())
        if leaves_now + 3 * len(active) > leaf_budget:
            tree.partial = True
            raise BudgetExceeded(f"leaf budget {leaf_budget} exceeded at level {level}", tree)

        def work(nid):
            nd = nodes[nid]
            return essential_2fold_cut(nd.curve, eps, delta, n_b or default_nb(nd.curve, eps), n_dir)

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as ex:
                results = list(ex.map(work, active))
        else:
            results = [work(a) for a in active]
        nxt = []
        for nid, tf in zip(active, results):
            nd = nodes[nid]
            nd.cut, nd.branch, nd.delta_achieved = tf.cut, tf.branch, tf.delta_achieved
            for side in range(2):
                ch = tf.children[side]
                cn = TreeNode(len(nodes), nid, ch, nd.depth + 1, nd.level)
                cn.cut, cn.branch = tf.child_cuts[side], tf.branch
                nodes.append(cn)
                nd.children.append(cn.id)
                for g in tf.grandchildren[side]:
                    gn = TreeNode(len(nodes), cn.id, g, nd.depth + 2, level)
                    nodes.append(gn)
                    cn.children.append(gn.id)
                    if g.diameter > eps:
                        nxt.append(gn.id)
                    else:
                        gn.frozen = True
            _check_twofold(tree, nd, tf, level)
        active = nxt
    _check_neighborhood(tree)
    return tree


def _check_twofold(tree: CutTree, nd: TreeNode, tf: TwoFold, level: int):
    ck = tree.checks
    ell = nd.curve.length
    pairs = [(nd.curve, tf.cut, tf.children)]
    for side in range(2):
        pairs.append((tf.children[side], tf.child_cuts[side], tf.grandchildren[side]))
    for parent, cut, (A, B) in pairs:
        err = abs(A.length + B.length - parent.length - 2 * cut.length)
        ck["max_length_additivity_error"] = max(ck["max_length_additivity_error"], err)
        if err > 1e-9 * max(1.0, parent.length):
            ck["length_additivity"] = False
        if not (A.length < parent.length + 1e-9 and B.length < parent.length + 1e-9):
            ck["strict_decrease"] = False
        aerr = abs(A.area + B.area - parent.area)
        ck["max_area_error"] = max(ck["max_area_error"], aerr)
        if aerr > 1e-9 * max(1.0, abs(parent.area)):
            ck["area_partition"] = False
    worst = max(tf.piece_lengths())
    if worst > (1 - tree.delta_theory) * ell:
        ck["delta_certificates"] = False
    if worst > (1 - tree.delta_theory) ** level * tree.root.length * (1 + 1e-12):
        ck["level_bound"] = False
    if not all(ck[k] for k in ("length_additivity", "strict_decrease", "area_partition",
                               "delta_certificates", "level_bound")):
        raise InvariantViolated(f"cut tree invariant failed at node {nd.id}: {ck}")


def _check_neighborhood(tree: CutTree):
    """Every descendant cut of a node lies within the node's diameter of its curve."""
    kids = {n.id: n.children for n in tree.nodes}
    worst_ratio = 0.0
    for nd in tree.nodes:
        if nd.cut is None:
            continue
        stack = [nd.id]
        pts = []
        while stack:
            k = stack.pop()
            c = tree.nodes[k].cut
            if c is not None:
                t = np.linspace(0, 1, 9)[:, None]
                pts.append(np.array(c.p0) + t * (np.array(c.p1) - np.array(c.p0)))
            stack.extend(kids[k])
        if pts:
            dist = _seg_dist_to_curve(nd.curve, np.concatenate(pts))
            worst_ratio = max(worst_ratio, float(dist.max() / nd.curve.diameter))
            if dist.max() > nd.curve.diameter + 1e-12:
                tree.checks["neighborhood"] = False
    tree.checks["neighborhood_worst_ratio"] = worst_ratio
    if not tree.checks["neighborhood"]:
        raise InvariantViolated("descendant cut geometry leaves the neighbourhood of its ancestor")


# -- interior ------------------------------------------------------------------------------

def interior(curve, complex_=None):
    """Region handle of the interior: a PolygonDomain (planar) or a triangle set (complex)."""
    if isinstance(curve, JordanPolygon):
        return curve.domain
    from .chains import cycle_from_vertices, support_set

    if complex_ is None:
        raise PreconditionError("a vertex loop needs its ambient complex")
    return support_set(complex_, cycle_from_vertices(complex_, curve))


# -- shapes ------------------------------------------------------------------------------

def rectangle(w: float, h: float, origin=(0.0, 0.0)):
    x, y = origin
    return np.array([(x, y), (x + w, y), (x + w, y + h), (x, y + h)], dtype=float)


def regular_polygon(n: int, r: float = 1.0):
    t = np.arange(n) * 2 * math.pi / n
    return np.stack([r * np.cos(t), r * np.sin(t)], axis=1)


def zigzag_strip(teeth: int = 20, width: float = 0.01, length: float = 4.0, amplitude: float | None = None):
    """Thin strip around a zigzag centreline of total length about ``length``.

    The centreline has ``2 * teeth`` straight arms alternating between slopes
    +a and -a; the strip is the offset band of half-width width/2.
    """
    arms = 2 * teeth
    arm_len = length / arms
    amp = arm_len / math.sqrt(2) if amplitude is None else amplitude
    dx = math.sqrt(max(arm_len ** 2 - amp ** 2, 1e-12))
    xs = np.arange(arms + 1) * dx
    ys = np.where(np.arange(arms + 1) % 2 == 0, 0.0, amp)
    C = np.stack([xs, ys], axis=1)
    # offset the polyline by +-width/2 using miter joins
    hw = width / 2
    seg = np.diff(C, axis=0)
    nrm = np.stack([-seg[:, 1], seg[:, 0]], axis=1) / np.hypot(*seg.T)[:, None]
    up, dn = [], []
    for k in range(len(C)):
        if k == 0:
            n = nrm[0]
            up.append(C[k] + hw * n)
            dn.append(C[k] - hw * n)
            continue
        if k == len(C) - 1:
            n = nrm[-1]
            up.append(C[k] + hw * n)
            dn.append(C[k] - hw * n)
            continue
        n1, n2 = nrm[k - 1], nrm[k]
        mit = n1 + n2
        mit = mit / np.dot(mit, n1)
        up.append(C[k] + hw * mit)
        dn.append(C[k] - hw * mit)
    return np.concatenate([np.array(dn), np.array(up)[::-1]])
