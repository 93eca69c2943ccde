"""Vietoris-Rips death scales of 1-cycles over Z/2 and filling-radius estimates.

A 1-cycle z on a finite metric space bounds in VR_r as soon as it lies in the
Z/2 span of the boundaries of triangles of diameter <= r.  Triangles are
reduced once, in filtration order, against a table of pivots (edges ordered
by length, pivot = youngest edge).  Since every reduced column only involves
earlier columns, the pivots created by the first K triangles span exactly the
boundaries of the first K triangles; a probe at any scale therefore reuses the
cached prefix and the search over distance values never reduces a triangle
twice.  The search gallops upwards in triangle count before bisecting, so the
work stays proportional to the number of triangles below the death scale.

Columns are Python integers used as bitsets over edges.  Each reduced column
remembers which earlier reduced columns were added to it, which is enough to
expand any certificate back into an explicit 2-chain.
"""
from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NoDeath

TRI_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FiniteMetric:
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InputError("distance matrix must be square")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise InputError("distances must be finite and nonnegative")
        if np.any(d != d.T):
            raise InputError("distance matrix is not symmetric")
        if np.any(np.diag(d) != 0):
            raise InputError("distance matrix has a nonzero diagonal")
        n = len(d)
        scale = max(1.0, float(d.max()) if n else 1.0)
        for i in range(n):  # O(n^3) in row slabs
            if np.any(d[i][:, None] > d[i][None, :] + d + TRI_TOL * scale):
                raise InputError("triangle inequality violated")
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return len(self.d)

    def scaled(self, L: float) -> "FiniteMetric":
        return FiniteMetric(self.d * L)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.n])
        for row in self.d:
            w.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "FiniteMetric":
        try:
            rows = [r for r in csv.reader(io.StringIO(text)) if r]
            n = int(rows[0][0])
            d = np.array([[float(x) for x in r] for r in rows[1:]])
        except (ValueError, IndexError) as exc:
            raise InputError(f"malformed matrix CSV: {exc}") from None
        if d.shape != (n, n):
            raise InputError(f"expected a {n}x{n} matrix, got shape {d.shape}")
        return FiniteMetric(d)


def circle_metric(n: int, circumference: float = 2 * math.pi) -> FiniteMetric:
    """n equally spaced points on a circle with its intrinsic (arc) metric."""
    k = np.arange(n)
    gap = np.abs(k[:, None] - k[None, :])
    steps = np.minimum(gap, n - gap)
    return FiniteMetric(steps * (circumference / n))


def fundamental_cycle(n: int) -> list:
    """Edges (i, i+1 mod n) of the sample ordered around the circle."""
    return [(i, (i + 1) % n) for i in range(n)]


def _edge_id(n, i, j):
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)


class RipsReducer:
    """Incremental Z/2 reduction of the triangle boundaries of a Rips filtration."""

    def __init__(self, m: FiniteMetric):
        self.m = m
        n = m.n
        d = m.d
        iu, ju = np.triu_indices(n, 1)
        el = d[iu, ju]
        order = np.lexsort((np.arange(len(el)), el))
        self.edge_rank = np.empty(len(el), dtype=np.int64)
        self.edge_rank[order] = np.arange(len(el))
        self.values = np.unique(el)
        # triangles sorted by diameter, then by the rank of their youngest edge
        tris = []
        for i in range(n - 2):
            j, k = np.triu_indices(n - i - 1, 1)
            j = j + i + 1
            k = k + i + 1
            tris.append(np.stack([np.full(len(j), i), j, k], axis=1))
        T = np.concatenate(tris) if tris else np.zeros((0, 3), dtype=np.int64)
        if len(T):
            diam = np.maximum(np.maximum(d[T[:, 0], T[:, 1]], d[T[:, 1], T[:, 2]]), d[T[:, 0], T[:, 2]])
            r01 = self.edge_rank[_vid(n, T[:, 0], T[:, 1])]
            r12 = self.edge_rank[_vid(n, T[:, 1], T[:, 2])]
            r02 = self.edge_rank[_vid(n, T[:, 0], T[:, 2])]
            young = np.maximum(np.maximum(r01, r12), r02)
            o = np.lexsort((young, diam))
            self.tris, self.tri_diam = T[o], diam[o]
            self._cols = np.stack([r01, r12, r02], axis=1)[o]
        else:
            self.tris, self.tri_diam = T, np.zeros(0)
            self._cols = np.zeros((0, 3), dtype=np.int64)
        self.done = 0          # triangles reduced so far
        self.pivot = {}        # pivot edge rank -> column id
        self.col_bits = []     # reduced column bitsets
        self.col_tri = []      # creation index of the triangle behind each column
        self.col_used = []     # column ids added into it during reduction

    def prefix_len(self, r: float) -> int:
        return int(np.searchsorted(self.tri_diam, r, side="right"))

    def extend(self, K: int):
        cols, piv = self._cols, self.pivot
        for t in range(self.done, K):
            a, b, c = (int(x) for x in cols[t])
            bits = (1 << a) | (1 << b) | (1 << c)
            used = []
            while bits:
                p = bits.bit_length() - 1
                j = piv.get(p)
                if j is None:
                    piv[p] = len(self.col_bits)
                    self.col_bits.append(bits)
                    self.col_tri.append(t)
                    self.col_used.append(used)
                    break
                bits ^= self.col_bits[j]
                used.append(j)
        self.done = max(self.done, K)

    def reduce_cycle(self, zbits: int, K: int):
        """Columns (created within the first K triangles) summing to z, or None."""
        self.extend(K)
        used = []
        while zbits:
            p = zbits.bit_length() - 1
            j = self.pivot.get(p)
            if j is None or self.col_tri[j] >= K:
                return None
            zbits ^= self.col_bits[j]
            used.append(j)
        return used

    def expand(self, used) -> list:
        """Triangle creation indices whose boundaries sum (mod 2) to the reduced combination."""
        parity = {}
        for j in used:
            parity[j] = parity.get(j, 0) ^ 1
        heap = [-j for j, v in parity.items() if v]
        heapq.heapify(heap)
        chain = set()
        while heap:
            j = -heapq.heappop(heap)
            if not parity.get(j):
                continue
            parity[j] = 0
            chain ^= {self.col_tri[j]}
            for i in self.col_used[j]:
                parity[i] = parity.get(i, 0) ^ 1
                if parity[i]:
                    heapq.heappush(heap, -i)
        return sorted(chain)


def _vid(n, i, j):
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    return lo * n - lo * (lo + 1) // 2 + (hi - lo - 1)


@dataclass
class DeathCertificate:
    scale: float
    previous_scale: float | None
    chain: list            # triangles (vertex triples) whose boundary is z mod 2
    triangles_reduced: int

    def to_json(self) -> dict:
        return {"scale": self.scale, "previous_scale": self.previous_scale,
                "chain_size": len(self.chain), "triangles_reduced": self.triangles_reduced}


def _cycle_bits(red: RipsReducer, z) -> int:
    n = red.m.n
    bits = 0
    for i, j in z:
        if i == j:
            raise InputError("degenerate edge in cycle")
        bits ^= 1 << int(red.edge_rank[_edge_id(n, int(i), int(j))])
    return bits


def _check_chain(z, chain) -> bool:
    deg = {}
    for i, j in z:
        e = (min(i, j), max(i, j))
        deg[e] = deg.get(e, 0) ^ 1
    acc = {}
    for a, b, c in chain:
        for e in ((a, b), (b, c), (a, c)):
            e = (min(e), max(e))
            acc[e] = acc.get(e, 0) ^ 1
    return {e for e, v in deg.items() if v} == {e for e, v in acc.items() if v}


def cycle_death(m: FiniteMetric, z, reducer: RipsReducer | None = None) -> DeathCertificate:
    """Smallest distance value r with z a boundary in VR_r, with an explicit 2-chain."""
    red = reducer or RipsReducer(m)
    zb = _cycle_bits(red, z)
    if zb == 0:
        return DeathCertificate(0.0, None, [], 0)
    vals = red.values
    # bounding is monotone in r.  Gallop upwards from the smallest scale so the
    # reduced prefix stays close to the death scale, then bisect.
    lo, hi, K = 0, len(vals) - 1, 1024
    while K < len(red.tri_diam):
        step = int(np.searchsorted(vals, red.tri_diam[K - 1]))
        if step >= hi:
            break
        if red.reduce_cycle(zb, red.prefix_len(vals[step])) is not None:
            hi = step
            break
        lo = step + 1
        K *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if red.reduce_cycle(zb, red.prefix_len(vals[mid])) is not None:
            hi = mid
        else:
            lo = mid + 1
    K = red.prefix_len(vals[hi])
    used = red.reduce_cycle(zb, K)
    if used is None:
        raise NoDeath("cycle never bounds; input is not a cycle?")
    tris = [tuple(int(v) for v in red.tris[t]) for t in red.expand(used)]
    if not _check_chain(z, tris):
        raise NoDeath("internal error: certificate chain does not bound the cycle")
    if max((red.tri_diam[t] for t in red.expand(used)), default=0.0) > vals[hi]:
        raise NoDeath("internal error: certificate uses a triangle above the death scale")
    prev = float(vals[hi - 1]) if hi > 0 else None
    return DeathCertificate(float(vals[hi]), prev, tris, red.done)


def cycle_death_scale(m: FiniteMetric, z) -> float:
    return cycle_death(m, z).scale


def filling_radius_estimate(m: FiniteMetric, z=None) -> float:
    """Half the Rips death scale of the fundamental cycle of a circle sample."""
    z = fundamental_cycle(m.n) if z is None else z
    return cycle_death_scale(m, z) / 2.0


# -- brute-force oracle for tiny samples -----------------------------------------------

def _gf2_in_span(vectors, target) -> bool:
    basis = {}
    for v in vectors:
        while v:
            p = v.bit_length() - 1
            if p in basis:
                v ^= basis[p]
            else:
                basis[p] = v
                break
    while target:
        p = target.bit_length() - 1
        if p not in basis:
            return False
        target ^= basis[p]
    return True


def kuratowski_filling_radius(m: FiniteMetric, z=None) -> float:
    """Filling radius of z through the Kuratowski embedding into l_inf over the sample.

    x -> d(x, .) is an isometric embedding; the r-neighbourhood of its image
    is covered by the closed r-balls around the image points, whose
    intersections are boxes, so the nerve lemma applies.  A family of boxes
    meets iff on every coordinate the centre values spread by at most 2r.
    Every subfamily is enumerated (n <= 8), and z is tested against the Z/2
    span of nerve 2-simplex boundaries at each candidate radius.
    """
    n = m.n
    if n > 8:
        raise InputError("brute-force oracle is limited to n <= 8")
    z = fundamental_cycle(n) if z is None else z
    F = m.d  # row i = image of point i
    subsets = []
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        spread = float(np.max(F[idx].max(axis=0) - F[idx].min(axis=0)))
        subsets.append((idx, spread / 2.0))
    eidx = {}
    for i in range(n):
        for j in range(i + 1, n):
            eidx[(i, j)] = len(eidx)
    target = 0
    for i, j in z:
        target ^= 1 << eidx[(min(i, j), max(i, j))]
    radii = sorted({r for _, r in subsets})
    for r in radii:
        tri_vecs = []
        for idx, rr in subsets:
            if len(idx) == 3 and rr <= r:
                a, b, c = idx
                tri_vecs.append((1 << eidx[(a, b)]) | (1 << eidx[(b, c)]) | (1 << eidx[(a, c)]))
        # the whole nerve at r; higher simplices do not change H1 membership of 1-cycles
        edges_ok = all(rr <= r for idx, rr in subsets if len(idx) == 2
                       and (tuple(idx) in {(min(a, b), max(a, b)) for a, b in z}))
        if edges_ok and _gf2_in_span(tri_vecs, target):
            return r
    raise NoDeath("cycle never bounds")


# -- degeneracy audit ----------------------------------------------------------------------

AUDIT_SAMPLES = 256


def boundary_metric(curve, n: int = AUDIT_SAMPLES, intrinsic: bool = True):
    """Finite sample of a planar Jordan curve with the metric of its closed interior
    (intrinsic=True) or the ambient restriction.  Returns (metric, parameters, mesh)."""
    s = np.arange(n) * (curve.length / n)
    P = curve.point_at(s)
    if intrinsic:
        D = curve.domain.pairwise(P)
    else:
        D = np.hypot(*(P[:, None] - P[None]).transpose(2, 0, 1))
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    mesh = float(np.max(D[np.arange(n), (np.arange(n) + 1) % n]))
    return FiniteMetric(D), s, mesh


@dataclass
class AuditReport:
    delta: float
    length: float
    degenerate: bool
    longest_cut: float
    degeneracy_margin: float
    density: float | None = None
    density_tol: float | None = None
    density_margin: float | None = None
    fillrad: float | None = None
    fillrad_tol: float | None = None
    fillrad_margin: float | None = None
    resolution: dict | None = None

    @property
    def passed(self) -> bool:
        if not self.degenerate:
            return False
        return self.density_margin >= 0 and self.fillrad_margin >= 0

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["passed"] = self.passed
        return out


def degeneracy_audit(curve, delta: float, n_b: int = 256, n_dir: int = 180,
                     grid: int = 200, n_fill: int = AUDIT_SAMPLES) -> AuditReport:
    """Check degeneracy, density of the curve in its interior, and the filling-radius bound.

    Margins are positive when the corresponding bound holds with room to spare.
    """
    from .jordan import candidate_cuts

    ell = curve.length
    cand = candidate_cuts(curve, n_b, n_dir)
    longest = float(cand.length.max()) if len(cand) else 0.0
    rep = AuditReport(delta, ell, longest < 2 * delta * ell, longest, 2 * delta * ell - longest,
                      resolution={"n_b": n_b, "n_dir": n_dir, "grid": grid, "n_fill": n_fill})
    if not rep.degenerate:
        return rep
    # density: every interior point is within delta*l of the curve (intrinsically)
    lo = curve.vertices.min(axis=0)
    hi = curve.vertices.max(axis=0)
    step = float(np.max(hi - lo)) / grid
    xs = np.arange(lo[0], hi[0] + step / 2, step)
    ys = np.arange(lo[1], hi[1] + step / 2, step)
    G = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
    G = G[curve.domain.contains_many(G)]
    dens = float(curve.domain.boundary_distance(G).max()) if len(G) else 0.0
    rep.density = dens
    rep.density_tol = step * math.sqrt(2) / 2
    rep.density_margin = delta * ell + rep.density_tol - dens
    m, _, mesh = boundary_metric(curve, n_fill, intrinsic=True)
    rep.fillrad = filling_radius_estimate(m)
    rep.fillrad_tol = mesh
    rep.fillrad_margin = delta * ell + mesh - rep.fillrad
    return rep
