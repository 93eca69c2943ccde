"""Simplicial chains over Z on a TriComplex.

Orientation: edge (a, b) with a < b is oriented a -> b; triangle (v0, v1, v2)
is oriented by its stored vertex order, so its boundary is
[v1v2] - [v0v2] + [v0v1] with each term re-expressed in the edge orientation.

Two independent linear solvers are kept.  The primary one is sparse
elimination over Z restricted to unit pivots (which preserves the Smith form
and keeps every substitution integral), with a dense Smith-normal-form solve
for whatever non-unit residue is left.  The second one is sparse elimination
over Q with arbitrary pivots followed by an integrality check; tests use it as
an oracle.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import AmbiguousSupport, InvalidComplex, NotNullHomologous
from .flat_complex import ComplexPoint, SteinerGraph, TriComplex


@dataclass
class Chain:
    degree: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.degree not in (0, 1, 2):
            raise InvalidComplex("chains have degree 0, 1 or 2")
        self.coeffs = {int(k): int(v) for k, v in self.coeffs.items() if int(v) != 0}

    def support(self) -> set:
        return set(self.coeffs)

    def to_json(self) -> dict:
        return {"degree": self.degree, "coefficients": {str(k): v for k, v in sorted(self.coeffs.items())}}

    @staticmethod
    def from_json(d: dict) -> "Chain":
        return Chain(int(d["degree"]), {int(k): int(v) for k, v in d["coefficients"].items()})


# -- boundary operators --------------------------------------------------------

def boundary2(c: TriComplex) -> list:
    """Column list of the boundary of each triangle: dict edge -> coefficient."""
    cols = []
    for t, (v0, v1, v2) in enumerate(c.triangles.tolist()):
        col = {}
        for (a, b), s in (((v1, v2), 1), ((v0, v2), -1), ((v0, v1), 1)):
            e = c.edge_index[(min(a, b), max(a, b))]
            col[e] = col.get(e, 0) + (s if a < b else -s)
        cols.append(col)
    return cols


def boundary1(c: TriComplex) -> list:
    return [{int(a): -1, int(b): 1} for a, b in c.edges]


def apply_boundary(c: TriComplex, x: Chain) -> Chain:
    """Exact integer boundary of a chain."""
    if x.degree == 2:
        cols = boundary2(c)
    else:
        cols = boundary1(c)
    out = {}
    for k, v in x.coeffs.items():
        for r, s in cols[k].items():
            out[r] = out.get(r, 0) + v * s
    return Chain(x.degree - 1, out)


def cycle_from_vertices(c: TriComplex, verts) -> Chain:
    """1-chain of the closed vertex loop verts[0] -> verts[1] -> ... -> verts[0]."""
    co = {}
    n = len(verts)
    for i in range(n):
        a, b = int(verts[i]), int(verts[(i + 1) % n])
        key = (min(a, b), max(a, b))
        if key not in c.edge_index:
            raise InvalidComplex(f"({a}, {b}) is not an edge")
        e = c.edge_index[key]
        co[e] = co.get(e, 0) + (1 if a < b else -1)
    return Chain(1, co)


# -- sparse integer elimination --------------------------------------------------

class _Sparse:
    """Row-major sparse integer matrix with a column index for pivot search."""

    def __init__(self, cols, n_rows):
        self.rows = [dict() for _ in range(n_rows)]
        self.colrows = [set() for _ in range(len(cols))]
        for j, col in enumerate(cols):
            for i, v in col.items():
                if v:
                    self.rows[i][j] = v
                    self.colrows[j].add(i)

    def row_axpy(self, dst, src, f):
        """row[dst] += f * row[src]"""
        rd = self.rows[dst]
        for j, v in self.rows[src].items():
            nv = rd.get(j, 0) + f * v
            if nv:
                if j not in rd:
                    self.colrows[j].add(dst)
                rd[j] = nv
            else:
                rd.pop(j, None)
                self.colrows[j].discard(dst)

    def drop_row(self, i):
        for j in self.rows[i]:
            self.colrows[j].discard(i)
        self.rows[i] = {}


def _unit_eliminate(cols, n_rows, rhs=None):
    """Eliminate unit pivots; returns (pivots, matrix, rhs).

    ``pivots`` is a list of (row, col, row_snapshot, rhs_value) in elimination
    order, usable for back-substitution.  Columns with fewest entries first.
    """
    M = _Sparse(cols, n_rows)
    rhs = None if rhs is None else list(rhs)
    pivots = []
    alive_cols = set(j for j in range(len(cols)) if M.colrows[j])
    heap = [(len(M.colrows[j]), j) for j in alive_cols]
    heapq.heapify(heap)
    while heap:
        cnt, j = heapq.heappop(heap)
        if j not in alive_cols:
            continue
        if cnt != len(M.colrows[j]):
            if M.colrows[j]:
                heapq.heappush(heap, (len(M.colrows[j]), j))
            else:
                alive_cols.discard(j)
            continue
        piv = None
        for i in sorted(M.colrows[j], key=lambda r: (len(M.rows[r]), r)):
            if abs(M.rows[i][j]) == 1:
                piv = i
                break
        if piv is None:
            alive_cols.discard(j)
            continue
        p = M.rows[piv][j]
        touched = set()
        for i in list(M.colrows[j]):
            if i == piv:
                continue
            f = -M.rows[i][j] * p  # p = +-1 so 1/p = p
            M.row_axpy(i, piv, f)
            if rhs is not None:
                rhs[i] += f * rhs[piv]
            touched.update(M.rows[i])
        snap = dict(M.rows[piv])
        pivots.append((piv, j, snap, None if rhs is None else rhs[piv]))
        M.drop_row(piv)
        alive_cols.discard(j)
        for k in touched | set(snap):
            if k in alive_cols:
                heapq.heappush(heap, (len(M.colrows[k]), k))
    return pivots, M, rhs


def smith_diagonal(A) -> list:
    """Nonzero invariant factors of a dense integer matrix (list of lists)."""
    A = [list(map(int, r)) for r in A]
    m = len(A)
    n = len(A[0]) if m else 0
    diag = []
    t = 0
    while t < min(m, n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        A[t], A[pi] = A[pi], A[t]
        for r in A:
            r[t], r[pj] = r[pj], r[t]
        while True:
            changed = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        changed = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    for r in A:
                        r[j] -= q * r[t]
                    if A[t][j]:
                        for r in A:
                            r[t], r[j] = r[j], r[t]
                        changed = True
            if changed:
                continue
            bad = [(i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % A[t][t]]
            if bad:
                i, _ = bad[0]
                A[t] = [a + b for a, b in zip(A[t], A[i])]
                continue
            break
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def _residual_dense(M: _Sparse):
    rows = [i for i, r in enumerate(M.rows) if r]
    cols = sorted(set(j for i in rows for j in M.rows[i]))
    return rows, cols, [[M.rows[i].get(j, 0) for j in cols] for i in rows]


def invariant_factors(cols, n_rows) -> list:
    """Nonzero Smith invariant factors of the matrix given by sparse columns."""
    pivots, M, _ = _unit_eliminate(cols, n_rows)
    _, _, dense = _residual_dense(M)
    return [1] * len(pivots) + (smith_diagonal(dense) if dense else [])


def homology_ranks(c: TriComplex) -> dict:
    """Betti numbers b1, b2 and torsion of H1 over Z."""
    f1 = invariant_factors(boundary1(c), c.n_vertices)
    f2 = invariant_factors(boundary2(c), len(c.edges))
    kernel1 = len(c.edges) - len(f1)
    return {"b1": kernel1 - len(f2), "b2": len(c.triangles) - len(f2),
            "torsion": [d for d in f2 if d > 1]}


def h1_is_trivial(c: TriComplex) -> bool:
    r = homology_ranks(c)
    return r["b1"] == 0 and not r["torsion"]


def is_acyclic(c: TriComplex) -> bool:
    r = homology_ranks(c)
    return r["b1"] == 0 and r["b2"] == 0 and not r["torsion"]


# -- solving d2 x = z --------------------------------------------------------------

def _smith_solve(A, b):
    """Integer solution of the dense system A x = b, or None."""
    m = len(A)
    n = len(A[0]) if m else 0
    A = [list(r) for r in A]
    b = list(b)
    V = [[int(i == j) for j in range(n)] for i in range(n)]  # column ops accumulate here
    t = 0
    while t < min(m, n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        A[t], A[pi] = A[pi], A[t]
        b[t], b[pi] = b[pi], b[t]
        for r in A:
            r[t], r[pj] = r[pj], r[t]
        for r in V:
            r[t], r[pj] = r[pj], r[t]
        while True:
            changed = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    A[i] = [a - q * c for a, c in zip(A[i], A[t])]
                    b[i] -= q * b[t]
                    if A[i][t]:
                        A[t], A[i] = A[i], A[t]
                        b[t], b[i] = b[i], b[t]
                        changed = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    for r in A:
                        r[j] -= q * r[t]
                    for r in V:
                        r[j] -= q * r[t]
                    if A[t][j]:
                        for r in A:
                            r[t], r[j] = r[j], r[t]
                        for r in V:
                            r[t], r[j] = r[j], r[t]
                        changed = True
            if not changed:
                break
        t += 1
    # A is now lower-triangular in the leading t x t block with zero rows below
    y = [0] * n
    for i in range(t):
        s = b[i] - sum(A[i][j] * y[j] for j in range(i))
        if s % A[i][i]:
            return None
        y[i] = s // A[i][i]
    for i in range(t, m):
        if b[i] - sum(A[i][j] * y[j] for j in range(min(t, n))):
            return None
    return [sum(V[i][j] * y[j] for j in range(n)) for i in range(n)]


def fill_cycle(c: TriComplex, z: Chain) -> Chain:
    """Integer 2-chain x with boundary z (verified before returning)."""
    if z.degree != 1:
        raise InvalidComplex("fill_cycle needs a 1-chain")
    if apply_boundary(c, z).coeffs:
        raise InvalidComplex("input chain is not a cycle")
    cols = boundary2(c)
    rhs = [0] * len(c.edges)
    for e, v in z.coeffs.items():
        rhs[e] = v
    pivots, M, rhs = _unit_eliminate(cols, len(c.edges), rhs)
    rows, rcols, dense = _residual_dense(M)
    x = {}
    if dense:
        sol = _smith_solve(dense, [rhs[i] for i in rows])
        if sol is None:
            raise NotNullHomologous("cycle does not bound an integer 2-chain")
        x.update({j: v for j, v in zip(rcols, sol) if v})
    pivot_rows = {p[0] for p in pivots}
    if any(rhs[i] for i in range(len(rhs)) if i not in pivot_rows and not M.rows[i]):
        raise NotNullHomologous("cycle does not bound an integer 2-chain")
    for piv, j, snap, r in reversed(pivots):
        s = r - sum(v * x.get(k, 0) for k, v in snap.items() if k != j)
        x[j] = s * snap[j]  # unit pivot
    out = Chain(2, x)
    if apply_boundary(c, out).coeffs != z.coeffs:
        raise NotNullHomologous("cycle does not bound an integer 2-chain")
    return out


def fill_cycle_rational(c: TriComplex, z: Chain) -> Chain:
    """Independent route: sparse elimination over Q, then an integrality check."""
    cols = boundary2(c)
    rows = [dict() for _ in range(len(c.edges))]
    for j, col in enumerate(cols):
        for i, v in col.items():
            if v:
                rows[i][j] = Fraction(v)
    rhs = [Fraction(0)] * len(c.edges)
    for e, v in z.coeffs.items():
        rhs[e] = Fraction(v)
    pivots = []
    for i in range(len(rows)):  # row order, first available column as pivot
        if not rows[i]:
            if rhs[i]:
                raise NotNullHomologous("cycle is not a boundary over Q")
            continue
        j = min(rows[i])
        p = rows[i][j]
        pr, pb = dict(rows[i]), rhs[i]
        pivots.append((j, pr, pb))
        for k in range(i + 1, len(rows)):
            if j in rows[k]:
                f = rows[k][j] / p
                for jj, v in pr.items():
                    nv = rows[k].get(jj, 0) - f * v
                    if nv:
                        rows[k][jj] = nv
                    else:
                        rows[k].pop(jj, None)
                rhs[k] -= f * pb
    x = {}
    for j, pr, pb in reversed(pivots):
        s = pb - sum(v * x.get(k, 0) for k, v in pr.items() if k != j)
        x[j] = s / pr[j]
    if any(v.denominator != 1 for v in x.values()):
        raise NotNullHomologous("no integral solution found over Q")
    out = Chain(2, {k: int(v) for k, v in x.items()})
    if apply_boundary(c, out).coeffs != z.coeffs:
        raise NotNullHomologous("cycle does not bound")
    return out


# -- supports --------------------------------------------------------------------------

@dataclass
class SupportReport:
    triangles: list
    frontier_edges: list
    carrier_edges: list
    frontier_in_carrier: bool
    carrier_in_closure: bool
    frontier_equals_carrier: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _frontier(c: TriComplex, S: set):
    edges = set()
    verts = set()
    for t in S:
        for e in c.tri_edges[t]:
            if any(u not in S for u in c.edge_tris[e]):
                edges.add(int(e))
        for v in c.triangles[t]:
            if any(u not in S for u in c.vertex_tris[v]):
                verts.add(int(v))
    return edges, verts


def support_report(c: TriComplex, z: Chain) -> SupportReport:
    if not is_acyclic(c):
        raise AmbiguousSupport("ambient complex is not acyclic; the filling chain is not unique")
    x = fill_cycle(c, z)
    S = x.support()
    fe, fv = _frontier(c, S)
    carrier = set(z.coeffs)
    cverts = {int(v) for e in carrier for v in c.edges[e]}
    closure_e = {int(e) for t in S for e in c.tri_edges[t]}
    return SupportReport(sorted(S), sorted(fe), sorted(carrier),
                         fe <= carrier and fv <= cverts, carrier <= closure_e, fe == carrier)


def support_set(c: TriComplex, z: Chain) -> set:
    """Triangles carrying the unique filling chain of z (with frontier check)."""
    rep = support_report(c, z)
    if not rep.triangles and z.coeffs:
        raise NotNullHomologous("empty support for a nonzero cycle")
    if not (rep.frontier_in_carrier and rep.carrier_in_closure):
        raise AmbiguousSupport("support frontier is not contained in the cycle carrier")
    return set(rep.triangles)


# -- geodesic extension ---------------------------------------------------------------

@dataclass
class ProbeReport:
    trials: int
    h: float
    tol: float
    violations: list = field(default_factory=list)
    inconclusive: int = 0
    reached_carrier: int = 0

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _inward_normal(P, i, j):
    a, b = P[i], P[j]
    u = (b - a) / np.hypot(*(b - a))
    n = np.array([-u[1], u[0]])
    k = 3 - i - j
    if np.dot(P[k] - a, n) < 0:
        n = -n
    return u, n


def _extend(c: TriComplex, tri: int, X, d, S, carrier, max_steps=10_000):
    """Follow the straight ray X + s d through unfolded flat triangles.

    Returns ("carrier"|"left_support"|"dead_end"|"vertex"|"steps", length).
    """
    travelled = 0.0
    for _ in range(max_steps):
        P = c.chart[tri]
        best = None
        for s, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
            a, b = P[i], P[j]
            e = b - a
            den = d[0] * (-e[1]) - d[1] * (-e[0])
            if abs(den) < 1e-15:
                continue
            r = a - X
            sp_ = (r[0] * (-e[1]) - r[1] * (-e[0])) / den
            u = (d[0] * r[1] - d[1] * r[0]) / den
            if sp_ > 1e-12 and -1e-12 <= u <= 1 + 1e-12 and (best is None or sp_ < best[0]):
                best = (sp_, s, i, j, u)
        if best is None:
            return "dead_end", travelled
        sp_, s, i, j, u = best
        travelled += sp_
        X = X + sp_ * d
        e = int(c.tri_edges[tri, s])
        if u < 1e-9 or u > 1 - 1e-9:
            v = int(c.triangles[tri][i if u < 0.5 else j])
            if any(v in c.edges[f] for f in carrier):
                return "carrier", travelled
            return "vertex", travelled
        if e in carrier:
            return "carrier", travelled
        nxt = [t for t in c.edge_tris[e] if t != tri]
        nxt = [t for t in nxt if t in S]
        if not nxt:
            return ("left_support" if len(c.edge_tris[e]) > 1 else "dead_end"), travelled
        t2 = nxt[0]
        uu, nin = _inward_normal(P, i, j)
        va, vb = c.triangles[tri][i], c.triangles[tri][j]
        Q = c.chart[t2]
        qi = int(np.nonzero(c.triangles[t2] == va)[0][0])
        qj = int(np.nonzero(c.triangles[t2] == vb)[0][0])
        uu2, nin2 = _inward_normal(Q, qi, qj)
        X = Q[qi] + u * (Q[qj] - Q[qi])
        d = np.dot(d, uu) * uu2 - np.dot(d, nin) * nin2
        tri = t2
    return "steps", travelled


def geodesic_extension_probe(c: TriComplex, support, z: Chain, trials: int, h: float = 0.1,
                             tol: float | None = None, seed: int = 0) -> ProbeReport:
    """Extend approximate geodesics x -> p beyond p inside the support (flat complexes)."""
    if c.sign != 0:
        raise InvalidComplex("extension probe is implemented for flat complexes")
    tol = 2 * h if tol is None else tol
    rep = ProbeReport(trials, h, tol)
    if trials <= 0:
        return rep
    rng = np.random.Generator(np.random.Philox(seed))
    S = set(int(t) for t in support)
    carrier = set(z.coeffs)
    Sl = sorted(S)
    g = SteinerGraph(c, h)
    nt = len(c.triangles)
    for k in range(trials):
        tx = int(rng.integers(nt))
        tp = Sl[int(rng.integers(len(Sl)))]
        x = ComplexPoint.face(tx, rng.dirichlet(np.ones(3)))
        p = ComplexPoint.face(tp, rng.dirichlet(np.ones(3)))
        L, pts = g.geodesic(x, p)
        # direction of the last path segment inside the triangle of p
        a = pts[-2]
        if tp not in c.incident_triangles(a):
            rep.inconclusive += 1
            continue
        Xa, Xp = c.chart_position(tp, a), c.chart_position(tp, p)
        d = Xp - Xa
        nrm = math.hypot(*d)
        if nrm < 1e-12:
            rep.inconclusive += 1
            continue
        status, ext = _extend(c, tp, Xp, d / nrm, S, carrier)
        if status == "carrier":
            rep.reached_carrier += 1
        elif status in ("vertex", "steps"):
            rep.inconclusive += 1
        else:
            rep.violations.append({"trial": k, "x": [tx, list(x.param)], "p": [tp, list(p.param)],
                                   "status": status, "extension": ext})
    return rep
