"""Effective resistance, hitting and escape probabilities, Kirchhoff marginals.

Every quantity reduces to a Dirichlet problem for the weighted graph
Laplacian, solved with a sparse direct factorisation.  Parallel edges are
merged by summing conductances inside the solver only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import GraphError, PlaneNetwork, induced_subnetwork, wired_truncation

__all__ = [
    "ElectricalError",
    "ResistanceQuery",
    "laplacian",
    "harmonic_potential",
    "effective_conductance",
    "effective_resistance",
    "hitting_probability",
    "escape_probability",
    "kirchhoff_marginal",
    "kirchhoff_marginals",
    "GapRow",
    "wired_free_gap",
]

MODES = ("plain", "free", "wired")


class ElectricalError(ValueError):
    pass


@dataclass(frozen=True)
class ResistanceQuery:
    A: frozenset
    B: frozenset
    mode: str = "plain"

    def __init__(self, A: Iterable[int], B: Iterable[int], mode: str = "plain"):
        object.__setattr__(self, "A", frozenset(int(a) for a in A))
        object.__setattr__(self, "B", frozenset(int(b) for b in B))
        object.__setattr__(self, "mode", mode)
        if mode not in MODES:
            raise ElectricalError(f"mode must be one of {MODES}")
        if not self.A or not self.B:
            raise ElectricalError("source and target sets must be nonempty")
        if self.A & self.B:
            raise ElectricalError("source and target sets intersect")


def laplacian(net: PlaneNetwork) -> sp.csr_matrix:
    """Weighted Laplacian with parallel edges summed and loops dropped."""
    t, h, c = net.tail, net.head, net.conductance
    keep = t != h
    t, h, c = t[keep], h[keep], c[keep]
    n = net.n_vertices
    w = sp.coo_matrix((np.concatenate([c, c]), (np.concatenate([t, h]), np.concatenate([h, t]))),
                      shape=(n, n)).tocsr()
    deg = np.asarray(w.sum(axis=1)).ravel()
    return (sp.diags(deg) - w).tocsr()


def harmonic_potential(
    net: PlaneNetwork,
    ones: Iterable[int],
    zeros: Iterable[int],
    L: sp.csr_matrix | None = None,
) -> np.ndarray:
    """Potential equal to 1 on ``ones``, 0 on ``zeros``, harmonic elsewhere.

    Vertices whose component (after removing ``ones`` and ``zeros``) touches
    neither set get NaN.
    """
    ones = np.fromiter(set(ones), dtype=np.int64)
    zeros = np.fromiter(set(zeros), dtype=np.int64)
    n = net.n_vertices
    L = laplacian(net) if L is None else L
    fixed = np.zeros(n, dtype=bool)
    fixed[ones] = True
    fixed[zeros] = True
    phi = np.zeros(n)
    phi[ones] = 1.0
    free = np.flatnonzero(~fixed)
    if len(free) == 0:
        return phi
    # restrict to free vertices that can reach a fixed vertex
    Lff = L[free][:, free]
    rhs = -(L[free][:, ones] @ np.ones(len(ones)))
    n_comp, comp = sp.csgraph.connected_components(Lff, directed=False)
    touches = np.asarray(abs(L[free][:, fixed]).sum(axis=1)).ravel() > 0
    ok_comp = np.zeros(n_comp, dtype=bool)
    ok_comp[comp[touches]] = True
    ok = ok_comp[comp]
    phi[free[~ok]] = np.nan
    sel = np.flatnonzero(ok)
    if len(sel):
        A = Lff[sel][:, sel].tocsc()
        phi[free[sel]] = spla.spsolve(A, rhs[sel])
    return phi


def _resolve_sets(net: PlaneNetwork, query: ResistanceQuery):
    A, B = set(query.A), set(query.B)
    n = net.n_vertices
    if any(not 0 <= v < n for v in A | B):
        raise ElectricalError("vertex out of range")
    if query.mode == "wired":
        if net.boundary_vertex is None:
            raise ElectricalError("wired mode needs a network with a boundary vertex")
        if net.boundary_vertex in A:
            raise ElectricalError("boundary vertex lies in the source set")
        B.add(net.boundary_vertex)
    return A, B


def effective_conductance(net: PlaneNetwork, query: ResistanceQuery) -> float:
    """Sum over a in A of c(a) P_a(hit B before returning to A)."""
    A, B = _resolve_sets(net, query)
    L = laplacian(net)
    phi = harmonic_potential(net, A, B, L)
    # current out of A = sum_{a in A} (L phi)_a
    a_idx = np.fromiter(A, dtype=np.int64)
    phi0 = np.nan_to_num(phi, nan=1.0)
    current = float((L[a_idx] @ phi0).sum())
    return current


def effective_resistance(net: PlaneNetwork, query: ResistanceQuery) -> float:
    c = effective_conductance(net, query)
    if not c > 0:
        raise ElectricalError("target set is unreachable from the source set")
    return 1.0 / c


def hitting_probability(
    net: PlaneNetwork, start: int, targets: Iterable[int], absorbing: Iterable[int] = ()
) -> float:
    """P_start(walk reaches ``targets`` before ``absorbing``)."""
    B, C = set(int(b) for b in targets), set(int(c) for c in absorbing)
    if B & C:
        raise ElectricalError("target and absorbing sets intersect")
    if start in B:
        return 1.0
    if start in C:
        return 0.0
    phi = harmonic_potential(net, B, C)
    val = phi[start]
    return 0.0 if np.isnan(val) else float(val)


def escape_probability(net: PlaneNetwork, v: int) -> float:
    """P_v(hit the boundary vertex before returning to v)."""
    if net.boundary_vertex is None:
        raise ElectricalError("network has no boundary vertex")
    if v == net.boundary_vertex:
        raise ElectricalError("v is the boundary vertex")
    ceff = effective_conductance(net, ResistanceQuery([v], [net.boundary_vertex]))
    return ceff / float(net.vertex_conductance()[v])


def kirchhoff_marginal(net: PlaneNetwork, e: int) -> float:
    """UST probability that edge ``e`` is in the tree: c(e) R_eff(e-, e+)."""
    u, v = int(net.tail[e]), int(net.head[e])
    if u == v:
        raise ElectricalError(f"edge {e} is a loop")
    r = effective_resistance(net, ResistanceQuery([u], [v]))
    return float(net.conductance[e] * r)


def kirchhoff_marginals(net: PlaneNetwork) -> np.ndarray:
    """Marginals of every edge (loops get 0).

    Grounds the last vertex and factorises the reduced Laplacian once;
    R(u, v) = (e_u - e_v)^T L_g^{-1} (e_u - e_v).
    """
    n = net.n_vertices
    L = laplacian(net).tocsc()
    ground = n - 1
    Lg = L[:ground][:, :ground].tocsc()
    t, h = net.tail, net.head
    out = np.zeros(net.n_edges)
    if n == 1:
        return out
    lu = spla.splu(Lg)
    nonloop = np.flatnonzero(t != h)
    # batch right-hand sides in blocks
    block = 256
    for s in range(0, len(nonloop), block):
        es = nonloop[s:s + block]
        rhs = np.zeros((ground, len(es)))
        cols = np.arange(len(es))
        tm, hm = t[es] < ground, h[es] < ground
        rhs[t[es][tm], cols[tm]] += 1.0
        rhs[h[es][hm], cols[hm]] -= 1.0
        x = lu.solve(rhs)
        r = np.zeros(len(es))
        r[tm] += x[t[es][tm], cols[tm]]
        r[hm] -= x[h[es][hm], cols[hm]]
        out[es] = net.conductance[es] * r
    return out


@dataclass(frozen=True)
class GapRow:
    depth: int
    r_free: float
    r_wired: float
    r_a_to_b_boundary: float
    r_b_to_a_boundary: float

    @property
    def triangle_bound(self) -> float:
        return 3.0 * max(self.r_a_to_b_boundary, self.r_b_to_a_boundary)


def wired_free_gap(
    net: PlaneNetwork,
    truncations: Sequence[Iterable[int]],
    A: Iterable[int],
    B: Iterable[int],
    depths: Sequence[int] | None = None,
    check: bool = True,
) -> list[GapRow]:
    """Free vs wired resistance between A and B along nested truncations.

    With ``check`` set, asserts free values non-increasing, wired values
    non-decreasing, and R_wired <= 3 max(R(A <-> B + bd), R(B <-> A + bd)) at
    each depth, where ``bd`` is the wired boundary vertex.
    """
    A, B = list(A), list(B)
    rows: list[GapRow] = []
    depths = list(depths) if depths is not None else list(range(len(truncations)))
    for depth, vs in zip(depths, truncations):
        vs = sorted(set(vs))
        free = induced_subnetwork(net, vs)
        wired = wired_truncation(net, vs)
        local = {int(v): i for i, v in enumerate(free.labels["vertex_map"])}
        try:
            a = [local[v] for v in A]
            b = [local[v] for v in B]
        except KeyError:
            raise ElectricalError(f"truncation at depth {depth} misses A or B") from None
        r_free = effective_resistance(free, ResistanceQuery(a, b))
        if wired.boundary_vertex is None:
            r_w = r_free
            r_ab = r_ba = r_free
        else:
            r_w = effective_resistance(wired, ResistanceQuery(a, b))
            bd = wired.boundary_vertex
            r_ab = effective_resistance(wired, ResistanceQuery(a, b + [bd]))
            r_ba = effective_resistance(wired, ResistanceQuery(b, a + [bd]))
        rows.append(GapRow(depth, r_free, r_w, r_ab, r_ba))
    if check:
        tol = 1e-9
        for prev, row in zip(rows, rows[1:]):
            if row.r_free > prev.r_free * (1 + tol):
                raise ElectricalError(f"free resistance increased at depth {row.depth}")
            if row.r_wired < prev.r_wired * (1 - tol):
                raise ElectricalError(f"wired resistance decreased at depth {row.depth}")
        for row in rows:
            if row.r_wired > row.triangle_bound * (1 + tol):
                raise ElectricalError(f"triangle bound violated at depth {row.depth}")
    return rows
