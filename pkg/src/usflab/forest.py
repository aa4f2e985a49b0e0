"""Uniform spanning trees and forests via Wilson's algorithm.

Random numbers come from a counter-based Philox generator keyed by
``(seed, stream)``, so every sample is reproducible on its own and parallel
runs give the same sample set as serial ones.  The walk itself runs in
:mod:`usflab.kernels` (compiled when available).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .graph import GraphError, PlaneNetwork

__all__ = [
    "ForestError",
    "StepCapExceeded",
    "DifferentComponents",
    "WalkConfig",
    "SpanningForest",
    "Past",
    "TreeDistribution",
    "make_rng",
    "walk_table",
    "loop_erase",
    "wilson_ust",
    "wusf_sample",
    "fusf_sample",
    "dual_complement",
    "is_spanning_tree",
    "check_forest",
    "tree_path",
    "past_of_edge",
    "enumerate_trees",
    "spanning_tree_count",
    "check_spatial_markov",
    "format_forest",
    "parse_forest",
]

DEFAULT_STEP_CAP = 10**10
DEFAULT_ENUM_CAP = 100_000
_U64 = 1 << 64


class ForestError(ValueError):
    pass


class StepCapExceeded(ForestError):
    pass


class DifferentComponents(ForestError):
    pass


@dataclass(frozen=True)
class WalkConfig:
    seed: int = 0
    stream: int = 0
    step_cap: int = DEFAULT_STEP_CAP

    def __post_init__(self):
        if not (0 <= self.seed < _U64 and 0 <= self.stream < _U64):
            raise ForestError("seed and stream must be unsigned 64-bit integers")
        if self.step_cap < 1:
            raise ForestError("step cap must be positive")

    def for_stream(self, stream: int) -> "WalkConfig":
        return WalkConfig(self.seed, stream, self.step_cap)


def make_rng(seed: int, stream: int) -> np.random.Generator:
    """Philox generator with 128-bit key ``(seed, stream)`` and counter 0."""
    key = np.array([seed % _U64, stream % _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class WalkTable:
    """Per-vertex cumulative conductance tables in CSR layout."""

    indptr: np.ndarray
    nbr: np.ndarray
    edge: np.ndarray
    cumw: np.ndarray


def walk_table(net: PlaneNetwork) -> WalkTable:
    cached = getattr(net, "_walk_table", None)
    if cached is not None:
        return cached
    deg = np.array([len(r) for r in net.rotation], dtype=np.int64)
    indptr = np.zeros(net.n_vertices + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    darts = np.fromiter((d for r in net.rotation for d in r), dtype=np.int64, count=int(indptr[-1]))
    edge = darts >> 1
    # head of dart d: head[e] for even d, tail[e] for odd d
    nbr = np.where(darts & 1, net.tail[edge], net.head[edge])
    w = net.conductance[edge]
    cumw = np.empty_like(w)
    for v in range(net.n_vertices):
        lo, hi = indptr[v], indptr[v + 1]
        if hi > lo:
            np.cumsum(w[lo:hi], out=cumw[lo:hi])
    table = WalkTable(indptr, nbr.astype(np.int64), edge.astype(np.int64), cumw)
    net._walk_table = table
    return table


class WilsonRun:
    """Incremental Wilson sampler state for one (seed, stream).

    ``extend(starts)`` adds the branches from ``starts`` to the current tree;
    extending with every vertex yields the full tree.  Splitting the start
    list over several calls gives the same tree as a single call.
    """

    def __init__(self, net: PlaneNetwork, roots: Sequence[int], cfg: WalkConfig):
        if len(roots) == 0:
            raise ForestError("Wilson's algorithm needs a root")
        self.net = net
        self.table = walk_table(net)
        self.cfg = cfg
        self.rng = kernels.RngHandle(make_rng(cfg.seed, cfg.stream))
        n = net.n_vertices
        self.in_tree = np.zeros(n, dtype=np.uint8)
        self.in_tree[np.asarray(roots, dtype=np.int64)] = 1
        self.next_v = np.full(n, -1, dtype=np.int64)
        self.next_e = np.full(n, -1, dtype=np.int64)
        self.steps = 0

    def extend(self, starts) -> None:
        starts = np.ascontiguousarray(starts, dtype=np.int64)
        t = self.table
        cap = self.cfg.step_cap - self.steps
        got = kernels.wilson(t.indptr, t.nbr, t.edge, t.cumw, self.in_tree, starts,
                             self.next_v, self.next_e, self.rng, cap)
        if got < 0:
            raise StepCapExceeded(f"random walk exceeded {self.cfg.step_cap} steps")
        self.steps += int(got)

    def branch(self, v: int) -> list[int]:
        """Vertices from ``v`` to the root along the current tree."""
        out = [v]
        while self.next_v[v] >= 0:
            v = int(self.next_v[v])
            out.append(v)
        return out


def _order(n: int, roots: Iterable[int], order) -> np.ndarray:
    if order is None:
        return np.arange(n, dtype=np.int64)
    order = np.asarray(order, dtype=np.int64)
    if set(order.tolist()) | set(roots) != set(range(n)):
        raise ForestError("start order must cover every non-root vertex")
    return order


def _check_connected(net: PlaneNetwork) -> None:
    if net.n_edges == 0 and net.n_vertices > 1:
        raise ForestError("network is disconnected")


@dataclass
class SpanningForest:
    """Forest given by parent pointers toward the sampling root.

    For wired samples the root is the boundary vertex; its incident tree
    edges are not part of the forest, and each of its tree neighbours roots
    one component.
    """

    host: PlaneNetwork
    parent: np.ndarray
    parent_edge: np.ndarray
    root: int
    wired: bool = False
    steps: int = field(default=0, compare=False)

    @cached_property
    def edges(self) -> np.ndarray:
        mask = self.parent_edge >= 0
        if self.wired:
            mask &= self.parent != self.root
        return np.sort(self.parent_edge[mask])

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges.tolist())

    @cached_property
    def parent_dart(self) -> np.ndarray:
        """Dart from each vertex toward its parent (-1 at the root)."""
        pe = self.parent_edge
        out = np.where(pe >= 0, 2 * pe + (self.host.tail[np.maximum(pe, 0)] != np.arange(len(pe))), -1)
        return out.astype(np.int64)

    @cached_property
    def component(self) -> np.ndarray:
        """Component label per vertex; the wired root gets -1."""
        n = len(self.parent)
        lab = np.full(n, -1, dtype=np.int64)
        for v in range(n):
            if lab[v] >= 0 or (self.wired and v == self.root):
                continue
            path = [v]
            w = v
            while True:
                p = int(self.parent[w])
                if p < 0 or (self.wired and p == self.root) or lab[p] >= 0:
                    break
                w = p
                path.append(w)
            p = int(self.parent[w])
            top = lab[p] if (p >= 0 and lab[p] >= 0) else w
            lab[path] = top
        # compact labels
        inner = lab >= 0
        _, compact = np.unique(lab[inner], return_inverse=True)
        lab[inner] = compact
        return lab

    @property
    def n_components(self) -> int:
        c = self.component
        return int(c.max()) + 1 if (c >= 0).any() else 0

    @cached_property
    def host_id(self) -> str:
        from .graph import format_planenet
        return hashlib.sha256(format_planenet(self.host).encode()).hexdigest()[:16]

    def __contains__(self, e: int) -> bool:
        return int(e) in self.edge_set


def _finish(run: WilsonRun, root: int, wired: bool) -> SpanningForest:
    return SpanningForest(run.net, run.next_v.copy(), run.next_e.copy(), root, wired, run.steps)


def wilson_ust(net: PlaneNetwork, root: int, cfg: WalkConfig = WalkConfig(),
               order: Sequence[int] | None = None) -> SpanningForest:
    """Conductance-weighted uniform spanning tree rooted at ``root``."""
    if not 0 <= root < net.n_vertices:
        raise ForestError("root out of range")
    _check_connected(net)
    run = WilsonRun(net, [root], cfg)
    run.extend(_order(net.n_vertices, [root], order))
    return _finish(run, root, wired=False)


def wusf_sample(net: PlaneNetwork, cfg: WalkConfig = WalkConfig(),
                order: Sequence[int] | None = None) -> SpanningForest:
    """Wired forest of a wired truncation: UST rooted at the boundary vertex, boundary removed."""
    if net.boundary_vertex is None:
        raise ForestError("wired sampling needs a boundary vertex")
    run = WilsonRun(net, [net.boundary_vertex], cfg)
    run.extend(_order(net.n_vertices, [net.boundary_vertex], order))
    return _finish(run, net.boundary_vertex, wired=True)


def fusf_sample(net: PlaneNetwork, cfg: WalkConfig = WalkConfig(), root: int | str = "auto") -> SpanningForest:
    """Free forest of a free truncation, i.e. its UST."""
    if net.boundary_vertex is not None:
        raise ForestError("free sampling expects a network without a boundary vertex")
    r = 0 if root == "auto" else int(root)
    return wilson_ust(net, r, cfg)


def loop_erase(path: Sequence[int], net: PlaneNetwork | None = None) -> list[int]:
    """Chronological loop erasure.  With ``net`` given, adjacency is checked."""
    path = list(path)
    if net is not None:
        for a, b in zip(path, path[1:]):
            if b not in net.neighbors(a):
                raise ForestError(f"vertices {a} and {b} are not adjacent")
    out: list = []
    pos: dict = {}
    for v in path:
        if v in pos:
            cut = pos[v]
            for w in out[cut + 1:]:
                del pos[w]
            del out[cut + 1:]
        else:
            pos[v] = len(out)
            out.append(v)
    return out


def is_spanning_tree(net: PlaneNetwork, edges: Iterable[int]) -> bool:
    edges = list(edges)
    if len(edges) != net.n_vertices - 1:
        return False
    parent = list(range(net.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        a, b = find(int(net.tail[e])), find(int(net.head[e]))
        if a == b:
            return False
        parent[a] = b
    return True


def check_forest(f: SpanningForest) -> None:
    """Raise unless ``f`` is acyclic and spans its vertex set."""
    net = f.host
    skip = {f.root} if f.wired else set()
    n = net.n_vertices - len(skip)
    parent = list(range(net.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in f.edges.tolist():
        u, v = int(net.tail[e]), int(net.head[e])
        if u in skip or v in skip:
            raise ForestError(f"edge {e} touches the wired root")
        a, b = find(u), find(v)
        if a == b:
            raise ForestError(f"edge {e} closes a cycle")
        parent[a] = b
    if not f.wired and len(f.edges) != n - 1:
        raise ForestError("tree does not span")
    # every vertex other than the root has a parent
    for v in range(net.n_vertices):
        if v != f.root and f.parent[v] < 0:
            raise ForestError(f"vertex {v} has no parent")


def dual_complement(f: SpanningForest) -> np.ndarray:
    """Edge ids (shared with :func:`usflab.graph.dual`) of edges outside the tree."""
    mask = np.ones(f.host.n_edges, dtype=bool)
    mask[f.edges] = False
    return np.flatnonzero(mask)


def _ancestors(f: SpanningForest, v: int) -> list[int]:
    out = [v]
    stop = f.root if f.wired else -1
    while True:
        p = int(f.parent[out[-1]])
        if p < 0 or p == stop:
            return out
        out.append(p)


def tree_path(f: SpanningForest, x: int, y: int) -> list[int]:
    """Edge ids along the forest path from ``x`` to ``y``."""
    if f.wired and f.root in (x, y):
        raise ForestError("the wired root is not a forest vertex")
    if x == y:
        return []
    ax, ay = _ancestors(f, x), _ancestors(f, y)
    if ax[-1] != ay[-1]:
        raise DifferentComponents(f"{x} and {y} lie in different components")
    on_y = {v: i for i, v in enumerate(ay)}
    i = next(i for i, v in enumerate(ax) if v in on_y)
    j = on_y[ax[i]]
    up = [int(f.parent_edge[v]) for v in ax[:i]]
    down = [int(f.parent_edge[v]) for v in ay[:j]]
    return up + down[::-1]


@dataclass(frozen=True)
class Past:
    vertices: np.ndarray
    touches_boundary: bool

    def __len__(self) -> int:
        return len(self.vertices)


def outer_band(net: PlaneNetwork, n_layers: int = 1) -> np.ndarray:
    """Mask of the outermost ``n_layers`` retained layers.

    Uses ``labels['layer']`` when present (boundary vertex excluded);
    otherwise graph distance to the boundary vertex below ``n_layers + 1``.
    """
    n = net.n_vertices
    bd = net.boundary_vertex
    layer = net.labels.get("layer")
    if layer is not None:
        layer = np.asarray(layer)
        inner = np.ones(n, dtype=bool)
        if bd is not None:
            inner[bd] = False
        top = layer[inner].max()
        return inner & (layer > top - n_layers)
    if bd is None:
        return np.zeros(n, dtype=bool)
    dist = np.full(n, -1)
    dist[bd] = 0
    frontier = [bd]
    for k in range(1, n_layers + 1):
        nxt = []
        for v in frontier:
            for w in net.neighbors(v):
                if dist[w] < 0:
                    dist[w] = k
                    nxt.append(w)
        frontier = nxt
    return dist >= 1


def past_of_edge(f: SpanningForest, e: int, n_outer_layers: int = 1,
                 band: np.ndarray | None = None) -> Past:
    """Vertices cut off from the root side when ``e`` is removed from ``f``."""
    if not f.wired:
        raise ForestError("the past needs a forest oriented toward the boundary")
    if int(e) not in f.edge_set:
        return Past(np.zeros(0, dtype=np.int64), False)
    u, v = int(f.host.tail[e]), int(f.host.head[e])
    child = u if f.parent_edge[u] == e and f.parent[u] == v else v
    verts = kernels.subtree(f.parent, child)
    if band is None:
        band = outer_band(f.host, n_outer_layers)
    return Past(verts, bool(band[verts].any()))


# ---------------------------------------------------------------------------
# exact enumeration


@dataclass
class TreeDistribution:
    trees: list[tuple[int, ...]]
    weights: np.ndarray
    probabilities: np.ndarray

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return dict(zip(self.trees, self.probabilities.tolist()))

    def edge_marginals(self, n_edges: int) -> np.ndarray:
        out = np.zeros(n_edges)
        for t, p in zip(self.trees, self.probabilities):
            out[list(t)] += p
        return out

    def __len__(self) -> int:
        return len(self.trees)


def _reduced_laplacian(n, tail, head, cond) -> np.ndarray:
    L = np.zeros((n, n))
    for a, b, c in zip(tail, head, cond):
        if a != b:
            L[a, a] += c
            L[b, b] += c
            L[a, b] -= c
            L[b, a] -= c
    return L[1:, 1:]


def spanning_tree_count(n, tail, head, cond=None) -> float:
    """Weighted matrix-tree determinant (unit weights when ``cond`` is None)."""
    if n == 1:
        return 1.0
    cond = np.ones(len(tail)) if cond is None else cond
    sign, logdet = np.linalg.slogdet(_reduced_laplacian(n, tail, head, cond))
    return float(math.exp(logdet)) if sign > 0 else 0.0


def _enumerate(n, tail, head, cond, ids, cap) -> TreeDistribution:
    count = spanning_tree_count(n, tail, head)
    if count > cap + 0.5:
        raise ForestError(f"{count:.0f} spanning trees exceed the enumeration cap {cap}")
    if count < 0.5:
        raise ForestError("graph is disconnected")
    edges = [(int(a), int(b), float(c), int(i)) for a, b, c, i in zip(tail, head, cond, ids) if a != b]
    m = len(edges)
    trees: list[tuple[int, ...]] = []
    weights: list[float] = []

    def connected(comp_of, start):
        # union of current components with edges[start:]
        parent = list(comp_of)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        roots = len({find(v) for v in range(n)})
        for a, b, _, _ in edges[start:]:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
                roots -= 1
                if roots == 1:
                    return True
        return roots == 1

    def rec(i, comp, chosen, w):
        if len(chosen) == n - 1:
            trees.append(tuple(sorted(chosen)))
            weights.append(w)
            return
        if i == m:
            return
        a, b, c, eid = edges[i]
        ca, cb = comp[a], comp[b]
        if ca != cb:
            new = [ca if x == cb else x for x in comp]
            chosen.append(eid)
            rec(i + 1, new, chosen, w * c)
            chosen.pop()
        if connected(comp, i + 1):
            rec(i + 1, comp, chosen, w)

    if n == 1:
        trees, weights = [()], [1.0]
    else:
        rec(0, list(range(n)), [], 1.0)
    W = np.asarray(weights)
    total = W.sum()
    det = spanning_tree_count(n, tail, head, cond)
    if not math.isclose(total, det, rel_tol=1e-9):
        raise ForestError(f"enumeration total {total} disagrees with matrix-tree value {det}")
    return TreeDistribution(trees, W, W / total)


def enumerate_trees(net: PlaneNetwork, cap: int = DEFAULT_ENUM_CAP) -> TreeDistribution:
    """All spanning trees with conductance-product weights."""
    return _enumerate(net.n_vertices, net.tail, net.head, net.conductance,
                      np.arange(net.n_edges), cap)


def check_spatial_markov(net: PlaneNetwork, A: Iterable[int], B: Iterable[int],
                         cap: int = DEFAULT_ENUM_CAP) -> float:
    """Max probability gap between UST(. | A in, B out) and UST((G-B)/A) + A."""
    A, B = sorted(set(int(e) for e in A)), sorted(set(int(e) for e in B))
    if set(A) & set(B):
        raise ForestError("A and B intersect")
    full = enumerate_trees(net, cap)
    cond: dict[tuple, float] = {}
    sA, sB = set(A), set(B)
    for t, p in zip(full.trees, full.probabilities):
        st = set(t)
        if sA <= st and not (sB & st):
            cond[t] = p
    z = sum(cond.values())
    if z <= 0:
        raise ForestError("conditioning event has probability zero")
    cond = {t: p / z for t, p in cond.items()}

    # contract A, delete B
    parent = list(range(net.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in A:
        parent[find(int(net.tail[e]))] = find(int(net.head[e]))
    reps = sorted({find(v) for v in range(net.n_vertices)})
    idx = {r: i for i, r in enumerate(reps)}
    keep = [e for e in range(net.n_edges) if e not in sA and e not in sB]
    tail = np.array([idx[find(int(net.tail[e]))] for e in keep], dtype=np.int64)
    head = np.array([idx[find(int(net.head[e]))] for e in keep], dtype=np.int64)
    small = _enumerate(len(reps), tail, head, net.conductance[keep], np.array(keep), cap)
    other = {tuple(sorted(set(t) | sA)): p for t, p in zip(small.trees, small.probabilities)}
    keys = set(cond) | set(other)
    return max(abs(cond.get(k, 0.0) - other.get(k, 0.0)) for k in keys)


# ---------------------------------------------------------------------------
# dump format


def format_forest(f: SpanningForest | Iterable[int]) -> str:
    edges = f.edges.tolist() if isinstance(f, SpanningForest) else sorted(int(e) for e in f)
    return "forest v1\n" + "".join(f"{e}\n" for e in edges)


def parse_forest(text: str, source: str = "<string>") -> list[int]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "forest v1":
        raise GraphError(f"{source}:1:1: expected header 'forest v1'")
    out = []
    for i, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s:
            continue
        try:
            out.append(int(s))
        except ValueError:
            raise GraphError(f"{source}:{i}:1: expected an edge id, got {s!r}") from None
    return out
