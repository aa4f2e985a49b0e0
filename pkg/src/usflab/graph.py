"""Plane networks stored as combinatorial maps (rotation systems).

Edge ``e`` owns the two darts ``2e`` (tail -> head) and ``2e + 1`` (head -> tail),
so reversal is ``d ^ 1``.  ``next_ccw[d]`` is the next dart counterclockwise
around the origin of ``d``.  Faces are traversed with the face on the left:
the dart following ``d`` on its left face is ``prev_ccw[d ^ 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

__all__ = [
    "GraphError",
    "PlaneNetwork",
    "GeometryBound",
    "build_from_rotation_system",
    "from_faces",
    "dual",
    "is_polyhedral",
    "is_polyhedral_bruteforce",
    "wired_truncation",
    "induced_subnetwork",
    "subdivide_and_trim",
    "star_triangulation",
    "geometry_bound",
    "maps_isomorphic",
    "read_planenet",
    "write_planenet",
    "format_planenet",
    "parse_planenet",
]


class GraphError(ValueError):
    """Malformed or unsupported plane network input."""


class PeninsulaError(GraphError):
    """Every vertex lies inside a peninsula; nothing is left after trimming."""


class PlaneNetwork:
    """Immutable finite plane network.

    Parameters are usually produced by :func:`build_from_rotation_system`;
    constructing directly assumes the data is already validated.
    """

    def __init__(
        self,
        n_vertices: int,
        tail: np.ndarray,
        head: np.ndarray,
        conductance: np.ndarray,
        rotation: Sequence[Sequence[int]],
        outer_dart: int | None = None,
        boundary_vertex: int | None = None,
        labels: Mapping[str, np.ndarray] | None = None,
        require_planar: bool = True,
    ):
        self.n_vertices = int(n_vertices)
        self.tail = np.asarray(tail, dtype=np.int64)
        self.head = np.asarray(head, dtype=np.int64)
        self.conductance = np.asarray(conductance, dtype=float)
        self.rotation = tuple(tuple(int(d) for d in rot) for rot in rotation)
        self.boundary_vertex = boundary_vertex
        self.labels = dict(labels or {})
        for arr in (self.tail, self.head, self.conductance):
            arr.setflags(write=False)

        n_darts = 2 * self.n_edges
        self.origin = np.empty(n_darts, dtype=np.int64)
        self.origin[0::2] = self.tail
        self.origin[1::2] = self.head
        self.next_ccw = np.full(n_darts, -1, dtype=np.int64)
        self.prev_ccw = np.full(n_darts, -1, dtype=np.int64)
        for v, rot in enumerate(self.rotation):
            k = len(rot)
            for i, d in enumerate(rot):
                self.next_ccw[d] = rot[(i + 1) % k]
                self.prev_ccw[d] = rot[(i - 1) % k]

        # faces: orbits of d -> prev_ccw[d ^ 1]
        self.face_of_dart = np.full(n_darts, -1, dtype=np.int64)
        faces: list[tuple[int, ...]] = []
        for start in range(n_darts):
            if self.face_of_dart[start] >= 0:
                continue
            cyc = []
            d = start
            while self.face_of_dart[d] < 0:
                self.face_of_dart[d] = len(faces)
                cyc.append(d)
                d = int(self.prev_ccw[d ^ 1])
            faces.append(tuple(cyc))
        self.faces = tuple(faces)

        if outer_dart is None:
            sizes = [len(f) for f in self.faces]
            self.outer_face = int(np.argmax(sizes)) if sizes else 0
        else:
            self.outer_face = int(self.face_of_dart[outer_dart])

        self.euler_characteristic = self.n_vertices - self.n_edges + self.n_faces
        if require_planar and self.euler_characteristic != 2:
            raise GraphError(
                f"rotation system is not planar: V-E+F = {self.euler_characteristic}"
            )
        for arr in (self.origin, self.next_ccw, self.prev_ccw, self.face_of_dart):
            arr.setflags(write=False)

    # -- basic sizes ---------------------------------------------------
    @property
    def n_edges(self) -> int:
        return len(self.tail)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def inner_vertices(self) -> np.ndarray:
        """Vertices other than the wired boundary vertex."""
        idx = np.arange(self.n_vertices)
        if self.boundary_vertex is None:
            return idx
        return idx[idx != self.boundary_vertex]

    def dart_head(self, d: int) -> int:
        return int(self.origin[d ^ 1])

    def degree(self, v: int) -> int:
        return len(self.rotation[v])

    def degrees(self) -> np.ndarray:
        return np.array([len(r) for r in self.rotation], dtype=np.int64)

    def neighbors(self, v: int) -> list[int]:
        return [int(self.origin[d ^ 1]) for d in self.rotation[v]]

    def face_vertices(self, f: int) -> list[int]:
        return [int(self.origin[d]) for d in self.faces[f]]

    def vertex_conductance(self) -> np.ndarray:
        """c(v): total conductance of edges at v (loops count twice)."""
        cv = np.zeros(self.n_vertices)
        np.add.at(cv, self.tail, self.conductance)
        np.add.at(cv, self.head, self.conductance)
        return cv

    def outer_vertices(self) -> list[int]:
        return self.face_vertices(self.outer_face)

    def edge_list(self) -> list[tuple[int, int]]:
        return list(zip(self.tail.tolist(), self.head.tolist()))

    def to_networkx(self) -> nx.MultiGraph:
        g = nx.MultiGraph()
        g.add_nodes_from(range(self.n_vertices))
        for e, (u, v) in enumerate(self.edge_list()):
            g.add_edge(u, v, key=e, conductance=float(self.conductance[e]))
        return g

    def with_conductance(self, conductance: Sequence[float]) -> "PlaneNetwork":
        c = np.asarray(conductance, dtype=float)
        if c.shape != self.conductance.shape:
            raise GraphError("conductance vector has the wrong length")
        _check_conductance(c)
        return PlaneNetwork(
            self.n_vertices, self.tail, self.head, c, self.rotation,
            outer_dart=self.faces[self.outer_face][0],
            boundary_vertex=self.boundary_vertex, labels=self.labels,
            require_planar=False,
        )

    def __repr__(self) -> str:
        extra = "" if self.boundary_vertex is None else f", boundary={self.boundary_vertex}"
        return (
            f"PlaneNetwork(V={self.n_vertices}, E={self.n_edges}, "
            f"F={self.n_faces}{extra})"
        )


@dataclass(frozen=True)
class GeometryBound:
    max_degree: int
    max_codegree: int
    max_conductance: float
    max_resistance: float

    @property
    def combined_M(self) -> float:
        return float(
            max(self.max_degree, self.max_codegree, self.max_conductance, self.max_resistance)
        )


def _check_conductance(c: np.ndarray) -> None:
    if not np.all(np.isfinite(c)) or np.any(c <= 0):
        raise GraphError("conductances must be positive and finite")


def build_from_rotation_system(
    rotation: Sequence[Sequence[tuple[int, int]]],
    conductance: Mapping[int, float] | Sequence[float] | None = None,
    outer: tuple[int, int] | None = None,
    boundary_vertex: int | None = None,
    labels: Mapping[str, np.ndarray] | None = None,
    require_planar: bool = True,
) -> PlaneNetwork:
    """Build a network from per-vertex counterclockwise ``(neighbor, edge_id)`` lists.

    Edge ids must be dense ``0..E-1``.  The tail of an edge is the vertex
    whose list mentions it first (scanning vertices in order), which makes
    the text format round-trip exactly.  ``outer`` is ``(vertex, edge_id)``
    naming a dart whose left face is the outer face.
    """
    n = len(rotation)
    occurrences: dict[int, list[tuple[int, int, int]]] = {}
    for v, rot in enumerate(rotation):
        for pos, (w, e) in enumerate(rot):
            if not 0 <= w < n:
                raise GraphError(f"vertex {v}: neighbor {w} out of range")
            occurrences.setdefault(int(e), []).append((v, int(w), pos))
    m = len(occurrences)
    if sorted(occurrences) != list(range(m)):
        raise GraphError("edge ids must be dense integers 0..E-1")
    tail = np.empty(m, dtype=np.int64)
    head = np.empty(m, dtype=np.int64)
    dart_at: dict[tuple[int, int], int] = {}
    for e, occ in occurrences.items():
        if len(occ) != 2:
            raise GraphError(f"edge {e} appears {len(occ)} times (expected 2)")
        (v0, w0, p0), (v1, w1, p1) = occ
        if w0 != v1 or w1 != v0:
            raise GraphError(f"edge {e}: inconsistent endpoints {v0}-{w0} vs {v1}-{w1}")
        tail[e], head[e] = v0, v1
        dart_at[(v0, p0)] = 2 * e
        dart_at[(v1, p1)] = 2 * e + 1
    rot_darts = [[dart_at[(v, p)] for p in range(len(rot))] for v, rot in enumerate(rotation)]

    if conductance is None:
        c = np.ones(m)
    elif isinstance(conductance, Mapping):
        c = np.array([float(conductance.get(e, 1.0)) for e in range(m)])
    else:
        c = np.asarray(conductance, dtype=float)
        if len(c) != m:
            raise GraphError("conductance vector has the wrong length")
    _check_conductance(c)

    if n == 0:
        raise GraphError("empty network")
    if not _connected(n, tail, head):
        raise GraphError("network is disconnected")

    outer_dart = None
    if outer is not None:
        v, e = outer
        if tail[e] == v:
            outer_dart = 2 * e
        elif head[e] == v:
            outer_dart = 2 * e + 1
        else:
            raise GraphError(f"outer-face hint: edge {e} is not incident to {v}")
    return PlaneNetwork(
        n, tail, head, c, rot_darts, outer_dart=outer_dart,
        boundary_vertex=boundary_vertex, labels=labels, require_planar=require_planar,
    )


def _connected(n: int, tail: np.ndarray, head: np.ndarray) -> bool:
    if n <= 1:
        return True
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for u, v in zip(tail.tolist(), head.tolist()):
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps == 1


def from_faces(
    n_vertices: int,
    faces: Iterable[Sequence[int]],
    conductance: Mapping[frozenset, float] | None = None,
    labels: Mapping[str, np.ndarray] | None = None,
) -> PlaneNetwork:
    """Build a simple plane network from its bounded faces.

    Each face is a counterclockwise vertex cycle.  The complement must be a
    single outer face bounded by a simple cycle (a triangulated disc shape).
    """
    faces = [tuple(int(v) for v in f) for f in faces]
    edge_id: dict[frozenset, int] = {}
    ends: list[tuple[int, int]] = []
    # succ[(v, w)] = x  where face ... x -> v -> w ... has v's ccw successor of w being x
    nxt: dict[tuple[int, int], int] = {}
    for f in faces:
        k = len(f)
        for i in range(k):
            x, v, w = f[i - 1], f[i], f[(i + 1) % k]
            key = frozenset((v, w))
            if key not in edge_id:
                edge_id[key] = len(ends)
                ends.append((v, w))
            if (v, w) in nxt:
                raise GraphError(f"dart {v}->{w} lies on two bounded faces")
            nxt[(v, w)] = x
    out_darts: dict[int, set[int]] = {v: set() for v in range(n_vertices)}
    for a, b in ends:
        out_darts[a].add(b)
        out_darts[b].add(a)

    rotation: list[list[tuple[int, int]]] = []
    outer = None
    for v in range(n_vertices):
        nbrs = out_darts[v]
        if not nbrs:
            raise GraphError(f"vertex {v} is isolated")
        # darts with no ccw successor border the outer face on their left
        starts = [w for w in nbrs if (v, w) not in nxt]
        has_pred = {nxt[(v, w)] for w in nbrs if (v, w) in nxt}
        if starts:
            if len(starts) != 1:
                raise GraphError(f"vertex {v} touches the outer face more than once")
            # begin from the dart without a ccw predecessor
            first = [w for w in nbrs if w not in has_pred]
            w = first[0]
            if outer is None:
                outer = (v, edge_id[frozenset((v, starts[0]))], starts[0])
        else:
            w = min(nbrs)
        order = [w]
        while (v, w) in nxt:
            w = nxt[(v, w)]
            if w == order[0]:
                break
            order.append(w)
        if len(order) != len(nbrs):
            raise GraphError(f"vertex {v}: faces do not close up around it")
        rotation.append([(w, edge_id[frozenset((v, w))]) for w in order])
    cond = None
    if conductance is not None:
        cond = [float(conductance.get(frozenset(ends[e]), 1.0)) for e in range(len(ends))]
    outer_hint = None
    if outer is not None:
        outer_hint = (outer[0], outer[1])
    net = build_from_rotation_system(rotation, cond, outer=outer_hint, labels=labels)
    return net


def _dart_from(net: PlaneNetwork, v: int, e: int) -> int:
    return 2 * e if net.tail[e] == v else 2 * e + 1


def dual(net: PlaneNetwork) -> PlaneNetwork:
    """Dual map: one vertex per face, dual edge ``e`` crossing primal edge ``e``.

    Dual dart ``d`` runs from the left face of primal dart ``d`` to its right
    face; conductances are inverted.  ``labels['primal_face']`` maps dual
    vertices to primal faces (the identity on ids).
    """
    tail = net.face_of_dart[0::2].copy()
    head = net.face_of_dart[1::2].copy()
    rotation = [list(face) for face in net.faces]
    # any dart incident to an outer-face vertex; the dual's outer face is
    # the face around the first outer vertex
    outer_dart = net.faces[net.outer_face][0]
    return PlaneNetwork(
        net.n_faces, tail, head, 1.0 / net.conductance, rotation,
        outer_dart=outer_dart,
        labels={"primal_face": np.arange(net.n_faces)},
    )


def maps_isomorphic(a: PlaneNetwork, b: PlaneNetwork) -> bool:
    """Isomorphism test that keeps edge ids fixed.

    Vertices are matched by their sets of incident edge ids; the rotations
    must then agree cyclically, either all forward or all reversed.
    """
    if (a.n_vertices, a.n_edges) != (b.n_vertices, b.n_edges):
        return False
    # a vertex is identified by the multiset of edge ids around it
    def signature(net, v):
        return tuple(sorted(d >> 1 for d in net.rotation[v]))

    index_b: dict[tuple, list[int]] = {}
    for w in range(b.n_vertices):
        index_b.setdefault(signature(b, w), []).append(w)
    vmap: dict[int, int] = {}
    for v in range(a.n_vertices):
        cands = index_b.get(signature(a, v))
        if not cands:
            return False
        vmap[v] = cands.pop()

    def cyc(net, v):
        return [d >> 1 for d in net.rotation[v]]

    def same_cycle(x, y):
        if len(x) != len(y):
            return False
        if not x:
            return True
        doubled = y + y
        return any(doubled[i:i + len(x)] == x for i in range(len(y)))

    forward = all(same_cycle(cyc(a, v), cyc(b, vmap[v])) for v in range(a.n_vertices))
    backward = all(
        same_cycle(cyc(a, v), cyc(b, vmap[v])[::-1]) for v in range(a.n_vertices)
    )
    return forward or backward


def _is_simple(net: PlaneNetwork) -> bool:
    seen = set()
    for u, v in net.edge_list():
        if u == v:
            return False
        key = (min(u, v), max(u, v))
        if key in seen:
            return False
        seen.add(key)
    return True


def is_polyhedral_bruteforce(net: PlaneNetwork) -> bool:
    """Direct check: simple, >= 4 vertices, no separating vertex pair."""
    if not _is_simple(net) or net.n_vertices < 4:
        return False
    g = nx.Graph(net.edge_list())
    for u, v in combinations(range(net.n_vertices), 2):
        h = g.copy()
        h.remove_nodes_from((u, v))
        if not nx.is_connected(h):
            return False
    return True


def is_polyhedral(net: PlaneNetwork) -> bool:
    """Simple and 3-connected.

    Uses the plane-map criterion: every face is bounded by a simple cycle and
    two distinct faces meet in nothing, one vertex, or one common edge.
    Small maps are additionally checked by brute force.
    """
    if not _is_simple(net) or net.n_vertices < 4 or net.euler_characteristic != 2:
        return False
    face_sets = []
    for f in range(net.n_faces):
        vs = net.face_vertices(f)
        if len(set(vs)) != len(vs):
            return False
        face_sets.append(vs)
    face_edges = [set(d >> 1 for d in face) for face in net.faces]
    faces_at: list[list[int]] = [[] for _ in range(net.n_vertices)]
    for f, vs in enumerate(face_sets):
        for v in vs:
            faces_at[v].append(f)
    shared: dict[tuple[int, int], list[int]] = {}
    for v, fs in enumerate(faces_at):
        for f, g in combinations(sorted(fs), 2):
            shared.setdefault((f, g), []).append(v)
    for (f, g), vs in shared.items():
        if len(vs) == 1:
            continue
        if len(vs) > 2:
            return False
        common = face_edges[f] & face_edges[g]
        if len(common) != 1:
            return False
        e = next(iter(common))
        if {int(net.tail[e]), int(net.head[e])} != set(vs):
            return False
    return True


def _relabel(
    net: PlaneNetwork,
    keep_vertices: Sequence[int],
    keep_edges: Sequence[int],
    extra_rotation: Sequence[int] | None = None,
    boundary: bool = False,
    require_planar: bool = True,
) -> PlaneNetwork:
    """Restrict ``net`` to kept vertices/edges; optionally append a wired vertex.

    When ``boundary`` is set, every kept edge with an endpoint outside the
    kept vertex set is re-attached to a new last vertex whose ccw rotation is
    given by ``extra_rotation`` (old dart ids pointing out of the removed set).
    """
    vmap = {int(v): i for i, v in enumerate(keep_vertices)}
    emap = {int(e): i for i, e in enumerate(keep_edges)}
    bnd = len(keep_vertices) if boundary else None
    tail = np.empty(len(keep_edges), dtype=np.int64)
    head = np.empty(len(keep_edges), dtype=np.int64)
    for e_old, e_new in emap.items():
        tail[e_new] = vmap.get(int(net.tail[e_old]), bnd)
        head[e_new] = vmap.get(int(net.head[e_old]), bnd)

    def new_dart(d):
        return 2 * emap[d >> 1] + (d & 1)

    rotation = []
    for v in keep_vertices:
        rotation.append([new_dart(d) for d in net.rotation[v] if (d >> 1) in emap])
    if boundary:
        rotation.append([new_dart(d) for d in extra_rotation])
    outer_dart = None
    for d in net.faces[net.outer_face]:
        if (d >> 1) in emap and int(net.origin[d]) in vmap:
            outer_dart = new_dart(d)
            break
    kv = np.asarray(keep_vertices, dtype=np.int64)
    pad = [-1] if boundary else []
    labels = {k: np.concatenate([np.asarray(v)[kv], np.asarray(pad, dtype=np.asarray(v).dtype)])
              for k, v in net.labels.items()
              if len(v) == net.n_vertices and k not in ("vertex_map", "edge_map")}
    if "vertex_map" in net.labels:
        base = np.asarray(net.labels["vertex_map"])[kv]
    else:
        base = kv
    labels["vertex_map"] = np.concatenate([base, np.asarray(pad, dtype=np.int64)])
    ke = np.asarray(keep_edges, dtype=np.int64)
    if "edge_map" in net.labels and len(net.labels["edge_map"]) == net.n_edges:
        labels["edge_map"] = np.asarray(net.labels["edge_map"])[ke]
    else:
        labels["edge_map"] = ke
    return PlaneNetwork(
        len(keep_vertices) + (1 if boundary else 0), tail, head,
        net.conductance[np.asarray(keep_edges, dtype=np.int64)], rotation,
        outer_dart=outer_dart, boundary_vertex=bnd, labels=labels,
        require_planar=require_planar,
    )


def _check_vertex_set(net: PlaneNetwork, vertices: Iterable[int]) -> list[int]:
    vs = sorted(set(int(v) for v in vertices))
    if not vs:
        raise GraphError("retained vertex set is empty")
    if vs[0] < 0 or vs[-1] >= net.n_vertices:
        raise GraphError("retained vertex out of range")
    inside = set(vs)
    sub_t, sub_h = [], []
    for u, v in net.edge_list():
        if u in inside and v in inside:
            sub_t.append(u)
            sub_h.append(v)
    idx = {v: i for i, v in enumerate(vs)}
    if not _connected(len(vs), np.array([idx[u] for u in sub_t], dtype=np.int64),
                      np.array([idx[v] for v in sub_h], dtype=np.int64)):
        raise GraphError("retained vertex set does not induce a connected subgraph")
    return vs


def induced_subnetwork(net: PlaneNetwork, vertices: Iterable[int]) -> PlaneNetwork:
    """Free truncation: the subnetwork induced by ``vertices``."""
    vs = _check_vertex_set(net, vertices)
    inside = set(vs)
    keep_edges = [e for e, (u, v) in enumerate(net.edge_list()) if u in inside and v in inside]
    return _relabel(net, vs, keep_edges)


def wired_truncation(net: PlaneNetwork, vertices: Iterable[int]) -> PlaneNetwork:
    """Glue everything outside ``vertices`` into one boundary vertex.

    Self-loops at the boundary are dropped and parallel edges to it are kept.
    ``labels['vertex_map']``/``labels['edge_map']`` give original ids.  When
    nothing lies outside, the network is returned relabelled but unwired.
    """
    vs = _check_vertex_set(net, vertices)
    inside = set(vs)
    if len(vs) == net.n_vertices:
        return _relabel(net, vs, list(range(net.n_edges)))
    keep_edges = [e for e, (u, v) in enumerate(net.edge_list()) if u in inside or v in inside]

    # Contract the outside: walk each outside component's darts in the order
    # given by merging rotations along a spanning forest (standard contraction).
    outside = [v for v in range(net.n_vertices) if v not in inside]
    rot = {v: list(net.rotation[v]) for v in outside}
    alive = set(outside)
    parent = {v: v for v in outside}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e, (u, v) in enumerate(net.edge_list()):
        if u in inside or v in inside:
            continue
        ru, rv = find(u), find(v)
        du, dv = 2 * e, 2 * e + 1
        if ru == rv:
            # loop after contraction: delete its darts
            rot[ru] = [d for d in rot[ru] if d not in (du, dv)]
            continue
        # splice: rot(ru) with du replaced by rot(rv) started after dv
        a, b = rot[ru], rot[rv]
        i, j = a.index(du), b.index(dv)
        rot[ru] = a[:i] + b[j + 1:] + b[:j] + a[i + 1:]
        parent[rv] = ru
        alive.discard(rv)
    extra: list[int] = []
    for r in sorted(alive):
        extra.extend(rot[r])
    return _relabel(net, vs, keep_edges, extra_rotation=extra, boundary=True,
                    require_planar=len(alive) == 1)


def subdivide_and_trim(net: PlaneNetwork) -> PlaneNetwork:
    """Split each edge into two edges of the same conductance, then drop peninsulas.

    On a finite map a peninsula is taken relative to the largest biconnected
    block (ties broken by smallest vertex id): every vertex cut off from that
    block by a single vertex is removed.  ``labels['origin_edge']`` records,
    for each output edge, the input edge it came from.
    """
    n, m = net.n_vertices, net.n_edges
    # new vertex n + e sits in the middle of edge e; half 2e touches the tail
    tail = np.empty(2 * m, dtype=np.int64)
    head = np.empty(2 * m, dtype=np.int64)
    tail[0::2] = net.tail
    head[0::2] = n + np.arange(m)
    tail[1::2] = n + np.arange(m)
    head[1::2] = net.head
    cond = np.repeat(net.conductance, 2)
    rotation: list[list[int]] = []
    for v in range(n):
        rot = []
        for d in net.rotation[v]:
            e = d >> 1
            # old dart from tail -> new dart 2*(2e) ; from head -> new dart 2*(2e+1)+1
            rot.append(4 * e if d % 2 == 0 else 2 * (2 * e + 1) + 1)
        rotation.append(rot)
    for e in range(m):
        rotation.append([4 * e + 1, 2 * (2 * e + 1)])
    outer_old = net.faces[net.outer_face][0]
    e0 = outer_old >> 1
    outer_new = 4 * e0 if outer_old % 2 == 0 else 2 * (2 * e0 + 1) + 1
    labels = {k: np.concatenate([v, np.full(m, -1, dtype=np.asarray(v).dtype)])
              for k, v in net.labels.items() if len(v) == n}
    sub = PlaneNetwork(n + m, tail, head, cond, rotation, outer_dart=outer_new, labels=labels)

    g = nx.Graph(sub.edge_list())
    blocks = [sorted(b) for b in nx.biconnected_components(g)]
    blocks.sort(key=lambda b: (-len(b), b[0]))
    core = blocks[0]
    if len(core) <= 2:
        raise PeninsulaError("every vertex is inside a peninsula (the network is a tree)")
    core_set = set(core)
    keep_edges = [e for e, (u, v) in enumerate(sub.edge_list()) if u in core_set and v in core_set]
    out = _relabel(sub, core, keep_edges)
    out.labels["origin_edge"] = out.labels["edge_map"] // 2
    return out


def star_triangulation(net: PlaneNetwork) -> tuple[PlaneNetwork, np.ndarray, bool]:
    """Add a vertex inside each face joined to every corner of that face.

    Returns ``(T, is_face_vertex, simple)``; face ``f`` becomes vertex
    ``V + f``.  ``simple`` reports whether ``T`` has no loops or multi-edges,
    which for simple peninsula-free input holds iff ``net`` is polyhedral.
    """
    n, m = net.n_vertices, net.n_edges
    # edges: original 0..m-1, then one spoke per dart (dart d -> edge m + d,
    # running from the face vertex to origin(d))
    n_darts = 2 * m
    tail = np.concatenate([net.tail, n + net.face_of_dart])
    head = np.concatenate([net.head, net.origin])
    cond = np.concatenate([net.conductance, np.ones(n_darts)])
    rotation: list[list[int]] = []
    for v in range(n):
        rot = []
        for d in net.rotation[v]:
            rot.append(d)
            # the spoke to the face on the left of d, pointing v -> face
            rot.append(2 * (m + d) + 1)
        rotation.append(rot)
    for f, face in enumerate(net.faces):
        # the face cycle already runs counterclockwise around the face vertex
        rotation.append([2 * (m + d) for d in face])
    tri = PlaneNetwork(n + net.n_faces, tail, head, cond, rotation,
                       outer_dart=net.faces[net.outer_face][0])
    is_face = np.zeros(n + net.n_faces, dtype=bool)
    is_face[n:] = True
    return tri, is_face, _is_simple(tri)


def geometry_bound(net: PlaneNetwork) -> GeometryBound:
    """Degree, codegree and conductance maxima.

    The outer face stands in for the rest of the infinite graph, so it is
    left out of the codegree maximum.
    """
    deg = net.degrees()
    inner = net.inner_vertices
    max_deg = int(deg[inner].max()) if len(inner) else 0
    codeg = [len(f) for i, f in enumerate(net.faces) if i != net.outer_face]
    return GeometryBound(
        max_degree=max_deg,
        max_codegree=int(max(codeg)) if codeg else 0,
        max_conductance=float(net.conductance.max()),
        max_resistance=float((1.0 / net.conductance).max()),
    )


# -- text format ---------------------------------------------------------

PLANENET_HEADER = "planenet v1"


def format_planenet(net: PlaneNetwork) -> str:
    lines = [PLANENET_HEADER]
    for v, rot in enumerate(net.rotation):
        darts = " ".join(f"{net.dart_head(d)}:{d >> 1}" for d in rot)
        lines.append(f"v {v} {darts}".rstrip())
    for e in range(net.n_edges):
        lines.append(f"e {e} {float(net.conductance[e])!r}")
    d = net.faces[net.outer_face][0]
    lines.append(f"outer {int(net.origin[d])} {d >> 1}")
    if net.boundary_vertex is not None:
        lines.append(f"boundary {net.boundary_vertex}")
    for key in sorted(net.labels):
        arr = np.asarray(net.labels[key])
        if arr.ndim == 1 and arr.dtype.kind in "iu" and len(arr) == net.n_vertices:
            lines.append(f"label {key} " + " ".join(str(int(x)) for x in arr))
    return "\n".join(lines) + "\n"


def parse_planenet(text: str, source: str = "<string>") -> PlaneNetwork:
    """Parse the ``planenet v1`` format; errors carry ``source:line:col``."""
    rows = text.splitlines()
    if not rows or rows[0].strip() != PLANENET_HEADER:
        raise GraphError(f"{source}:1:1: expected header {PLANENET_HEADER!r}")
    rotation: dict[int, list[tuple[int, int]]] = {}
    cond: dict[int, float] = {}
    outer = None
    boundary = None
    labels: dict[str, np.ndarray] = {}
    for lineno, raw in enumerate(rows[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "v":
                v = int(parts[1])
                darts = []
                for tok in parts[2:]:
                    w, e = tok.split(":")
                    darts.append((int(w), int(e)))
                rotation[v] = darts
            elif kind == "e":
                cond[int(parts[1])] = float(parts[2])
            elif kind == "outer":
                outer = (int(parts[1]), int(parts[2]))
            elif kind == "boundary":
                boundary = int(parts[1])
            elif kind == "label":
                labels[parts[1]] = np.array([int(x) for x in parts[2:]], dtype=np.int64)
            else:
                raise ValueError(f"unknown record type {kind!r}")
        except (ValueError, IndexError) as exc:
            col = raw.find(kind) + 1
            raise GraphError(f"{source}:{lineno}:{col}: {exc}") from None
    n = len(rotation)
    if sorted(rotation) != list(range(n)):
        raise GraphError(f"{source}: vertex ids must be dense 0..V-1")
    try:
        return build_from_rotation_system(
            [rotation[v] for v in range(n)], cond, outer=outer,
            boundary_vertex=boundary, labels=labels, require_planar=boundary is None,
        )
    except GraphError as exc:
        raise GraphError(f"{source}: {exc}") from None


def write_planenet(net: PlaneNetwork, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_planenet(net))


def read_planenet(path) -> PlaneNetwork:
    with open(path) as fh:
        return parse_planenet(fh.read(), source=str(path))
