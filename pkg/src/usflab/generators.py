"""Finite plane networks for the example families: tessellation balls, tubes, grids."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .graph import GraphError, PlaneNetwork, from_faces

__all__ = [
    "TessellationSpec",
    "tessellation_ball",
    "layered_triangulation",
    "grow_ball",
    "tube",
    "grid_ball",
    "tetrahedron",
    "cube",
    "octahedron",
    "cycle",
    "DEFAULT_VERTEX_CAP",
]

DEFAULT_VERTEX_CAP = 2_000_000


@dataclass(frozen=True)
class TessellationSpec:
    p: int
    q: int
    depth: int

    def __post_init__(self):
        if self.p < 3 or self.q < 3:
            raise ValueError("p and q must be at least 3")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")

    @property
    def hyperbolic(self) -> bool:
        return (self.p - 2) * (self.q - 2) > 4


def grow_ball(
    p: int,
    target_degree: Callable[[int], int],
    depth: int,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
) -> PlaneNetwork:
    """Grow a ball of p-gons layer by layer around vertex 0.

    Round ``k`` completes every vertex of layer ``k`` to degree
    ``target_degree(k)`` by gluing p-gons onto the frontier, which is kept as a
    counterclockwise cyclic word.  After ``depth`` rounds, layers ``< depth``
    are complete and layer ``depth`` forms the outer boundary.
    ``labels['layer']`` holds the layer of each vertex.
    """
    faces: list[tuple[int, ...]] = []
    layer = [0]
    degree = [0]
    frontier = [0]
    n = 1

    for rnd in range(depth):
        q = target_degree(rnd)
        closed = len(frontier) > 1
        # spokes in cyclic order: (frontier index, vertex)
        spokes: list[int] = []
        spoke_pos: list[int] = []
        for i, v in enumerate(frontier):
            k = q - degree[v] if closed else q
            if k < 0:
                raise GraphError(f"vertex {v} already exceeds degree {q}")
            spokes.extend([v] * k)
            spoke_pos.extend([i] * k)
        if not spokes:
            raise GraphError("frontier has no free slots; cannot grow")
        m = len(spokes)
        nf = len(frontier)
        if closed and m == 1:
            raise GraphError("frontier has a single free slot; cannot grow")
        gaps = []
        for a in range(m):
            b = (a + 1) % m
            L = (spoke_pos[b] - spoke_pos[a]) % nf if closed else 0
            ell = p - 2 - L
            if ell < 0:
                raise GraphError("frontier gap too long for the face size")
            gaps.append((L, ell))

        # union spoke endpoints across zero-length gaps
        parent = list(range(m))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, (L, ell) in enumerate(gaps):
            if ell == 0:
                parent[find((a + 1) % m)] = find(a)
        end_id: dict[int, int] = {}
        endpoint = []
        new_frontier: list[int] = []
        for a in range(m):
            r = find(a)
            if r not in end_id:
                end_id[r] = n
                layer.append(rnd + 1)
                degree.append(0)
                n += 1
            endpoint.append(end_id[r])
        if n > vertex_cap:
            raise GraphError(f"vertex count exceeds cap {vertex_cap}")

        for a in range(m):
            v, x = spokes[a], endpoint[a]
            degree[v] += 1
            degree[x] += 1
        for a, (L, ell) in enumerate(gaps):
            b = (a + 1) % m
            va, vb = spokes[a], spokes[b]
            xa, xb = endpoint[a], endpoint[b]
            inter = []
            for _ in range(max(ell - 1, 0)):
                inter.append(n)
                layer.append(rnd + 1)
                degree.append(0)
                n += 1
            if n > vertex_cap:
                raise GraphError(f"vertex count exceeds cap {vertex_cap}")
            path = [xa] + inter + ([xb] if ell > 0 else [])
            for s, t in zip(path, path[1:]):
                degree[s] += 1
                degree[t] += 1
            back = []
            if L:
                ia = spoke_pos[a]
                back = [frontier[(ia + j) % nf] for j in range(L - 1, 0, -1)]
            face = [va] + path + ([vb] if L else []) + back
            faces.append(tuple(face))
            if not new_frontier or new_frontier[-1] != xa:
                new_frontier.append(xa)
            new_frontier.extend(inter)
        if len(new_frontier) > 1 and new_frontier[0] == new_frontier[-1]:
            new_frontier.pop()
        frontier = new_frontier

    labels = {"layer": np.asarray(layer, dtype=np.int64)}
    return from_faces(n, faces, labels=labels)


def tessellation_ball(spec: TessellationSpec, vertex_cap: int = DEFAULT_VERTEX_CAP) -> PlaneNetwork:
    """Combinatorial ball of the {p,q} tessellation around vertex 0."""
    return grow_ball(spec.p, lambda k: spec.q, spec.depth, vertex_cap=vertex_cap)


def layered_triangulation(
    band_lengths: Sequence[int], depth: int, vertex_cap: int = DEFAULT_VERTEX_CAP
) -> PlaneNetwork:
    """Triangulated ball alternating rings of degree-7 and bands of degree-6 vertices.

    Layer 0 has degree 7; then for each band length ``b`` the schedule adds
    ``b`` layers of degree 6 followed by one layer of degree 7.  Layers
    beyond the schedule have degree 7.
    """
    if any(b < 0 for b in band_lengths):
        raise ValueError("band lengths must be non-negative")
    schedule = [7]
    for b in band_lengths:
        schedule.extend([6] * int(b))
        schedule.append(7)

    def target(k):
        return schedule[k] if k < len(schedule) else 7

    net = grow_ball(3, target, depth, vertex_cap=vertex_cap)
    net.labels["target_degree"] = np.array(
        [target(int(k)) for k in net.labels["layer"]], dtype=np.int64
    )
    return net


def tube(n_rings: int, c: float) -> PlaneNetwork:
    """Nested 4-cycles ``(i, j)``, ``0 <= i < n_rings``, ``j`` mod 4.

    Vertex ``(i, j)`` has id ``4 i + j``.  Radial edges have conductance 1
    and ring edges conductance ``c``.  Ring 0 bounds an inner face; the outer
    face lies beyond the last ring.
    """
    if n_rings < 2:
        raise ValueError("n_rings must be at least 2")
    if not c > 0:
        raise ValueError("c must be positive")

    def vid(i, j):
        return 4 * i + (j % 4)

    faces = [tuple(vid(0, j) for j in range(4))]
    for i in range(n_rings - 1):
        for j in range(4):
            faces.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    cond = {}
    for i in range(n_rings):
        for j in range(4):
            cond[frozenset((vid(i, j), vid(i, j + 1)))] = float(c)
    ring = np.repeat(np.arange(n_rings), 4)
    col = np.tile(np.arange(4), n_rings)
    return from_faces(4 * n_rings, faces, conductance=cond,
                      labels={"layer": ring, "ring": ring, "column": col})


def grid_ball(n: int) -> PlaneNetwork:
    """n x n piece of Z^2 with unit conductances; vertex ``(i, j)`` has id ``n i + j``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    faces = []
    for i in range(n - 1):
        for j in range(n - 1):
            a = n * i + j
            faces.append((a, a + n, a + n + 1, a + 1))
    ii, jj = np.divmod(np.arange(n * n), n)
    # distance to the outer boundary, so layer 0 is the centre-most ring
    depth_in = np.minimum(np.minimum(ii, jj), np.minimum(n - 1 - ii, n - 1 - jj))
    layer = depth_in.max() - depth_in
    return from_faces(n * n, faces, labels={"layer": layer.astype(np.int64)})


def cycle(n: int) -> PlaneNetwork:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return from_faces(n, [tuple(range(n))])


def tetrahedron() -> PlaneNetwork:
    # outer face (0, 2, 1) when drawn with 3 in the middle
    return from_faces(4, [(0, 1, 3), (1, 2, 3), (2, 0, 3)],
                      labels={"layer": np.array([1, 1, 1, 0])})


def cube() -> PlaneNetwork:
    # inner square 4..7 inside outer square 0..3
    faces = [(4, 5, 6, 7)]
    for j in range(4):
        k = (j + 1) % 4
        faces.append((j, k, 4 + k, 4 + j))
    return from_faces(8, faces, labels={"layer": np.array([1] * 4 + [0] * 4)})


def octahedron() -> PlaneNetwork:
    # outer triangle 0,1,2; inner triangle 3,4,5
    faces = [(3, 4, 5), (0, 1, 4), (1, 2, 5), (2, 0, 3),
             (0, 4, 3), (1, 5, 4), (2, 3, 5)]
    return from_faces(6, faces, labels={"layer": np.array([1, 1, 1, 0, 0, 0])})
