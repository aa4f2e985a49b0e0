import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import bowtie, parallel_edges, path_graph
from usflab.generators import (
    TessellationSpec,
    cube,
    cycle,
    grid_ball,
    octahedron,
    tessellation_ball,
    tetrahedron,
    tube,
)
from usflab.graph import (
    GraphError,
    build_from_rotation_system,
    dual,
    format_planenet,
    geometry_bound,
    induced_subnetwork,
    is_polyhedral,
    is_polyhedral_bruteforce,
    maps_isomorphic,
    parse_planenet,
    star_triangulation,
    subdivide_and_trim,
    wired_truncation,
)


def same_map(a, b):
    """Isomorphic underlying graphs with the same face-length multiset."""
    return (nx.is_isomorphic(nx.Graph(a.to_networkx()), nx.Graph(b.to_networkx()))
            and a.n_edges == b.n_edges
            and sorted(map(len, a.faces)) == sorted(map(len, b.faces)))


def euler(net):
    return net.n_vertices - net.n_edges + net.n_faces


@pytest.mark.parametrize("net,counts", [
    (cycle(4), (4, 4, 2)),
    (grid_ball(3), (9, 12, 5)),
    (tetrahedron(), (4, 6, 4)),
])
def test_counts(net, counts):
    assert (net.n_vertices, net.n_edges, net.n_faces) == counts
    assert euler(net) == 2


def test_dual_of_tetrahedron_is_tetrahedron():
    assert same_map(dual(tetrahedron()), tetrahedron())


def test_dual_of_cube_is_octahedron():
    assert same_map(dual(cube()), octahedron())
    assert not same_map(cube(), octahedron())


def test_dual_of_cycle_is_dumbbell():
    d = dual(cycle(4))
    assert d.n_vertices == 2 and d.n_edges == 4
    assert set(map(frozenset, d.edge_list())) == {frozenset({0, 1})}


def test_dual_conductance_is_reciprocal():
    net = grid_ball(3).with_conductance(np.arange(1, 13, dtype=float))
    assert np.allclose(dual(net).conductance * net.conductance, 1.0)


def test_double_dual_returns_original_map():
    net = tessellation_ball(TessellationSpec(3, 7, 2))
    assert maps_isomorphic(dual(dual(net)), net)


@pytest.mark.parametrize("net,expected", [
    (tetrahedron(), True), (cube(), True), (octahedron(), True),
    (cycle(4), False), (bowtie(), False), (grid_ball(3), False),
])
def test_is_polyhedral(net, expected):
    assert is_polyhedral(net) is expected
    assert is_polyhedral_bruteforce(net) is expected


def test_wired_truncation_of_path():
    w = wired_truncation(path_graph(2), [1])
    assert w.n_vertices == 2 and w.n_edges == 2
    assert w.boundary_vertex == 1
    assert sorted(w.degrees().tolist()) == [2, 2]


def test_wired_truncation_of_grid_centre():
    w = wired_truncation(grid_ball(3), [4])
    assert w.n_vertices == 2 and w.n_edges == 4
    assert w.degree(w.boundary_vertex) == 4


def test_maps_isomorphic_keeps_edge_ids():
    net = grid_ball(3)
    assert maps_isomorphic(net, parse_planenet(format_planenet(net)))
    assert not maps_isomorphic(cube(), octahedron())


def test_wired_truncation_keeping_everything_is_identity():
    net = grid_ball(3)
    w = wired_truncation(net, range(9))
    assert w.boundary_vertex is None
    assert maps_isomorphic(w, net)


def test_wired_truncation_labels_map_back():
    net = tessellation_ball(TessellationSpec(3, 7, 3))
    keep = np.flatnonzero(net.labels["layer"] <= 2)
    w = wired_truncation(net, keep)
    vm = w.labels["vertex_map"]
    assert sorted(vm[vm >= 0].tolist()) == keep.tolist()
    assert vm[w.boundary_vertex] == -1


def test_induced_subnetwork_of_grid():
    sub = induced_subnetwork(grid_ball(3), [0, 1, 3, 4])
    assert (sub.n_vertices, sub.n_edges) == (4, 4)


def test_subdivide_triangle_gives_hexagon():
    s = subdivide_and_trim(cycle(3).with_conductance([1.0, 2.0, 3.0]))
    assert (s.n_vertices, s.n_edges) == (6, 6)
    assert np.all(s.degrees() == 2)
    # each original edge contributes two halves with its conductance
    origin = s.labels["origin_edge"]
    for e in range(3):
        assert np.all(s.conductance[origin == e] == e + 1.0)


def test_subdivide_double_edge_gives_square():
    s = subdivide_and_trim(parallel_edges(2))
    assert (s.n_vertices, s.n_edges) == (4, 4)
    assert same_map(s, cycle(4))


def test_subdivide_trims_pendant_path():
    t = tetrahedron()
    rot = [[(w, e) for w, e in ((t.dart_head(d), d >> 1) for d in r)] for r in t.rotation]
    # hang 4 - 5 off vertex 0
    rot[0].append((4, 6))
    rot.append([(0, 6), (5, 7)])
    rot.append([(4, 7)])
    net = build_from_rotation_system(rot)
    s = subdivide_and_trim(net)
    assert (s.n_vertices, s.n_edges) == (4 + 6, 12)


@pytest.mark.parametrize("net,nv", [(tetrahedron(), 8), (cube(), 14)])
def test_star_triangulation(net, nv):
    t, is_face, simple = star_triangulation(net)
    assert t.n_vertices == nv
    assert is_face.sum() == net.n_faces
    assert all(len(f) == 3 for f in t.faces)
    assert simple


def test_star_triangulation_of_square_is_octahedron():
    # the 4-cycle is not 3-connected, yet its star triangulation is simple
    t, _, simple = star_triangulation(cycle(4))
    assert simple and same_map(t, octahedron())


def test_star_triangulation_of_bowtie_not_simple():
    _, _, simple = star_triangulation(bowtie())
    assert not simple


def test_geometry_bounds():
    gb = geometry_bound(tetrahedron())
    assert (gb.max_degree, gb.max_codegree, gb.combined_M) == (3, 3, 3.0)
    gb = geometry_bound(tessellation_ball(TessellationSpec(3, 7, 3)))
    assert (gb.max_degree, gb.max_codegree) == (7, 3)
    gb = geometry_bound(tube(5, 4.0))
    assert gb.max_conductance == 4.0 and gb.max_resistance == 1.0


def test_rotation_system_rejects_bad_edges():
    with pytest.raises(GraphError):
        build_from_rotation_system([[(1, 0)], [(0, 1)]])
    with pytest.raises(GraphError):
        build_from_rotation_system([[(1, 0)], [(0, 0)]], [0.0])


def test_rotation_system_rejects_nonplanar():
    # K4 with a rotation whose faces give V - E + F != 2
    rot = [[(1, 0), (2, 1), (3, 2)], [(0, 0), (2, 3), (3, 4)],
           [(0, 1), (1, 3), (3, 5)], [(0, 2), (1, 4), (2, 5)]]
    with pytest.raises(GraphError):
        build_from_rotation_system(rot)


@pytest.mark.parametrize("net", [
    grid_ball(4), tube(4, 0.5), tessellation_ball(TessellationSpec(4, 5, 2)),
    wired_truncation(grid_ball(5), [6, 7, 8, 11, 12, 13, 16, 17, 18]),
])
def test_planenet_round_trip(net):
    text = format_planenet(net)
    back = parse_planenet(text)
    assert format_planenet(back) == text
    assert maps_isomorphic(back, net)


def test_parse_reports_line_and_column():
    with pytest.raises(GraphError, match=r"src:3:1"):
        parse_planenet("planenet v1\nv 0 1:0\nz 1\n", source="src")
    with pytest.raises(GraphError, match=r":1:1"):
        parse_planenet("graph\n")


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 7), st.integers(2, 7))
def test_grid_euler_and_dual_degree(n, _):
    net = grid_ball(n)
    assert euler(net) == 2
    d = dual(net)
    assert d.n_vertices == net.n_faces and d.n_edges == net.n_edges
    # face lengths of the primal are the degrees of the dual
    assert sorted(len(f) for f in net.faces) == sorted(d.degrees().tolist())
