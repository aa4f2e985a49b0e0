import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import parallel_edges, path_graph
from usflab.electrical import (
    ElectricalError,
    ResistanceQuery,
    effective_conductance,
    effective_resistance,
    escape_probability,
    hitting_probability,
    kirchhoff_marginal,
    kirchhoff_marginals,
    laplacian,
    wired_free_gap,
)
from usflab.forest import enumerate_trees
from usflab.generators import TessellationSpec, cycle, grid_ball, tessellation_ball, tube
from usflab.graph import build_from_rotation_system, wired_truncation


def pinv_resistance(net, a, b):
    """Dense pseudo-inverse oracle."""
    L = laplacian(net).toarray()
    x = np.zeros(net.n_vertices)
    x[a], x[b] = 1.0, -1.0
    return float(x @ np.linalg.pinv(L) @ x)


def test_series_parallel_and_triangle():
    assert effective_resistance(path_graph(3), ResistanceQuery([0], [3])) == pytest.approx(3.0)
    assert effective_resistance(parallel_edges(2), ResistanceQuery([0], [1])) == pytest.approx(0.5)
    assert effective_resistance(cycle(3), ResistanceQuery([0], [1])) == pytest.approx(2 / 3)


def test_laplacian_rows_sum_to_zero():
    L = laplacian(grid_ball(4).with_conductance(np.linspace(0.5, 3, 24)))
    assert np.allclose(np.asarray(L.sum(axis=1)).ravel(), 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.data())
def test_resistance_matches_pseudo_inverse(n, data):
    net = grid_ball(n)
    cond = data.draw(st.lists(st.floats(0.1, 10.0), min_size=net.n_edges, max_size=net.n_edges))
    net = net.with_conductance(cond)
    a = data.draw(st.integers(0, net.n_vertices - 1))
    b = data.draw(st.integers(0, net.n_vertices - 1).filter(lambda v: v != a))
    r = effective_resistance(net, ResistanceQuery([a], [b]))
    assert r == pytest.approx(pinv_resistance(net, a, b), rel=1e-9)
    assert effective_conductance(net, ResistanceQuery([a], [b])) == pytest.approx(1 / r, rel=1e-12)


def test_gamblers_ruin():
    n = 10
    net = path_graph(n)
    for i in range(n + 1):
        assert hitting_probability(net, i, [0], [n]) == pytest.approx(1 - i / n, abs=1e-12)


def test_hitting_neighbour_of_target_only():
    assert hitting_probability(path_graph(1), 1, [0]) == 1.0


@pytest.mark.parametrize("c", [0.25, 1.0, 4.0])
def test_tube_hitting_closed_form(c):
    net = tube(60, c)
    a = 1 + c - math.sqrt(c * c + 2 * c)
    absorbing = [v for v in range(net.n_vertices) if v % 4 != 0]
    for i in range(1, 11):
        p = hitting_probability(net, 4 * i, [0], absorbing)
        assert abs(p - a ** i) < 1e-8


def test_escape_probabilities():
    # single vertex with k parallel edges to the boundary
    w = wired_truncation(path_graph(2), [1])
    assert escape_probability(w, 0) == pytest.approx(1.0)
    # v - u - boundary
    w = wired_truncation(path_graph(3), [1, 2])
    v = int(np.flatnonzero(w.labels["vertex_map"] == 1)[0])
    u = int(np.flatnonzero(w.labels["vertex_map"] == 2)[0])
    # vertex 1 touches the boundary (via 0) and 2; vertex 2 touches 1 and the boundary (via 3)
    assert 0 < escape_probability(w, v) <= 1
    assert escape_probability(w, u) == pytest.approx(escape_probability(w, v))


def test_escape_probability_two_state_chain():
    # v - u - boundary with v a leaf
    rot = [[(1, 0)], [(0, 0), (2, 1)], [(1, 1)]]
    net = build_from_rotation_system(rot, boundary_vertex=2, require_planar=False)
    assert escape_probability(net, 0) == pytest.approx(0.5)


def test_kirchhoff_examples():
    assert kirchhoff_marginal(path_graph(3), 1) == pytest.approx(1.0)
    for n in (3, 5, 8):
        assert np.allclose(kirchhoff_marginals(cycle(n)), (n - 1) / n)
    tri = cycle(3).with_conductance([1.0, 1.0, 2.0])
    assert kirchhoff_marginal(tri, 2) == pytest.approx(0.8)


@pytest.mark.parametrize("net", [
    grid_ball(3), cycle(5).with_conductance([1, 2, 3, 4, 5]),
    wired_truncation(grid_ball(4), [5, 6, 9, 10]),
])
def test_kirchhoff_matches_enumeration(net):
    exact = enumerate_trees(net).edge_marginals(net.n_edges)
    assert np.allclose(kirchhoff_marginals(net), exact, atol=1e-12)


def test_query_validation():
    with pytest.raises(ElectricalError):
        ResistanceQuery([0], [0])
    with pytest.raises(ElectricalError):
        ResistanceQuery([], [1])
    with pytest.raises(ElectricalError):
        effective_resistance(grid_ball(3), ResistanceQuery([0], [1], "wired"))


def test_wired_free_gap_grid_converges():
    net = grid_ball(13)
    centre = 6 * 13 + 6
    i, j = np.divmod(np.arange(net.n_vertices), 13)
    dist = np.maximum(abs(i - 6), abs(j - 6))
    rows = wired_free_gap(net, [np.flatnonzero(dist <= d) for d in range(1, 6)],
                          [centre], [centre + 1], depths=range(1, 6))
    gaps = [r.r_free - r.r_wired for r in rows]
    assert all(g >= -1e-12 for g in gaps)
    assert gaps[-1] < gaps[0] / 3


def test_wired_free_gap_hyperbolic_persists():
    net = tessellation_ball(TessellationSpec(3, 7, 7))
    layer = net.labels["layer"]
    A = [int(np.flatnonzero(layer == 2)[0])]
    B = [int(np.flatnonzero(layer == 2)[-1])]
    rows = wired_free_gap(net, [np.flatnonzero(layer <= d) for d in range(2, 7)], A, B,
                          depths=range(2, 7))
    gaps = [r.r_free - r.r_wired for r in rows]
    # the gap settles at a positive value instead of closing
    assert gaps[-1] > 0.04
    assert gaps[-2] - gaps[-1] < 0.1 * gaps[-1]
    for r in rows:
        assert r.r_wired <= r.triangle_bound


def test_wired_equals_plain_when_nothing_is_cut():
    net = grid_ball(3)
    rows = wired_free_gap(net, [range(9)], [0], [8])
    assert rows[0].r_free == pytest.approx(rows[0].r_wired)
