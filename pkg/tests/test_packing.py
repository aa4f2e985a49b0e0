import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from usflab.generators import (
    TessellationSpec,
    cube,
    grid_ball,
    octahedron,
    tessellation_ball,
    tetrahedron,
    tube,
)
from usflab.graph import GraphError
from usflab.packing import (
    PackingError,
    format_dcp,
    hyperbolic_area,
    hyperbolic_diam,
    hyperbolic_distance,
    hyperbolic_radius,
    hyperbolic_stats,
    mobius_normalize,
    packable,
    parse_dcp,
    render_svg,
    ring_audit,
    solve_double_packing,
)

SQ = 3 + 2 * math.sqrt(2)


def oracle_residuals(p, net):
    """Relative tangency and orthogonality errors computed from scratch."""
    zc, r = p.vertex_centre, p.vertex_radius
    tang = 0.0
    for u, v in net.edge_list():
        d = abs(zc[u] - zc[v])
        tang = max(tang, abs(d - r[u] - r[v]) / (r[u] + r[v]))
    orth = 0.0
    for f, cyc in enumerate(net.faces):
        if f == p.outer_face:
            continue
        zf, rf = p.face_centre[f], p.face_radius[f]
        for d in cyc:
            v = int(net.origin[d])
            lhs = abs(zc[v] - zf) ** 2
            rhs = r[v] ** 2 + rf ** 2
            orth = max(orth, abs(lhs - rhs) / rhs)
    return tang, orth


@pytest.fixture(scope="module")
def disc37():
    net = tessellation_ball(TessellationSpec(3, 7, 5))
    return net, solve_double_packing(net, "disc")


@pytest.mark.parametrize("make", [tetrahedron, cube, octahedron, lambda: grid_ball(4)])
def test_euclidean_packings_satisfy_invariants(make):
    net = make()
    p = solve_double_packing(net, "euclidean")
    tang, orth = oracle_residuals(p, net)
    assert tang < 1e-8 and orth < 1e-8
    assert p.residuals.ok(1e-8)


def test_disc_packing_37(disc37):
    net, p = disc37
    tang, orth = oracle_residuals(p, net)
    assert tang < 1e-8 and orth < 1e-8
    assert np.all(np.abs(p.vertex_centre) + p.vertex_radius <= 1 + 1e-9)
    outer = net.outer_vertices()
    assert np.all(p.horocycle[outer])
    assert np.allclose(np.abs(p.vertex_centre[outer]) + p.vertex_radius[outer], 1.0)


def test_disc_packing_45():
    net = tessellation_ball(TessellationSpec(4, 5, 4))
    p = solve_double_packing(net, "disc")
    assert max(oracle_residuals(p, net)) < 1e-8


def test_sweep_method_agrees_with_newton():
    net = tessellation_ball(TessellationSpec(3, 7, 3))
    a = solve_double_packing(net, "disc", method="newton")
    b = solve_double_packing(net, "disc", method="sweep", tol=1e-12)
    assert np.allclose(a.vertex_radius, b.vertex_radius, atol=1e-8)


def test_tube_radius_ratio():
    net = tube(20, 0.7)
    p = solve_double_packing(net, "euclidean")
    ring = net.labels["ring"]
    for i in range(6, 15):
        ratio = p.vertex_radius[ring == i + 1] / p.vertex_radius[ring == i]
        assert np.allclose(ratio, SQ, rtol=1e-6)


def test_not_packable_inputs():
    from conftest import bowtie, parallel_edges
    ok, _ = packable(parallel_edges(3))
    assert not ok
    with pytest.raises(PackingError):
        solve_double_packing(parallel_edges(3))
    with pytest.raises(PackingError):
        solve_double_packing(bowtie(), require="polyhedral")
    with pytest.raises(PackingError):
        solve_double_packing(tetrahedron(), model="sphere")


# -- normalisation ------------------------------------------------------------


def test_normalize_defining_property(disc37):
    net, p = disc37
    x, y = 0, net.neighbors(0)[2]
    q = mobius_normalize(p, x, y)
    assert abs(q.tangency_point(x, y)) < 1e-12
    assert abs(q.vertex_centre[x].imag) < 1e-12 and abs(q.vertex_centre[y].imag) < 1e-12
    assert q.vertex_centre[x].real < 0 < q.vertex_centre[y].real
    assert max(oracle_residuals(q, net)) < 1e-8


def test_normalize_is_idempotent_and_isometric(disc37):
    net, p = disc37
    x, y = 0, net.neighbors(0)[0]
    q = mobius_normalize(p, x, y)
    qq = mobius_normalize(q, x, y)
    assert np.allclose(q.vertex_centre, qq.vertex_centre, atol=1e-12)
    assert np.allclose(q.vertex_radius, qq.vertex_radius, atol=1e-12)
    inner = ~p.horocycle
    rp = hyperbolic_radius(p.vertex_centre[inner], p.vertex_radius[inner])
    rq = hyperbolic_radius(q.vertex_centre[inner], q.vertex_radius[inner])
    assert np.allclose(rp, rq, atol=1e-9)
    A = np.flatnonzero(net.labels["layer"] <= 3)
    assert hyperbolic_diam(p, A) == pytest.approx(hyperbolic_diam(q, A), abs=1e-9)


def test_normalize_euclidean_scales():
    net = cube()
    q = mobius_normalize(solve_double_packing(net, "euclidean"), 0, 1)
    assert abs(q.vertex_centre[1] - q.vertex_centre[0]) == pytest.approx(1.0)
    assert abs(q.tangency_point(0, 1)) < 1e-12


def test_normalize_rejects_non_edge():
    with pytest.raises(PackingError):
        mobius_normalize(solve_double_packing(cube(), "euclidean"), 0, 6)


# -- hyperbolic measurements --------------------------------------------------


def test_hyperbolic_radius_examples():
    assert hyperbolic_radius(0, 0.5) == pytest.approx(math.log(3))
    assert hyperbolic_radius(0.3, 1e-9) == pytest.approx(0.0, abs=1e-8)
    assert hyperbolic_radius(0.5, 0.5) == math.inf


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 0.8), st.floats(0.01, 0.19), st.floats(0, 2 * math.pi))
def test_hyperbolic_radius_rotation_invariant(rho, r, theta):
    a = hyperbolic_radius(rho, r)
    b = hyperbolic_radius(rho * np.exp(1j * theta), r)
    assert a == pytest.approx(b, rel=1e-12)


def _area_quadrature(z0, r):
    # integrate 4 / (1 - |z|^2)^2 over the Euclidean disc (z0, r)
    def f(s, t):
        z = z0 + s * np.exp(1j * t)
        return 4.0 * s / (1.0 - abs(z) ** 2) ** 2
    val, _ = integrate.dblquad(f, 0, 2 * math.pi, 0, r, epsabs=1e-11, epsrel=1e-11)
    return val


def test_singleton_area_matches_quadrature(disc37):
    net, p = disc37
    stats = hyperbolic_stats(p)
    for v in (0, 10, int(np.flatnonzero(net.labels["layer"] == 3)[0])):
        q = _area_quadrature(p.vertex_centre[v], p.vertex_radius[v])
        assert hyperbolic_area(p, [v], stats) == pytest.approx(q, rel=1e-6)
        assert stats.area[v] == pytest.approx(4 * math.pi * math.sinh(stats.radius[v] / 2) ** 2)


def test_area_monotone_and_empty(disc37):
    net, p = disc37
    assert hyperbolic_area(p, []) == 0.0
    assert hyperbolic_area(p, [0, 1]) <= hyperbolic_area(p, [0, 1, 2])


def test_diameter_examples(disc37):
    net, p = disc37
    assert hyperbolic_diam(p, [3]) == 0.0
    t = 0.4
    assert hyperbolic_distance(-t, t) == pytest.approx(2 * hyperbolic_distance(0, t))


def test_hull_diameter_matches_brute_force(disc37):
    net, p = disc37
    A = np.flatnonzero(net.labels["layer"] <= 4)
    assert hyperbolic_diam(p, A, brute_limit=10) == pytest.approx(
        hyperbolic_diam(p, A, brute_limit=10**9), rel=1e-12)


# -- ring audit ------------------------------------------------------------------


def test_ring_audit_finite_and_stable():
    a = ring_audit(solve_double_packing(tetrahedron(), "euclidean"), exclude=0)
    assert np.isfinite(a.max_vertex_face) and np.isfinite(a.max_vertex_vertex)
    r4 = ring_audit(solve_double_packing(tessellation_ball(TessellationSpec(3, 7, 4)), "disc"), exclude=2)
    r6 = ring_audit(solve_double_packing(tessellation_ball(TessellationSpec(3, 7, 6)), "disc"), exclude=2)
    assert r6.max_vertex_face == pytest.approx(r4.max_vertex_face, rel=0.2)


def test_tube_vertex_face_ratio_constant():
    net = tube(20, 1.0)
    p = solve_double_packing(net, "euclidean")
    ring = net.labels["ring"]
    ratios = []
    for i in range(3, 16):
        v = int(np.flatnonzero(ring == i)[0])
        fs = [f for f, cyc in enumerate(net.faces) if f != p.outer_face
              and v in [int(net.origin[d]) for d in cyc]]
        ratios.append(max(p.vertex_radius[v] / p.face_radius[f] for f in fs))
    assert np.ptp(ratios) / np.mean(ratios) < 0.01


# -- output formats -----------------------------------------------------------------


def test_svg_is_well_formed(disc37):
    net, p = disc37
    root = ET.fromstring(render_svg(p).split("?>", 1)[1])
    ns = "{http://www.w3.org/2000/svg}"
    forest = root.find(f"{ns}g[@class='forest']")
    assert forest is not None and len(list(forest)) == 0
    svg = render_svg(p, forest_edges=[0, 1, 2, 5], highlight=[0])
    root = ET.fromstring(svg.split("?>", 1)[1])
    forest = root.find(f"{ns}g[@class='forest']")
    assert len(list(forest)) == 4 and forest.get("data-edges") == "4"


def test_dcp_round_trip(disc37):
    net, p = disc37
    text = format_dcp(p)
    back = parse_dcp(text)
    assert format_dcp(back) == text
    assert np.array_equal(back.vertex_radius, p.vertex_radius)


def test_dcp_errors_report_position():
    with pytest.raises(GraphError, match=r"x:1:1"):
        parse_dcp("nope\n", source="x")
    with pytest.raises(GraphError, match=r"x:3:"):
        parse_dcp("dcp v1\nmodel disc\nv 0 a 0 1\n", source="x")


@pytest.mark.parametrize("z,r", [(0.1, 0.5), (-0.2j, 0.3), (0.0, 0.4), (0.5, 0.2)])
def test_hyperbolic_centre_is_equidistant_from_the_rim(z, r):
    from usflab.packing import hyperbolic_centre
    c = hyperbolic_centre(z, r)
    u = z / abs(z) if z != 0 else 1.0
    near, far = z - r * u, z + r * u
    assert hyperbolic_distance(c, near) == pytest.approx(hyperbolic_distance(c, far), rel=1e-10)
    assert hyperbolic_distance(c, near) == pytest.approx(hyperbolic_radius(z, r), rel=1e-10)
