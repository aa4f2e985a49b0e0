"""Double circle packings of finite plane networks.

Every vertex ``v`` gets a primal circle and every bounded face ``f`` a dual
circle.  Circles of adjacent vertices are tangent, circles of adjacent faces
are tangent, and a vertex circle crosses the circle of each incident face at
a right angle.  The outer face gets no circle.

Radii are found on the "kite" decomposition: the centres of ``v`` and ``f``
together with the two tangency points on the edges of ``f`` at ``v`` form a
kite made of two right triangles with legs ``r(v)`` and ``r(f)``.  Angle
sums around every free circle must equal ``2 pi``.

Two boundary laws are supported.

``euclidean``
    vertices on the outer face have pinned radii (1 unless given).
``disc``
    vertices on the outer face become horocycles (maximal packing in the
    unit disc); radii are hyperbolic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import GraphError, PlaneNetwork, is_polyhedral

__all__ = [
    "PackingError",
    "NotConverged",
    "Residuals",
    "DoublePacking",
    "HyperbolicStats",
    "packable",
    "solve_double_packing",
    "mobius_normalize",
    "hyperbolic_distance",
    "hyperbolic_radius",
    "hyperbolic_centre",
    "hyperbolic_stats",
    "hyperbolic_area",
    "hyperbolic_diam",
    "ring_audit",
    "RingAudit",
    "render_svg",
    "format_dcp",
    "parse_dcp",
    "write_dcp",
    "read_dcp",
]

MODELS = ("euclidean", "disc")
TWO_PI = 2.0 * math.pi


class PackingError(ValueError):
    pass


class NotConverged(PackingError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class Residuals:
    tangency: float
    orthogonality: float
    angle_sum: float
    outside_disc: float = 0.0
    iterations: int = 0
    method: str = ""

    def ok(self, tol: float = 1e-7) -> bool:
        return max(self.tangency, self.orthogonality, self.outside_disc) < tol


@dataclass
class DoublePacking:
    """Circles in the plane (``euclidean``) or the unit disc (``disc``).

    Centres and radii are Euclidean in both models.  ``face_radius`` is NaN
    for the outer face.  In the disc model ``horocycle`` marks outer
    vertices, whose circles touch the unit circle.
    """

    model: str
    vertex_centre: np.ndarray
    vertex_radius: np.ndarray
    face_centre: np.ndarray
    face_radius: np.ndarray
    outer_face: int
    tail: np.ndarray
    head: np.ndarray
    residuals: Residuals
    horocycle: np.ndarray = field(default=None)
    net: PlaneNetwork | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.horocycle is None:
            self.horocycle = np.zeros(len(self.vertex_radius), dtype=bool)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_radius)

    @property
    def n_faces(self) -> int:
        return len(self.face_radius)

    def tangency_point(self, u: int, v: int) -> complex:
        zu, zv = self.vertex_centre[u], self.vertex_centre[v]
        ru = self.vertex_radius[u]
        return complex(zu + ru * (zv - zu) / abs(zv - zu))


# ---------------------------------------------------------------------------
# preconditions


def packable(net: PlaneNetwork) -> tuple[bool, str]:
    """Whether the kite system is well posed; returns (ok, reason)."""
    if net.euler_characteristic != 2:
        return False, "map is not planar"
    if np.any(net.tail == net.head):
        return False, "network has loops"
    pairs = set()
    for u, v in zip(net.tail.tolist(), net.head.tolist()):
        key = (min(u, v), max(u, v))
        if key in pairs:
            return False, "network has parallel edges"
        pairs.add(key)
    for f, face in enumerate(net.faces):
        vs = [int(net.origin[d]) for d in face]
        if len(set(vs)) != len(vs):
            return False, f"face {f} is not bounded by a simple cycle"
    outer = set(net.outer_vertices())
    deg = net.degrees()
    for v in range(net.n_vertices):
        if v not in outer and deg[v] < 3:
            return False, f"interior vertex {v} has degree {deg[v]}"
    return True, ""


# ---------------------------------------------------------------------------
# radius solver


class _Kites:
    """Incidence structure: one kite per corner (v, f) of a bounded face."""

    def __init__(self, net: PlaneNetwork):
        self.net = net
        n, F = net.n_vertices, net.n_faces
        of = net.outer_face
        darts = np.arange(2 * net.n_edges)
        fod = net.face_of_dart
        keep = fod != of
        self.kv = net.origin[darts[keep]]
        self.kf = fod[keep]
        self.bd = np.zeros(n, dtype=bool)
        self.bd[net.outer_vertices()] = True
        self.free_v = np.flatnonzero(~self.bd)
        self.free_f = np.array([f for f in range(F) if f != of], dtype=np.int64)
        self.kdeg_v = np.bincount(self.kv, minlength=n)
        self.kdeg_f = np.bincount(self.kf, minlength=F)
        # unknown index: vertices first then faces
        self.idx_v = np.full(n, -1, dtype=np.int64)
        self.idx_v[self.free_v] = np.arange(len(self.free_v))
        self.idx_f = np.full(F, -1, dtype=np.int64)
        self.idx_f[self.free_f] = len(self.free_v) + np.arange(len(self.free_f))
        self.n_unknowns = len(self.free_v) + len(self.free_f)


def _angles(model, rv, rf, kv, kf):
    """Full kite angles at v and at f for each incidence."""
    a, b = rv[kv], rf[kf]
    if model == "euclidean":
        av = 2.0 * np.arctan2(b, a)
        return av, math.pi - av
    with np.errstate(over="ignore", invalid="ignore"):
        av = 2.0 * np.arctan(np.tanh(b) / np.sinh(a))
        bf = 2.0 * np.arctan(np.tanh(a) / np.sinh(b))
    av = np.where(np.isinf(a), 0.0, av)
    return av, bf


def _sums(model, K, rv, rf):
    av, bf = _angles(model, rv, rf, K.kv, K.kf)
    sv = np.bincount(K.kv, weights=av, minlength=len(rv))
    sf = np.bincount(K.kf, weights=bf, minlength=len(rf))
    return sv, sf


def _residual(model, K, rv, rf):
    sv, sf = _sums(model, K, rv, rf)
    res = np.concatenate([sv[K.free_v] - TWO_PI, sf[K.free_f] - TWO_PI])
    return res


def _uniform_update(model, r, theta, k):
    # replace the neighbours by equal circles with the same angle sum, then
    # choose the radius whose equal-neighbour flower closes up exactly
    ratio = np.tan(theta / (2.0 * k)) / np.tan(math.pi / k)
    if model == "euclidean":
        return r * ratio
    return np.arcsinh(np.sinh(r) * ratio)


def _sweep(model, K, rv, rf):
    sv, _ = _sums(model, K, rv, rf)
    fv = K.free_v
    rv[fv] = _uniform_update(model, rv[fv], sv[fv], K.kdeg_v[fv])
    _, sf = _sums(model, K, rv, rf)
    ff = K.free_f
    rf[ff] = _uniform_update(model, rf[ff], sf[ff], K.kdeg_f[ff])


def _jacobian(model, K, rv, rf):
    """d(angle sums)/d(log radius) restricted to unknowns."""
    kv, kf = K.kv, K.kf
    a, b = rv[kv], rf[kf]
    if model == "euclidean":
        s = b / a
        g = 2.0 * s / (1.0 + s * s)
        dav_da, dav_db = -g, g
        dbf_da, dbf_db = g, -g
    else:
        fin = ~np.isinf(a)
        af = np.where(fin, a, 1.0)
        u = np.tanh(b) / np.sinh(af)
        cu = 2.0 / (1.0 + u * u)
        dav_db = np.where(fin, cu / (np.cosh(b) ** 2 * np.sinh(af)) * b, 0.0)
        dav_da = np.where(fin, -cu * np.tanh(b) * np.cosh(af) / np.sinh(af) ** 2 * af, 0.0)
        w = np.where(fin, np.tanh(af), 1.0) / np.sinh(b)
        cw = 2.0 / (1.0 + w * w)
        dbf_da = np.where(fin, cw / (np.cosh(af) ** 2 * np.sinh(b)) * af, 0.0)
        dbf_db = -cw * np.where(fin, np.tanh(af), 1.0) * np.cosh(b) / np.sinh(b) ** 2 * b
    iv, jf = K.idx_v[kv], K.idx_f[kf]
    rows, cols, vals = [], [], []

    def add(r, c, x):
        m = (r >= 0) & (c >= 0)
        rows.append(r[m])
        cols.append(c[m])
        vals.append(x[m])

    add(iv, iv, dav_da)
    add(iv, jf, dav_db)
    add(jf, iv, dbf_da)
    add(jf, jf, dbf_db)
    N = K.n_unknowns
    return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(N, N))


def _get(K, rv, rf):
    return np.concatenate([rv[K.free_v], rf[K.free_f]])


def _set(K, rv, rf, x):
    nv = len(K.free_v)
    rv[K.free_v] = x[:nv]
    rf[K.free_f] = x[nv:]


def _solve_radii(model, K, rv, rf, tol, max_iters, method):
    """Iterate until the max angle-sum residual drops below ``tol``."""
    it = 0
    err = float(np.max(np.abs(_residual(model, K, rv, rf)), initial=0.0))
    if method == "sweep":
        while err >= tol and it < max_iters:
            _sweep(model, K, rv, rf)
            it += 1
            if it % 16 == 0 or it == max_iters:
                err = float(np.max(np.abs(_residual(model, K, rv, rf)), initial=0.0))
        err = float(np.max(np.abs(_residual(model, K, rv, rf)), initial=0.0))
        return err, it
    # warm start with a few sweeps, then Newton in log radii
    for _ in range(min(50, max_iters)):
        if err < 1e-2:
            break
        _sweep(model, K, rv, rf)
        it += 1
        err = float(np.max(np.abs(_residual(model, K, rv, rf)), initial=0.0))
    stalls = 0
    polish = 0
    while it < max_iters:
        if err < tol:
            # a few extra Newton steps buy several digits in the layout
            polish += 1
            if polish > 3 or err < 1e-14:
                break
        F = _residual(model, K, rv, rf)
        J = _jacobian(model, K, rv, rf)
        try:
            dx = spla.spsolve(J, -F)
        except RuntimeError:
            dx = None
        it += 1
        accepted = False
        if dx is not None and np.all(np.isfinite(dx)):
            dx = np.clip(dx, -8.0, 8.0)
            x0 = np.log(_get(K, rv, rf))
            t = 1.0
            for _ in range(40):
                _set(K, rv, rf, np.exp(x0 + t * dx))
                new = float(np.max(np.abs(_residual(model, K, rv, rf))))
                if new < err:
                    err = new
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                _set(K, rv, rf, np.exp(x0))
        if not accepted:
            if err < tol:
                break
            # fall back on the monotone sweep for a while
            stalls += 1
            if stalls > 20:
                break
            for _ in range(100):
                _sweep(model, K, rv, rf)
                it += 1
            err = float(np.max(np.abs(_residual(model, K, rv, rf))))
    return err, it


# ---------------------------------------------------------------------------
# layout


class _Euclid:
    @staticmethod
    def kite(rv, rf):
        return math.hypot(rv, rf)

    @staticmethod
    def half_angle(r_corner, r_face):
        return math.atan2(r_corner, r_face)

    @staticmethod
    def place(c, d, psi):
        return c + d * complex(math.cos(psi), math.sin(psi))

    @staticmethod
    def direction(a, b):
        return math.atan2((b - a).imag, (b - a).real)


class _Hyper:
    @staticmethod
    def kite(rv, rf):
        return math.acosh(math.cosh(rv) * math.cosh(rf))

    @staticmethod
    def half_angle(r_corner, r_face):
        t = 1.0 if math.isinf(r_corner) else math.tanh(r_corner)
        return math.atan2(t, math.sinh(r_face))

    @staticmethod
    def place(c, d, psi):
        e = complex(math.cos(psi), math.sin(psi))
        w = e if math.isinf(d) else math.tanh(d / 2.0) * e
        return (w + c) / (1.0 + c.conjugate() * w)

    @staticmethod
    def direction(a, b):
        w = (b - a) / (1.0 - a.conjugate() * b)
        return math.atan2(w.imag, w.real)


def _hyper_to_euclid(c: complex, R: float) -> tuple[complex, float]:
    """Euclidean centre and radius of the hyperbolic circle (c, R) in the disc."""
    s = math.tanh(R / 2.0)
    a = abs(c)
    x1 = (a + s) / (1.0 + a * s)
    x2 = (a - s) / (1.0 - a * s)
    mid = 0.5 * (x1 + x2)
    rad = 0.5 * (x1 - x2)
    unit = c / a if a > 0 else 1.0
    return mid * unit, rad


def _layout(model, K, rv, rf):
    net = K.net
    geo = _Euclid if model == "euclidean" else _Hyper
    n, F = net.n_vertices, net.n_faces
    of = net.outer_face
    zf = np.full(F, np.nan + 0j)
    zv = np.full(n, np.nan + 0j)
    ideal = np.full(n, np.nan + 0j)
    touch = np.full(n, np.nan + 0j)
    corner0 = {}
    # start from an inner face at vertex 0
    start = next(int(net.face_of_dart[d]) for d in net.rotation[0] if net.face_of_dart[d] != of) \
        if any(net.face_of_dart[d] != of for d in net.rotation[0]) else int(K.free_f[0])
    zf[start] = 0.0
    corner0[start] = (0, 0.0)
    queue = [start]
    head = 0
    while head < len(queue):
        f = queue[head]
        head += 1
        face = net.faces[f]
        k = len(face)
        j0, phi0 = corner0[f]
        r_f = rf[f]
        phis = [0.0] * k
        betas = [geo.half_angle(rv[net.origin[face[(j0 + i) % k]]], r_f) for i in range(k)]
        phi = phi0
        for i in range(k):
            if i:
                phi += betas[i - 1] + betas[i]
            phis[(j0 + i) % k] = phi
        for j, d in enumerate(face):
            v = int(net.origin[d])
            beta = geo.half_angle(rv[v], r_f)
            if np.isnan(zv[v]) and np.isnan(ideal[v]):
                if math.isinf(rv[v]):
                    ideal[v] = geo.place(zf[f], math.inf, phis[j])
                    touch[v] = geo.place(zf[f], r_f, phis[j] + beta)
                else:
                    zv[v] = geo.place(zf[f], geo.kite(rv[v], r_f), phis[j])
            g = int(net.face_of_dart[d ^ 1])
            if g == of or not np.isnan(zf[g]):
                continue
            psi = phis[j] + beta
            zf[g] = geo.place(zf[f], r_f + rf[g], psi)
            back = geo.direction(zf[g], zf[f])
            w = int(net.origin[d ^ 1])
            jg = net.faces[g].index(d ^ 1)
            corner0[g] = (jg, back - geo.half_angle(rv[w], rf[g]))
            queue.append(g)
    if len(queue) != len(K.free_f):
        raise PackingError("bounded faces are not connected through shared edges")
    return zv, zf, ideal, touch


# ---------------------------------------------------------------------------
# residuals


def _residuals(p: DoublePacking, angle_sum: float, iterations: int, method: str) -> Residuals:
    zc, r = p.vertex_centre, p.vertex_radius
    t, h = p.tail, p.head
    dist = np.abs(zc[t] - zc[h])
    tang = np.abs(dist - (r[t] + r[h])) / (r[t] + r[h])
    orth = 0.0
    if p.net is not None:
        net = p.net
        darts = np.arange(2 * net.n_edges)
        keep = net.face_of_dart != p.outer_face
        kv, kf = net.origin[darts[keep]], net.face_of_dart[keep]
        d2 = np.abs(zc[kv] - p.face_centre[kf]) ** 2
        s = r[kv] ** 2 + p.face_radius[kf] ** 2
        orth = float(np.max(np.abs(d2 - s) / s, initial=0.0))
    out = 0.0
    if p.model == "disc":
        out = float(max(np.max(np.abs(zc) + r) - 1.0, 0.0))
    return Residuals(float(np.max(tang, initial=0.0)), orth, angle_sum, out, iterations, method)


def solve_double_packing(
    net: PlaneNetwork,
    model: str = "disc",
    boundary_radii: float | Mapping[int, float] | Sequence[float] = 1.0,
    tol: float = 1e-10,
    max_iters: int = 100_000,
    method: str = "newton",
    require: str = "faces",
) -> DoublePacking:
    """Solve for the radii, lay the circles out and report residuals.

    ``require`` is ``"faces"`` (simple graph whose faces are simple cycles)
    or ``"polyhedral"`` (additionally 3-connected).  ``method`` is
    ``"newton"`` (a few sweeps, then Newton in log radii) or ``"sweep"``
    (uniform-neighbour sweeps only).
    """
    if model not in MODELS:
        raise PackingError(f"model must be one of {MODELS}")
    if method not in ("newton", "sweep"):
        raise PackingError("method must be 'newton' or 'sweep'")
    if net.boundary_vertex is not None:
        raise PackingError("pack the free truncation, not a wired one")
    ok, why = packable(net)
    if not ok:
        raise PackingError(f"cannot pack: {why}")
    if require == "polyhedral" and not is_polyhedral(net):
        raise PackingError("cannot pack: network is not polyhedral")
    K = _Kites(net)
    n, F = net.n_vertices, net.n_faces
    rv = np.ones(n)
    rf = np.ones(F)
    rf[net.outer_face] = np.nan
    if model == "euclidean":
        bvs = np.flatnonzero(K.bd)
        if isinstance(boundary_radii, Mapping):
            for v in bvs:
                rv[v] = float(boundary_radii.get(int(v), 1.0))
        elif np.ndim(boundary_radii) == 0:
            rv[bvs] = float(boundary_radii)
        else:
            arr = np.asarray(boundary_radii, dtype=float)
            rv[bvs] = arr[bvs] if len(arr) == n else arr
        if np.any(~(rv[bvs] > 0)) or np.any(~np.isfinite(rv[bvs])):
            raise PackingError("boundary radii must be positive and finite")
    else:
        rv[K.bd] = np.inf
        rv[~K.bd] = 0.5
        rf[K.free_f] = 0.5
    err, iters = _solve_radii(model, K, rv, rf, tol, max_iters, method)
    if not err < tol:
        raise NotConverged(f"angle sums did not converge (max residual {err:.3e})", err)
    zv, zf, ideal, touch = _layout(model, K, rv, rf)
    horo = np.zeros(n, dtype=bool)
    if model == "euclidean":
        vc, vr = zv, rv.copy()
        fc, fr = zf, rf.copy()
    else:
        vc = np.empty(n, dtype=complex)
        vr = np.empty(n)
        for v in range(n):
            if math.isinf(rv[v]):
                zeta, t = ideal[v], touch[v]
                rho = abs(zeta - t) ** 2 / (2.0 * (1.0 - (t * zeta.conjugate()).real))
                vc[v] = zeta * (1.0 - rho)
                vr[v] = rho
                horo[v] = True
            else:
                vc[v], vr[v] = _hyper_to_euclid(complex(zv[v]), float(rv[v]))
        fc = np.full(F, np.nan + 0j)
        fr = np.full(F, np.nan)
        for f in K.free_f:
            fc[f], fr[f] = _hyper_to_euclid(complex(zf[f]), float(rf[f]))
    p = DoublePacking(model, vc, vr, fc, fr, net.outer_face, net.tail.copy(), net.head.copy(),
                      Residuals(0, 0, 0), horo, net)
    p.residuals = _residuals(p, err, iters, method)
    return p


# ---------------------------------------------------------------------------
# normalisation


def _mobius_circle(a, b, c, d, z0: complex, r: float) -> tuple[complex, float]:
    """Image of the circle |z - z0| = r under z -> (a z + b)/(c z + d)."""
    def f(z):
        return (a * z + b) / (c * z + d)

    if c == 0:
        k = a / d
        return f(z0), abs(k) * r
    pole = -d / c
    off = z0 - pole
    if abs(off) <= r:
        raise PackingError("circle passes around the pole of the Mobius map")
    # the image centre is the image of the pole's reflection in the circle
    refl = z0 - r * r / off.conjugate()
    w0 = f(refl)
    q = z0 + r * off / abs(off)
    return w0, abs(f(q) - w0)


def mobius_normalize(p: DoublePacking, x: int, y: int) -> DoublePacking:
    """Move the tangency point of circles x and y to 0, with z(x) < 0 < z(y).

    Disc packings use a disc automorphism; Euclidean packings use a
    similarity that also scales |z(y) - z(x)| to 1.
    """
    t, h = p.tail, p.head
    if not np.any(((t == x) & (h == y)) | ((t == y) & (h == x))):
        raise PackingError(f"({x}, {y}) is not an edge")
    zx, zy = p.vertex_centre[x], p.vertex_centre[y]
    tp = p.tangency_point(x, y)
    if p.model == "euclidean":
        k = 1.0 / (zy - zx)
        a, b, c, d = k, -k * tp, 0.0, 1.0
    else:
        # first send tp to 0, then rotate y onto the positive axis
        wy = _mobius_circle(1.0, -tp, -tp.conjugate(), 1.0, zy, p.vertex_radius[y])[0]
        rot = abs(wy) / wy if abs(wy) > 0 else 1.0
        a, b, c, d = rot, -rot * tp, -tp.conjugate(), 1.0
    vc = np.empty_like(p.vertex_centre)
    vr = np.empty_like(p.vertex_radius)
    for v in range(p.n_vertices):
        vc[v], vr[v] = _mobius_circle(a, b, c, d, complex(p.vertex_centre[v]), float(p.vertex_radius[v]))
    fc = p.face_centre.copy()
    fr = p.face_radius.copy()
    for f in range(p.n_faces):
        if np.isfinite(fr[f]):
            fc[f], fr[f] = _mobius_circle(a, b, c, d, complex(p.face_centre[f]), float(p.face_radius[f]))
    q = replace(p, vertex_centre=vc, vertex_radius=vr, face_centre=fc, face_radius=fr)
    q.residuals = _residuals(q, p.residuals.angle_sum, p.residuals.iterations, p.residuals.method)
    return q


# ---------------------------------------------------------------------------
# hyperbolic measurements


def _dh0(t):
    """Signed hyperbolic distance from 0 to the real point t in (-1, 1)."""
    return np.log1p(t) - np.log1p(-t)


def hyperbolic_distance(z, w):
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    q = np.abs(z - w) / np.abs(1.0 - np.conj(z) * w)
    return 2.0 * np.arctanh(np.minimum(q, 1.0))


def hyperbolic_radius(z, r, atol: float = 1e-12):
    """Hyperbolic radius of the Euclidean disc (z, r) inside the unit disc.

    Discs touching the unit circle (within ``atol``) are horocycles: inf.
    """
    rho = np.abs(np.asarray(z, dtype=complex))
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise PackingError("negative radius")
    outer = rho + r
    if np.any(outer > 1.0 + atol):
        raise PackingError("disc is not inside the unit disc")
    horo = outer >= 1.0 - atol
    with np.errstate(divide="ignore", invalid="ignore"):
        rh = 0.5 * (_dh0(np.minimum(outer, 1.0)) - _dh0(rho - r))
    rh = np.where(horo, np.inf, rh)
    return float(rh) if rh.ndim == 0 else rh


def hyperbolic_centre(z, r, atol: float = 1e-12):
    """Hyperbolic centre of the Euclidean disc (z, r); ideal point for horocycles."""
    z = np.asarray(z, dtype=complex)
    rho = np.abs(z)
    r = np.asarray(r, dtype=float)
    outer = rho + r
    horo = outer >= 1.0 - atol
    with np.errstate(divide="ignore", invalid="ignore"):
        D = 0.5 * (_dh0(np.minimum(outer, 1.0 - 1e-300)) + _dh0(rho - r))
        unit = np.where(rho > 0, z / np.where(rho > 0, rho, 1.0), 1.0)
        c = np.tanh(D / 2.0) * unit
    c = np.where(horo, unit, c)
    return complex(c) if c.ndim == 0 else c


@dataclass(frozen=True)
class HyperbolicStats:
    sigma: np.ndarray
    radius: np.ndarray
    area: np.ndarray
    centre: np.ndarray


def hyperbolic_stats(p: DoublePacking) -> HyperbolicStats:
    if p.model != "disc":
        raise PackingError("hyperbolic quantities need the disc model")
    z, r = p.vertex_centre, p.vertex_radius
    rh = hyperbolic_radius(z, r)
    rh = np.where(p.horocycle, np.inf, rh)
    area = 4.0 * math.pi * np.sinh(rh / 2.0) ** 2
    return HyperbolicStats(1.0 - np.abs(z), rh, area, hyperbolic_centre(z, r))


def hyperbolic_area(p: DoublePacking, A: Iterable[int], stats: HyperbolicStats | None = None) -> float:
    """Total hyperbolic area of the primal discs of ``A`` (disjoint interiors)."""
    A = np.fromiter((int(a) for a in A), dtype=np.int64)
    if len(A) == 0:
        return 0.0
    stats = stats or hyperbolic_stats(p)
    return float(stats.area[A].sum())


def _diam_bruteforce(c: np.ndarray) -> float:
    best = 0.0
    for i in range(len(c) - 1):
        best = max(best, float(np.max(hyperbolic_distance(c[i], c[i + 1:]))))
    return best


def hyperbolic_diam(p: DoublePacking, A: Iterable[int], stats: HyperbolicStats | None = None,
                    brute_limit: int = 2000) -> float:
    """Largest hyperbolic distance between hyperbolic centres of ``A``.

    Above ``brute_limit`` points the search is restricted to the vertices of
    the convex hull in the Klein model, where hyperbolic and Euclidean convex
    hulls coincide; the farthest pair of a set is always a pair of hull
    vertices, so the answer is still exact.
    """
    A = np.fromiter((int(a) for a in A), dtype=np.int64)
    if len(A) <= 1:
        return 0.0
    stats = stats or hyperbolic_stats(p)
    if np.any(np.isinf(stats.radius[A])):
        return math.inf
    c = stats.centre[A]
    if len(c) > brute_limit:
        from scipy.spatial import ConvexHull, QhullError

        k = 2.0 * c / (1.0 + np.abs(c) ** 2)
        try:
            hull = ConvexHull(np.column_stack([k.real, k.imag]))
            c = c[hull.vertices]
        except QhullError:  # collinear input
            pass
    return _diam_bruteforce(c)


# ---------------------------------------------------------------------------
# ring audit


@dataclass(frozen=True)
class RingAudit:
    max_vertex_face: float
    max_vertex_vertex: float
    by_class: dict
    n_interior: int


def ring_audit(p: DoublePacking, net: PlaneNetwork | None = None, exclude: int = 1) -> RingAudit:
    """Largest radius ratios between touching circles away from the outer face.

    Vertices within graph distance ``exclude - 1`` of the outer face are
    skipped (``exclude=1`` drops the outer vertices only).  ``by_class`` maps
    (degree, largest incident face degree) to the worst vertex-face ratio.
    """
    net = net or p.net
    if net is None:
        raise PackingError("ring audit needs the network")
    n = net.n_vertices
    dist = np.full(n, -1)
    frontier = list(net.outer_vertices())
    for v in frontier:
        dist[v] = 0
    k = 0
    while frontier:
        k += 1
        nxt = []
        for v in frontier:
            for w in net.neighbors(v):
                if dist[w] < 0:
                    dist[w] = k
                    nxt.append(w)
        frontier = nxt
    inner = dist >= exclude
    r, rf = p.vertex_radius, p.face_radius
    vf, vv = 0.0, 0.0
    by_class: dict[tuple[int, int], float] = {}
    of = net.outer_face
    for v in np.flatnonzero(inner):
        faces = [int(net.face_of_dart[d]) for d in net.rotation[v]]
        codeg = max(len(net.faces[f]) for f in faces)
        worst = 0.0
        for f in faces:
            if f == of:
                continue
            q = max(r[v] / rf[f], rf[f] / r[v])
            worst = max(worst, q)
        for u in net.neighbors(v):
            vv = max(vv, r[v] / r[u], r[u] / r[v])
        vf = max(vf, worst)
        key = (int(net.degree(v)), int(codeg))
        by_class[key] = max(by_class.get(key, 0.0), worst)
    return RingAudit(vf, vv, by_class, int(inner.sum()))


# ---------------------------------------------------------------------------
# SVG


def render_svg(
    p: DoublePacking,
    forest_edges: Iterable[int] = (),
    highlight: Iterable[int] = (),
    size: int = 800,
    show_dual: bool = True,
) -> str:
    """Primal circles solid and lightly filled, dual circles dashed,
    forest edges as chords between primal centres, highlighted vertices filled."""
    finite_v = np.isfinite(p.vertex_radius)
    if p.model == "disc":
        lo, hi = complex(-1, -1), complex(1, 1)
    else:
        zs = p.vertex_centre[finite_v]
        rs = p.vertex_radius[finite_v]
        lo = complex(np.min(zs.real - rs), np.min(zs.imag - rs))
        hi = complex(np.max(zs.real + rs), np.max(zs.imag + rs))
    span = max(hi.real - lo.real, hi.imag - lo.imag) or 1.0
    pad = 0.02 * span
    scale = size / (span + 2 * pad)

    def X(z):
        return (z.real - lo.real + pad) * scale

    def Y(z):
        return (hi.imag - z.imag + pad) * scale

    hl = set(int(v) for v in highlight)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<title>{escape(p.model)} double circle packing</title>',
    ]
    if p.model == "disc":
        out.append(f'<circle class="unit" cx="{X(0j):.4f}" cy="{Y(0j):.4f}" r="{scale:.4f}" '
                   'fill="none" stroke="#888" stroke-width="0.5"/>')
    out.append('<g class="primal">')
    for v in range(p.n_vertices):
        z, r = complex(p.vertex_centre[v]), float(p.vertex_radius[v])
        fill = "#d62728" if v in hl else "#c6dbef"
        out.append(f'<circle id="v{v}" cx="{X(z):.4f}" cy="{Y(z):.4f}" r="{r * scale:.4f}" '
                   f'fill="{fill}" fill-opacity="0.6" stroke="#08306b" stroke-width="0.6"/>')
    out.append("</g>")
    if show_dual:
        out.append('<g class="dual">')
        for f in range(p.n_faces):
            if not np.isfinite(p.face_radius[f]):
                continue
            z, r = complex(p.face_centre[f]), float(p.face_radius[f])
            out.append(f'<circle id="f{f}" cx="{X(z):.4f}" cy="{Y(z):.4f}" r="{r * scale:.4f}" '
                       'fill="none" stroke="#636363" stroke-width="0.4" stroke-dasharray="2,2"/>')
        out.append("</g>")
    edges = [int(e) for e in forest_edges]
    out.append(f'<g class="forest" data-edges="{len(edges)}">')
    for e in edges:
        a, b = complex(p.vertex_centre[p.tail[e]]), complex(p.vertex_centre[p.head[e]])
        out.append(f'<line id="e{e}" x1="{X(a):.4f}" y1="{Y(a):.4f}" x2="{X(b):.4f}" y2="{Y(b):.4f}" '
                   'stroke="#2ca02c" stroke-width="1.2"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# dcp format


def format_dcp(p: DoublePacking) -> str:
    lines = ["dcp v1", f"model {p.model}"]
    for v in range(p.n_vertices):
        z = p.vertex_centre[v]
        lines.append(f"v {v} {z.real:.17g} {z.imag:.17g} {p.vertex_radius[v]:.17g}")
    for f in range(p.n_faces):
        if f == p.outer_face or not np.isfinite(p.face_radius[f]):
            continue
        z = p.face_centre[f]
        lines.append(f"f {f} {z.real:.17g} {z.imag:.17g} {p.face_radius[f]:.17g}")
    lines.append(f"outer {p.outer_face}")
    for e in range(len(p.tail)):
        lines.append(f"e {e} {p.tail[e]} {p.head[e]}")
    return "\n".join(lines) + "\n"


def parse_dcp(text: str, source: str = "<string>") -> DoublePacking:
    lines = text.splitlines()

    def fail(i, msg, col=1):
        raise GraphError(f"{source}:{i}:{col}: {msg}")

    if not lines or lines[0].strip() != "dcp v1":
        fail(1, "expected header 'dcp v1'")
    model = None
    verts: dict[int, tuple[complex, float]] = {}
    faces: dict[int, tuple[complex, float]] = {}
    edges: dict[int, tuple[int, int]] = {}
    outer = -1
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts:
            continue
        kind = parts[0]
        try:
            if kind == "model":
                model = parts[1]
                if model not in MODELS:
                    fail(i, f"unknown model {model!r}", 7)
            elif kind in ("v", "f"):
                if len(parts) != 5:
                    fail(i, f"expected 5 fields, got {len(parts)}")
                idx = int(parts[1])
                z = complex(float(parts[2]), float(parts[3]))
                r = float(parts[4])
                if not r > 0:
                    fail(i, "radius must be positive")
                (verts if kind == "v" else faces)[idx] = (z, r)
            elif kind == "outer":
                outer = int(parts[1])
            elif kind == "e":
                edges[int(parts[1])] = (int(parts[2]), int(parts[3]))
            else:
                fail(i, f"unknown record {kind!r}")
        except (ValueError, IndexError) as exc:
            if isinstance(exc, GraphError):
                raise
            fail(i, f"malformed line: {exc}")
    if model is None:
        fail(2, "missing model line")
    n = max(verts) + 1 if verts else 0
    if set(verts) != set(range(n)):
        fail(len(lines), "vertex ids are not contiguous")
    nf = max(list(faces) + [outer]) + 1 if (faces or outer >= 0) else 0
    vc = np.array([verts[v][0] for v in range(n)], dtype=complex)
    vr = np.array([verts[v][1] for v in range(n)])
    fc = np.full(nf, np.nan + 0j)
    fr = np.full(nf, np.nan)
    for f, (z, r) in faces.items():
        fc[f], fr[f] = z, r
    m = max(edges) + 1 if edges else 0
    tail = np.array([edges[e][0] for e in range(m)], dtype=np.int64)
    head = np.array([edges[e][1] for e in range(m)], dtype=np.int64)
    horo = np.zeros(n, dtype=bool)
    if model == "disc":
        horo = np.abs(vc) + vr >= 1.0 - 1e-9
    p = DoublePacking(model, vc, vr, fc, fr, outer, tail, head, Residuals(0, 0, 0), horo, None)
    p.residuals = _residuals(p, math.nan, 0, "file")
    return p


def write_dcp(p: DoublePacking, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_dcp(p))


def read_dcp(path) -> DoublePacking:
    with open(path) as fh:
        return parse_dcp(fh.read(), source=str(path))
