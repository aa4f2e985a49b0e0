"""Monte-Carlo experiments on pasts and forest paths, with log-log tail fits.

Every sample ``i`` uses the random stream ``(seed, i)``, so results do not
depend on how samples are split across worker processes.
"""
from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .electrical import kirchhoff_marginal
from .forest import WalkConfig, WilsonRun
from .generators import TessellationSpec, grid_ball, layered_triangulation, tessellation_ball, tube
from .graph import PlaneNetwork, induced_subnetwork, wired_truncation
from .packing import hyperbolic_stats, mobius_normalize, solve_double_packing, _diam_bruteforce

__all__ = [
    "ExperimentError",
    "TailFit",
    "ExperimentSpec",
    "fit_tail",
    "refit",
    "RULES",
    "fit_geometric_tail",
    "tube_hitting_closed_form",
    "tube_reach_lower_bound",
    "WiredPastResult",
    "wired_past_experiment",
    "wired_diameter_experiment",
    "wired_area_experiment",
    "FreeLengthResult",
    "RobustnessCheck",
    "depth_robustness",
    "free_length_experiment",
    "ParabolicRow",
    "ParabolicResult",
    "parabolic_experiment",
    "samples_csv",
    "fit_csv",
    "parabolic_csv",
    "default_workers",
]

MIN_SAMPLES = 1000
TUBE_RATIO = 3.0 + 2.0 * math.sqrt(2.0)


class ExperimentError(ValueError):
    pass


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover
        return max(1, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# tail fitting


@dataclass
class TailFit:
    thresholds: np.ndarray
    survival: np.ndarray
    n_at_risk: np.ndarray
    slope: float
    intercept: float
    window: tuple[float, float]
    bootstrap: tuple[float, float]
    n_samples: int
    n_censored: int = 0
    n_zero: int = 0
    rule: str = "truncation"

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / self.n_samples if self.n_samples else 0.0

    @property
    def zero_fraction(self) -> float:
        return self.n_zero / self.n_samples if self.n_samples else 0.0


RULES = ("truncation", "quantile")


def _tail_once(x, cens, q, n_grid, rule):
    """Window, grid, slope, intercept, survival and counts for one data set."""
    if rule == "quantile":
        # censored samples are dropped entirely
        x = x[~cens]
        cens = np.zeros(len(x), dtype=bool)
        cap = math.inf
    else:
        # censored values are lower bounds; survival is exact below the
        # smallest of them, so the window must stay there
        cap = float(x[cens].min()) if cens.any() else math.inf
    pos = x[(x > 0) & ~cens & (x < cap)]
    if len(pos) == 0:
        raise ExperimentError("no positive samples below the truncation scale")
    lo, hi = (float(v) for v in np.quantile(pos, q))
    if not hi > lo * (1.0 + 1e-9):
        raise ExperimentError("tail window is empty (quantiles coincide)")
    grid = np.geomspace(lo, hi, n_grid)
    xs = np.sort(x)
    at_risk = len(xs) - np.searchsorted(xs, grid, side="left")
    surv = at_risk / len(x)
    keep = at_risk > 0
    if keep.sum() < 2:
        raise ExperimentError("fewer than two populated thresholds in the fit window")
    slope, icpt = np.polyfit(np.log(grid[keep]), np.log(surv[keep]), 1)
    return (lo, hi), grid, float(slope), float(icpt), surv, at_risk


def fit_tail(
    samples: Sequence[float],
    censored: Sequence[bool] | None = None,
    window: tuple[float, float] = (0.7, 0.99),
    n_grid: int = 20,
    n_boot: int = 200,
    seed: int = 0,
    rule: str = "truncation",
    min_samples: int = MIN_SAMPLES,
) -> TailFit:
    """Least-squares slope of log survival against log threshold.

    The window runs between two quantiles of the positive samples and the
    thresholds form a geometric grid across it.  Zeros (the empty-past
    atom) stay in the denominator of the survival estimate but never set
    the window.

    ``censored`` flags samples whose value is only a lower bound (the
    object reached the edge of the truncation).  With ``rule="quantile"``
    they are dropped.  With ``rule="truncation"`` (default) they count
    toward the survival at their observed value, and the window quantiles
    are taken among values below the smallest censored value, the largest
    scale at which the survival estimate is exact.

    The bootstrap interval is the 2.5/97.5 percentile range over
    ``n_boot`` resamples, each refitted from scratch.
    """
    if rule not in RULES:
        raise ExperimentError(f"rule must be one of {RULES}")
    x = np.asarray(samples, dtype=float)
    cens = np.zeros(len(x), dtype=bool) if censored is None else np.asarray(censored, dtype=bool)
    if len(cens) != len(x):
        raise ExperimentError("censored mask has the wrong length")
    if (~cens).sum() < min_samples:
        raise ExperimentError(f"need at least {min_samples} uncensored samples, got {(~cens).sum()}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ExperimentError("samples must be finite and non-negative")
    if np.all(x == x[0]):
        raise ExperimentError("all samples are equal")
    win, grid, slope, icpt, surv, at_risk = _tail_once(x, cens, window, n_grid, rule)
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0xB007], dtype=np.uint64)))
    boots = []
    for _ in range(n_boot):
        idx = rng.integers(0, len(x), len(x))
        try:
            boots.append(_tail_once(x[idx], cens[idx], window, n_grid, rule)[2])
        except ExperimentError:
            continue
    b = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))) if boots else (math.nan, math.nan)
    return TailFit(grid, surv, at_risk, slope, icpt, win, b, len(x), int(cens.sum()),
                   int(np.sum(x == 0)), rule)


def fit_geometric_tail(
    levels: Sequence[int],
    base: float,
    n_censored: int = 0,
    min_count: int = 10,
    n_boot: int = 200,
    seed: int = 0,
) -> TailFit:
    """Tail fit for integer observables measured on the scale ``base**level``.

    ``levels`` holds -1 for the empty atom.  Thresholds are ``base**i`` for
    every level ``i >= 0`` reached by at least ``min_count`` samples.
    """
    m = np.asarray(levels, dtype=np.int64)
    if len(m) < MIN_SAMPLES:
        raise ExperimentError(f"need at least {MIN_SAMPLES} samples, got {len(m)}")

    def fit(mm):
        top = int(mm.max())
        counts = np.array([np.sum(mm >= i) for i in range(top + 1)])
        use = np.flatnonzero(counts >= min_count)
        if len(use) < 2:
            raise ExperimentError("fewer than two levels with enough samples")
        use = np.arange(use[-1] + 1)
        surv = counts[use] / len(mm)
        slope, icpt = np.polyfit(use * math.log(base), np.log(surv), 1)
        return float(slope), float(icpt), base ** use.astype(float), surv, counts[use]

    slope, icpt, grid, surv, at_risk = fit(m)
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, 0xB007], dtype=np.uint64)))
    boots = []
    for _ in range(n_boot):
        try:
            boots.append(fit(m[rng.integers(0, len(m), len(m))])[0])
        except ExperimentError:
            continue
    b = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))) if boots else (math.nan, math.nan)
    return TailFit(grid, surv, at_risk, slope, icpt, (float(grid[0]), float(grid[-1])), b,
                   len(m) + int(n_censored), int(n_censored), int(np.sum(m < 0)), "levels")


# ---------------------------------------------------------------------------
# specs and shared set-up


@dataclass(frozen=True)
class ExperimentSpec:
    """Inputs of a Monte-Carlo run.

    ``family`` is ``tess`` (uses p, q), ``layered`` (uses bands),
    ``grid`` or ``tube`` (uses c).  ``depth`` is the number of retained
    layers beyond the root (rings for the tube).  ``edge`` of ``None``
    selects the root edge (vertex 0 and its first neighbour).
    """

    family: str = "tess"
    p: int = 3
    q: int = 7
    depth: int = 8
    bands: tuple[int, ...] = ()
    c: float = 1.0
    edge: tuple[int, int] | None = None
    n_samples: int = 20_000
    seed: int = 0
    censor: bool = True
    censor_layers: int = 2
    window: tuple[float, float] = (0.7, 0.99)
    rule: str = "truncation"
    n_grid: int = 20
    n_boot: int = 200
    workers: int = 1
    step_cap: int = 10**10

    def __post_init__(self):
        if self.family not in ("tess", "layered", "grid", "tube"):
            raise ExperimentError(f"unknown family {self.family!r}")
        if self.n_samples < 1:
            raise ExperimentError("n_samples must be positive")
        if self.depth < 1:
            raise ExperimentError("depth must be positive")
        if self.rule not in RULES:
            raise ExperimentError(f"rule must be one of {RULES}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bands"] = list(self.bands)
        d["edge"] = list(self.edge) if self.edge else None
        d["window"] = list(self.window)
        return d


def build_ball(spec: ExperimentSpec, depth: int) -> PlaneNetwork:
    if spec.family == "tess":
        return tessellation_ball(TessellationSpec(spec.p, spec.q, depth))
    if spec.family == "layered":
        return layered_triangulation(spec.bands, depth)
    if spec.family == "grid":
        return grid_ball(2 * depth + 1)
    raise ExperimentError(f"family {spec.family!r} has no ball construction")


def _root_edge(net: PlaneNetwork, spec: ExperimentSpec) -> tuple[int, int, int]:
    if spec.edge is None:
        if spec.family == "grid":
            x = (net.n_vertices - 1) // 2
        else:
            x = 0
        y = net.neighbors(x)[0]
    else:
        x, y = spec.edge
    for e, (u, v) in enumerate(net.edge_list()):
        if {u, v} == {x, y}:
            return x, y, e
    raise ExperimentError(f"({x}, {y}) is not an edge")


def _run_chunks(fn: Callable, ctx, n: int, workers: int, chunk: int = 500):
    """Evaluate ``fn(ctx, i)`` for i < n, in index order, on ``workers`` processes."""
    ranges = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    if workers <= 1 or len(ranges) == 1:
        out = []
        for a, b in ranges:
            out.extend(_chunk(fn, ctx, a, b))
        return out
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(fn, ctx, kernels.backend_name())) as ex:
        parts = ex.map(_chunk_worker, ranges)
        return [r for part in parts for r in part]


_WORKER: dict = {}


def _init_worker(fn, ctx, backend):
    _WORKER["fn"], _WORKER["ctx"] = fn, ctx
    if backend != kernels.backend_name():
        kernels.use_backend(backend)


def _chunk_worker(rng):
    return _chunk(_WORKER["fn"], _WORKER["ctx"], *rng)


def _chunk(fn, ctx, a, b):
    return [fn(ctx, i) for i in range(a, b)]


# ---------------------------------------------------------------------------
# wired past: diameter and area


@dataclass
class _WiredCtx:
    wnet: PlaneNetwork
    x: int
    y: int
    e: int
    order: np.ndarray
    band: np.ndarray
    to_pack: np.ndarray
    centre: np.ndarray
    area: np.ndarray
    cfg: WalkConfig


def _wired_sample(ctx: _WiredCtx, i: int):
    run = WilsonRun(ctx.wnet, [ctx.wnet.boundary_vertex], ctx.cfg.for_stream(i))
    run.extend(np.array([ctx.x, ctx.y], dtype=np.int64))
    if ctx.e == run.next_e[ctx.x]:
        child = ctx.x
    elif ctx.e == run.next_e[ctx.y]:
        child = ctx.y
    else:
        return 0, 0.0, 0.0, False
    run.extend(ctx.order)
    verts = kernels.subtree(run.next_v, child)
    censored = bool(ctx.band[verts].any())
    pv = ctx.to_pack[verts]
    if censored:
        # horocycles carry no finite size; what remains gives lower bounds
        pv = pv[np.isfinite(ctx.area[pv])]
    area = float(ctx.area[pv].sum())
    c = ctx.centre[pv]
    if len(c) > 2000:
        from scipy.spatial import ConvexHull

        k = 2.0 * c / (1.0 + np.abs(c) ** 2)
        c = c[ConvexHull(np.column_stack([k.real, k.imag])).vertices]
    diam = _diam_bruteforce(c) if len(c) > 1 else 0.0
    return len(verts), diam, area, censored


@dataclass
class WiredPastResult:
    spec: ExperimentSpec
    sizes: np.ndarray
    diameter: np.ndarray
    area: np.ndarray
    censored: np.ndarray
    diameter_fit: TailFit | None
    area_fit: TailFit | None
    empty_fraction: float
    kirchhoff_empty: float
    root_radius: float

    @property
    def empty_sigma(self) -> float:
        p = self.kirchhoff_empty
        return math.sqrt(max(p * (1 - p), 1e-300) / len(self.sizes))

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean())


def refit(values, censored, spec: ExperimentSpec, rule: str | None = None) -> TailFit:
    """Fit samples with the window settings of ``spec`` (``rule`` overrides)."""
    return fit_tail(values, censored, spec.window, spec.n_grid, spec.n_boot, spec.seed,
                    rule or spec.rule)


def _wired_context(spec: ExperimentSpec):
    if spec.family == "tube":
        raise ExperimentError("use parabolic_experiment for tubes")
    big = build_ball(spec, spec.depth + 1)
    layer = big.labels["layer"]
    keep = np.flatnonzero(layer <= spec.depth)
    ball = induced_subnetwork(big, keep)
    wired = wired_truncation(big, keep)
    x0, y0, _ = _root_edge(ball, spec)
    # ids in ball and wired both index ``keep``
    vm_ball = ball.labels["vertex_map"]
    vm_wired = wired.labels["vertex_map"]
    orig_to_ball = {int(v): i for i, v in enumerate(vm_ball)}
    to_pack = np.array([orig_to_ball.get(int(v), -1) for v in vm_wired], dtype=np.int64)
    wired_of = {int(v): i for i, v in enumerate(vm_wired) if v >= 0}
    ox, oy = int(vm_ball[x0]), int(vm_ball[y0])
    wx, wy = wired_of[ox], wired_of[oy]
    we = next(e for e, (u, v) in enumerate(wired.edge_list()) if {u, v} == {wx, wy})
    pack = solve_double_packing(ball, "disc")
    pack = mobius_normalize(pack, x0, y0)
    stats = hyperbolic_stats(pack)
    wl = wired.labels["layer"]
    band = (wl > spec.depth - spec.censor_layers) if spec.censor else np.zeros(len(wl), dtype=bool)
    band[wired.boundary_vertex] = False
    order = np.array([v for v in range(wired.n_vertices) if v != wired.boundary_vertex], dtype=np.int64)
    cfg = WalkConfig(spec.seed, 0, spec.step_cap)
    ctx = _WiredCtx(wired, wx, wy, we, order, band, to_pack, stats.centre, stats.area, cfg)
    return ctx, pack, stats, x0


def wired_past_experiment(spec: ExperimentSpec, fit: bool = True) -> WiredPastResult:
    """Sample pasts of the root edge in the wired forest of the ball.

    The ball keeps layers ``<= depth``; layer ``depth + 1`` is glued into the
    wired boundary.  Pasts meeting the outer ``censor_layers`` layers are
    censored.  Diameter and area come from the same samples.
    """
    ctx, pack, stats, x0 = _wired_context(spec)
    rows = _run_chunks(_wired_sample, ctx, spec.n_samples, spec.workers)
    sizes = np.array([r[0] for r in rows], dtype=np.int64)
    diam = np.array([r[1] for r in rows])
    area = np.array([r[2] for r in rows])
    cens = np.array([r[3] for r in rows], dtype=bool)
    k_empty = 1.0 - kirchhoff_marginal(ctx.wnet, ctx.e)
    dfit = afit = None
    if fit:
        dfit = refit(diam, cens, spec)
        afit = refit(area, cens, spec)
    return WiredPastResult(spec, sizes, diam, area, cens, dfit, afit,
                           float(np.mean(sizes == 0)), k_empty, float(stats.radius[x0]))


def wired_diameter_experiment(spec: ExperimentSpec) -> tuple[TailFit, WiredPastResult]:
    res = wired_past_experiment(spec)
    return res.diameter_fit, res


def wired_area_experiment(spec: ExperimentSpec) -> tuple[TailFit, WiredPastResult]:
    res = wired_past_experiment(spec)
    return res.area_fit, res


# ---------------------------------------------------------------------------
# free path length


@dataclass
class _FreeCtx:
    net: PlaneNetwork
    x: int
    y: int
    band: np.ndarray
    cfg: WalkConfig


def _free_sample(ctx: _FreeCtx, i: int):
    # rooted at x, the loop-erased walk from y is the tree path itself
    run = WilsonRun(ctx.net, [ctx.x], ctx.cfg.for_stream(i))
    run.extend(np.array([ctx.y], dtype=np.int64))
    path = run.branch(ctx.y)
    return len(path) - 1, bool(ctx.band[path].any())


@dataclass
class FreeLengthResult:
    spec: ExperimentSpec
    length: np.ndarray
    censored: np.ndarray
    fit: TailFit | None

    @property
    def censored_fraction(self) -> float:
        return float(self.censored.mean())


def free_length_experiment(spec: ExperimentSpec, fit: bool = True) -> FreeLengthResult:
    """Length of the tree path between the root edge's endpoints in the UST of the ball."""
    ball = build_ball(spec, spec.depth)
    x, y, _ = _root_edge(ball, spec)
    layer = ball.labels["layer"]
    band = (layer > spec.depth - spec.censor_layers) if spec.censor else np.zeros(len(layer), dtype=bool)
    ctx = _FreeCtx(ball, x, y, band, WalkConfig(spec.seed, 0, spec.step_cap))
    rows = _run_chunks(_free_sample, ctx, spec.n_samples, spec.workers)
    length = np.array([r[0] for r in rows], dtype=np.int64)
    cens = np.array([r[1] for r in rows], dtype=bool)
    tf = None
    if fit:
        tf = refit(length.astype(float), cens, spec)
    return FreeLengthResult(spec, length, cens, tf)


@dataclass
class RobustnessCheck:
    observable: str
    depths: tuple[int, int]
    fits: tuple[TailFit, TailFit]

    @property
    def consistent(self) -> bool:
        a, b = self.fits
        return (b.bootstrap[0] <= a.slope <= b.bootstrap[1]
                or a.bootstrap[0] <= b.slope <= a.bootstrap[1])


def depth_robustness(spec: ExperimentSpec, observable: str, other_depth: int | None = None) -> RobustnessCheck:
    """Refit ``observable`` (``diameter``, ``area`` or ``length``) at a second depth.

    ``other_depth`` defaults to twice ``spec.depth``.  For {p,q} balls that
    is usually out of reach, so callers pick a smaller pair.  Disagreement
    beyond the bootstrap intervals raises a warning, never an error.
    """
    other = 2 * spec.depth if other_depth is None else int(other_depth)
    fits = []
    for d in (spec.depth, other):
        s = replace(spec, depth=d)
        if observable == "length":
            fits.append(free_length_experiment(s).fit)
        elif observable in ("diameter", "area"):
            res = wired_past_experiment(s)
            fits.append(res.diameter_fit if observable == "diameter" else res.area_fit)
        else:
            raise ExperimentError(f"unknown observable {observable!r}")
    chk = RobustnessCheck(observable, (spec.depth, other), (fits[0], fits[1]))
    if not chk.consistent:
        warnings.warn(
            f"{observable} slope moves from {fits[0].slope:.3f} (depth {spec.depth}) "
            f"to {fits[1].slope:.3f} (depth {other}) beyond the bootstrap intervals",
            RuntimeWarning, stacklevel=2)
    return chk


# ---------------------------------------------------------------------------
# parabolic tube


def tube_hitting_closed_form(c: float, i: int) -> float:
    """P_(i,0)(reach ring 0) on the half-infinite tube: a(c)**i."""
    return (1.0 + c - math.sqrt(c * c + 2.0 * c)) ** i


def tube_reach_lower_bound(c: float, i: int) -> float:
    a = 1.0 + c - math.sqrt(c * c + 2.0 * c)
    return c / (2.0 * c + 1.0) * a ** (2 * i)


@dataclass
class _TubeCtx:
    net: PlaneNetwork
    e: int
    root: int
    order: np.ndarray
    ring: np.ndarray
    cfg: WalkConfig


def _tube_sample(ctx: _TubeCtx, i: int):
    run = WilsonRun(ctx.net, [ctx.root], ctx.cfg.for_stream(i))
    run.extend(np.array([0, 1], dtype=np.int64))
    if ctx.e == run.next_e[0]:
        child = 0
    elif ctx.e == run.next_e[1]:
        child = 1
    else:
        return -1
    run.extend(ctx.order)
    verts = kernels.subtree(run.next_v, child)
    return int(ctx.ring[verts].max())


@dataclass
class ParabolicRow:
    c: float
    level: int
    reach: float
    bound: float
    sigma: float

    @property
    def ok(self) -> bool:
        return self.reach >= self.bound - 4.0 * self.sigma


@dataclass
class ParabolicResult:
    rings: int
    n_samples: int
    fits: dict
    levels: dict
    rows: list

    def slope_ratio(self, c_small: float, c_large: float) -> float:
        return abs(self.fits[c_large].slope) / abs(self.fits[c_small].slope)


def parabolic_experiment(
    c_values: Sequence[float] = (0.1, 1.0, 10.0),
    rings: int = 40,
    n_samples: int = 20_000,
    seed: int = 0,
    max_level: int = 8,
    censor_layers: int = 2,
    workers: int = 1,
    n_boot: int = 200,
) -> ParabolicResult:
    """Ring reach of the past of edge (0,0)-(0,1) in the UST of the tube.

    The tree is rooted at the far ring, the finite stand-in for the end at
    infinity.  The observable is the largest ring index the past meets; its
    scale in the packing is ``(3 + 2 sqrt 2)**index``.
    """
    fits, levels, rows = {}, {}, []
    for c in c_values:
        net = tube(rings, c)
        root = 4 * (rings - 1)
        e = next(e for e, (u, v) in enumerate(net.edge_list()) if {u, v} == {0, 1})
        order = np.arange(net.n_vertices, dtype=np.int64)
        ctx = _TubeCtx(net, e, root, order, net.labels["ring"], WalkConfig(seed, 0))
        m = np.array(_run_chunks(_tube_sample, ctx, n_samples, workers), dtype=np.int64)
        cens = m >= rings - censor_layers
        levels[c] = m
        fits[c] = fit_geometric_tail(m[~cens], TUBE_RATIO, int(cens.sum()), n_boot=n_boot, seed=seed)
        for i in range(1, max_level + 1):
            reach = float(np.mean(m >= i))
            b = tube_reach_lower_bound(c, i)
            s = max(reach, b)
            rows.append(ParabolicRow(c, i, reach, b, math.sqrt(s * (1 - s) / n_samples)))
    return ParabolicResult(rings, n_samples, fits, levels, rows)


# ---------------------------------------------------------------------------
# CSV output


def _f(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def samples_csv(observable: Sequence, censored: Sequence[bool]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sample_id", "observable", "censored"])
    for i, (x, c) in enumerate(zip(observable, censored)):
        w.writerow([i, _f(x), _f(bool(c))])
    return buf.getvalue()


def fit_csv(fit: TailFit) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["R", "survival", "n_at_risk"])
    for R, s, k in zip(fit.thresholds, fit.survival, fit.n_at_risk):
        w.writerow([_f(R), _f(s), _f(int(k))])
    w.writerow(["slope", "intercept", "window_lo", "window_hi", "bootstrap_lo", "bootstrap_hi",
                "censored_fraction", "window_rule"])
    w.writerow([_f(fit.slope), _f(fit.intercept), _f(fit.window[0]), _f(fit.window[1]),
                _f(fit.bootstrap[0]), _f(fit.bootstrap[1]), _f(fit.censored_fraction), fit.rule])
    return buf.getvalue()


def parabolic_csv(res: ParabolicResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["c", "level", "reach", "lower_bound", "sigma", "ok"])
    for r in res.rows:
        w.writerow([_f(r.c), r.level, _f(r.reach), _f(r.bound), _f(r.sigma), _f(r.ok)])
    w.writerow(["c", "slope", "intercept", "bootstrap_lo", "bootstrap_hi", "censored_fraction"])
    for c, f in res.fits.items():
        w.writerow([_f(c), _f(f.slope), _f(f.intercept), _f(f.bootstrap[0]), _f(f.bootstrap[1]),
                    _f(f.censored_fraction)])
    return buf.getvalue()
