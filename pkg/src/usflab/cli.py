"""Command-line entry point ``usf-lab``.

Every run writes a manifest (argv, resolved config, seed, versions, file
digests, wall time).  It goes next to the output (``<out>.manifest.json``,
or ``manifest.json`` inside an output directory), or to stderr as one JSON
line when the result goes to stdout.  ``--manifest PATH`` overrides both.

Exit codes: 0 success, 1 computation error, 2 usage error (bad flags or a
malformed input file).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__, kernels
from .electrical import (
    ElectricalError,
    ResistanceQuery,
    effective_resistance,
    kirchhoff_marginals,
    wired_free_gap,
)
from .experiments import (
    RULES,
    ExperimentError,
    ExperimentSpec,
    default_workers,
    fit_csv,
    free_length_experiment,
    parabolic_csv,
    parabolic_experiment,
    samples_csv,
    wired_past_experiment,
)
from .forest import (
    ForestError,
    WalkConfig,
    check_spatial_markov,
    dual_complement,
    enumerate_trees,
    format_forest,
    fusf_sample,
    parse_forest,
    spanning_tree_count,
    wilson_ust,
    wusf_sample,
)
from .generators import (
    TessellationSpec,
    cube,
    cycle,
    grid_ball,
    layered_triangulation,
    octahedron,
    tessellation_ball,
    tetrahedron,
    tube,
)
from .graph import (
    GraphError,
    dual,
    format_planenet,
    geometry_bound,
    is_polyhedral,
    parse_planenet,
    wired_truncation,
)
from .packing import (
    PackingError,
    format_dcp,
    mobius_normalize,
    packable,
    parse_dcp,
    render_svg,
    solve_double_packing,
)

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip() != ""]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip() != ""]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


class Run:
    """Collects inputs, outputs and config for the manifest."""

    def __init__(self, argv: list[str], cfg: dict):
        self.argv = argv
        self.cfg = cfg
        self.inputs: dict[str, str] = {}
        self.outputs: dict[str, str] = {}
        self.stdout_used = False
        self.t0 = time.perf_counter()

    def read_text(self, path: str) -> tuple[str, str]:
        if path == "-":
            data = sys.stdin.read()
            self.inputs["<stdin>"] = _sha256(data.encode())
            return data, "<stdin>"
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        self.inputs[str(path)] = _sha256(raw)
        return raw.decode(), str(path)

    def read_net(self, path: str):
        text, src = self.read_text(path)
        try:
            return parse_planenet(text, source=src)
        except GraphError as exc:
            raise UsageError(str(exc)) from None

    def emit(self, text: str, path: str | None, name: str | None = None) -> None:
        """Write ``text`` to ``path``, to ``path/name`` for directories, or to stdout."""
        if path is None or path == "-":
            sys.stdout.write(text)
            sys.stdout.flush()
            self.stdout_used = True
            self.outputs["<stdout>" + (f":{name}" if name else "")] = _sha256(text.encode())
            return
        target = Path(path)
        if name is not None:
            target.mkdir(parents=True, exist_ok=True)
            target = target / name
        elif target.parent and not target.parent.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode()
        target.write_bytes(data)
        self.outputs[str(target)] = _sha256(data)

    def manifest(self) -> dict:
        import networkx
        import scipy

        return {
            "argv": self.argv,
            "command": self.cfg.get("command"),
            "config": {k: v for k, v in self.cfg.items() if k != "config"},
            "seed": self.cfg.get("seed"),
            "versions": {
                "usflab": __version__,
                "kernels": kernels.backend_name(),
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "networkx": networkx.__version__,
            },
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_time_s": time.perf_counter() - self.t0,
        }

    def write_manifest(self, out: str | None, explicit: str | None) -> None:
        text = json.dumps(self.manifest(), indent=2, sort_keys=True, default=_jsonable) + "\n"
        if explicit:
            Path(explicit).write_text(text)
        elif out and out != "-":
            p = Path(out)
            dest = p / "manifest.json" if p.is_dir() else p.with_name(p.name + ".manifest.json")
            dest.write_text(text)
        else:
            sys.stderr.write(json.dumps(self.manifest(), sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.ndarray, tuple, set, frozenset)):
        return list(x)
    return str(x)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(run: Run, a: dict) -> None:
    kind = a["kind"]
    if kind == "tess":
        net = tessellation_ball(TessellationSpec(a["p"], a["q"], a["depth"]))
    elif kind == "tube":
        net = tube(a["rings"], a["c"])
    elif kind == "grid":
        net = grid_ball(a["n"])
    elif kind == "layered":
        net = layered_triangulation(_ints(a["bands"]), a["depth"])
    elif kind == "cycle":
        net = cycle(a["n"])
    else:
        net = {"tetrahedron": tetrahedron, "cube": cube, "octahedron": octahedron}[kind]()
    run.emit(format_planenet(net), a["out"])


def cmd_graph(run: Run, a: dict) -> None:
    net = run.read_net(a["file"])
    if a["action"] == "dual":
        run.emit(format_planenet(dual(net)), a["out"])
        return
    gb = geometry_bound(net)
    ok, why = packable(net)
    info = {
        "vertices": net.n_vertices,
        "edges": net.n_edges,
        "faces": net.n_faces,
        "outer_face": int(net.outer_face),
        "outer_face_length": len(net.faces[net.outer_face]),
        "boundary_vertex": net.boundary_vertex,
        "polyhedral": bool(is_polyhedral(net)) if net.boundary_vertex is None else False,
        "packable": ok,
        "packable_reason": why,
        "max_degree": gb.max_degree,
        "max_codegree": gb.max_codegree,
        "max_conductance": gb.max_conductance,
        "max_resistance": gb.max_resistance,
        "labels": sorted(net.labels),
    }
    run.emit(json.dumps(info, indent=2, sort_keys=True) + "\n", a["out"])


def _wired_version(net):
    if net.boundary_vertex is not None:
        return net, np.arange(net.n_vertices)
    outer = set(net.outer_vertices())
    keep = [v for v in range(net.n_vertices) if v not in outer]
    if not keep:
        raise ElectricalError("nothing left after wiring the outer face")
    w = wired_truncation(net, keep)
    return w, np.asarray(w.labels["vertex_map"])


def cmd_elec(run: Run, a: dict) -> None:
    net = run.read_net(a["file"])
    A, B = _ints(a["A"]), _ints(a["B"])
    if not A or not B:
        raise UsageError("--A and --B are required")
    if a["action"] == "reff":
        mode = a["mode"]
        if mode == "wired":
            w, vmap = _wired_version(net)
            local = {int(v): i for i, v in enumerate(vmap) if v >= 0}
            try:
                qa, qb = [local[v] for v in A], [local[v] for v in B]
            except KeyError:
                raise ElectricalError("A or B lies on the wired outer face") from None
            r = effective_resistance(w, ResistanceQuery(qa, qb, "wired"))
        else:
            r = effective_resistance(net, ResistanceQuery(A, B, "plain"))
        run.emit(f"{r!r}\n", a["out"])
        return
    layer = net.labels.get("layer")
    if layer is None:
        raise UsageError("gap tables need a 'layer' label (use a generated ball)")
    layer = np.asarray(layer)
    top = int(layer.max())
    depths = [d for d in range(int(max(layer[A].max(), layer[B].max())), top)]
    if not depths:
        raise ElectricalError("no truncation strictly inside the ball contains A and B")
    truncs = [np.flatnonzero(layer <= d) for d in depths]
    rows = wired_free_gap(net, truncs, A, B, depths=depths, check=False)
    lines = ["depth,r_free,r_wired"] + [f"{r.depth},{r.r_free!r},{r.r_wired!r}" for r in rows]
    run.emit("\n".join(lines) + "\n", a["out"])


def cmd_sample(run: Run, a: dict) -> None:
    net = run.read_net(a["file"])
    kind, n, seed = a["kind"], a["n"], a["seed"]
    if n < 1:
        raise UsageError("--n must be positive")
    if kind == "wusf" and net.boundary_vertex is None:
        w, _ = _wired_version(net)
        net = w
    root = a["root"]

    def one(i):
        cfg = WalkConfig(seed, i)
        if kind == "ust":
            r = 0 if root in (None, "auto") else int(root)
            return wilson_ust(net, r, cfg)
        if kind == "wusf":
            return wusf_sample(net, cfg)
        return fusf_sample(net, cfg, root="auto" if root in (None, "auto") else int(root))

    if n == 1:
        run.emit(format_forest(one(0)), a["out"])
        return
    counts = np.zeros(net.n_edges, dtype=np.int64)
    for i in range(n):
        counts[one(i).edges] += 1
    lines = ["edge_id,count,frequency"]
    lines += [f"{e},{int(c)},{float(c) / n!r}" for e, c in enumerate(counts)]
    run.emit("\n".join(lines) + "\n", a["out"])


def cmd_pack(run: Run, a: dict) -> None:
    net = run.read_net(a["file"])
    model = {"plane": "euclidean"}.get(a["model"], a["model"])
    p = solve_double_packing(net, model=model, tol=a["tol"])
    if a["normalize"]:
        xy = _ints(a["normalize"])
        if len(xy) != 2:
            raise UsageError("--normalize expects x,y")
        p = mobius_normalize(p, *xy)
    run.emit(format_dcp(p), a["out"])


def cmd_render(run: Run, a: dict) -> None:
    text, src = run.read_text(a["file"])
    try:
        p = parse_dcp(text, source=src)
    except GraphError as exc:
        raise UsageError(str(exc)) from None
    edges: list[int] = []
    if a["forest"]:
        ftext, fsrc = run.read_text(a["forest"])
        try:
            edges = parse_forest(ftext, source=fsrc)
        except GraphError as exc:
            raise UsageError(str(exc)) from None
    run.emit(render_svg(p, edges, _ints(a["highlight"] or ""), size=a["size"],
                        show_dual=not a["no_dual"]), a["out"])


def _spec(a: dict) -> ExperimentSpec:
    window = tuple(_floats(a["window"]))
    if len(window) != 2:
        raise UsageError("--window expects lo,hi")
    edge = tuple(_ints(a["edge"])) if a["edge"] else None
    return ExperimentSpec(
        family=a["family"], p=a["p"], q=a["q"], depth=a["depth"],
        bands=tuple(_ints(a["bands"] or "")), edge=edge, n_samples=a["n"], seed=a["seed"],
        censor=not a["no_censor"], censor_layers=a["censor_layers"], window=window,
        rule=a["rule"], n_grid=a["n_grid"], n_boot=a["n_boot"], workers=a["threads"],
    )


def cmd_exp(run: Run, a: dict) -> None:
    which, out = a["which"], a["out"]
    if which == "parabolic":
        res = parabolic_experiment(
            tuple(_floats(a["c"])), a["rings"], a["n"], a["seed"], a["max_level"],
            a["censor_layers"], a["threads"], a["n_boot"])
        run.emit(parabolic_csv(res), out, "parabolic.csv" if out not in (None, "-") else None)
        if out not in (None, "-"):
            for c, m in res.levels.items():
                cens = m >= res.rings - a["censor_layers"]
                run.emit(samples_csv(m, cens), out, f"samples_c{c!r}.csv")
        return
    spec = _spec(a)
    if which == "free-length":
        res = free_length_experiment(spec)
        obs, fit = res.length, res.fit
    else:
        res = wired_past_experiment(spec)
        if which == "wired-diam":
            obs, fit = res.diameter, res.diameter_fit
        else:
            obs, fit = res.area, res.area_fit
    if out in (None, "-"):
        run.emit(fit_csv(fit), None)
        return
    run.emit(samples_csv(obs, res.censored), out, "samples.csv")
    run.emit(fit_csv(fit), out, "fit.csv")
    if which != "free-length":
        summary = {
            "empty_fraction": res.empty_fraction,
            "kirchhoff_empty": res.kirchhoff_empty,
            "empty_sigma": res.empty_sigma,
            "censored_fraction": res.censored_fraction,
            "root_radius": res.root_radius,
        }
        run.emit(json.dumps(summary, indent=2, sort_keys=True) + "\n", out, "summary.json")


def selftest(seed: int = 0, n: int = 20000) -> list[tuple[str, bool, str]]:
    """Enumeration-oracle checks on small graphs; returns (name, ok, detail) rows."""
    rows = []
    tri = cycle(3).with_conductance([1.0, 1.0, 2.0])
    sq = cycle(4)
    g3 = grid_ball(3)
    for name, net in (("weighted triangle", tri), ("4-cycle", sq), ("3x3 grid", g3)):
        dist = enumerate_trees(net)
        count = spanning_tree_count(net.n_vertices, net.tail, net.head, net.conductance)
        total = float(np.sum(dist.weights))
        ok = abs(total - count) <= 1e-9 * count
        rows.append((f"matrix-tree {name}", ok, f"enumerated {total:.6g} vs {count:.6g}"))
    for name, net in (("weighted triangle", tri), ("4-cycle", sq)):
        dist = enumerate_trees(net).as_dict()
        emp: dict = {}
        for i in range(n):
            t = tuple(wilson_ust(net, 0, WalkConfig(seed, i)).edges.tolist())
            emp[t] = emp.get(t, 0) + 1
        tv = 0.5 * sum(abs(emp.get(t, 0) / n - p) for t, p in dist.items())
        tv += 0.5 * sum(c / n for t, c in emp.items() if t not in dist)
        # four times the mean TV of an exact sampler, so small N is not flagged
        p = np.array(list(dist.values()))
        tol = max(0.02, 2.0 * float(np.sum(np.sqrt(2.0 * p * (1.0 - p) / (np.pi * n)))))
        rows.append((f"Wilson vs enumeration {name}", tv < tol,
                     f"TV {tv:.4f} at N={n} (limit {tol:.3f})"))
    kc = float(np.abs(enumerate_trees(g3).edge_marginals(g3.n_edges) - kirchhoff_marginals(g3)).max())
    rows.append(("Kirchhoff marginals 3x3 grid", kc < 1e-12, f"max error {kc:.2e}"))
    f = wilson_ust(g3, 0, WalkConfig(seed, 0))
    comp = dual_complement(f)
    dnet = dual(g3)
    ok = len(comp) == dnet.n_vertices - 1
    rows.append(("dual complement size", ok, f"{len(comp)} edges, dual has {dnet.n_vertices} vertices"))
    d = check_spatial_markov(g3, [0], [8])
    rows.append(("spatial Markov 3x3 grid", d < 1e-12, f"discrepancy {d:.2e}"))
    return rows


def cmd_selftest(run: Run, a: dict) -> None:
    rows = selftest(a["seed"], a["n"])
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in rows]
    run.emit("\n".join(lines) + "\n", a["out"])
    if not all(ok for _, ok, _ in rows):
        raise ForestError("selftest failed")


# ---------------------------------------------------------------------------
# parser

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "threads": None,
    "out": None,
    "manifest": None,
    # gen
    "p": 3, "q": 7, "depth": 4, "rings": 20, "c": None, "n": None, "bands": "",
    # elec
    "A": "", "B": "", "mode": "plain",
    # sample
    "root": "auto",
    # pack / render
    "model": "disc", "normalize": None, "tol": 1e-10, "forest": None, "highlight": "",
    "size": 800, "no_dual": False,
    # exp
    "family": "tess", "edge": None, "censor_layers": 2, "no_censor": False,
    "window": "0.7,0.99", "rule": "truncation", "n_grid": 20, "n_boot": 200, "max_level": 8,
}

# per-command overrides of shared option defaults
COMMAND_DEFAULTS = {
    ("gen", "tube"): {"c": 1.0},
    ("gen", "grid"): {"n": 9},
    ("gen", "cycle"): {"n": 4},
    ("sample", None): {"n": 1},
    ("selftest", None): {"n": 20000},
    ("exp", "parabolic"): {"c": "0.1,1,10", "rings": 40, "n": 20000},
    ("exp", None): {"n": 20000, "depth": 8},
}

COMMANDS: dict[str, Callable[[Run, dict], None]] = {
    "gen": cmd_gen,
    "graph": cmd_graph,
    "elec": cmd_elec,
    "sample": cmd_sample,
    "pack": cmd_pack,
    "render": cmd_render,
    "exp": cmd_exp,
    "selftest": cmd_selftest,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 on its own; keep the format uniform
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _global(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--threads", type=int, default=S, help="worker processes (default: available cores)")
    p.add_argument("--seed", type=int, default=S, help="master seed (default 0)")
    p.add_argument("--out", "-o", default=S, help="output file or directory (default stdout)")
    p.add_argument("--config", default=S, help="JSON file of option defaults")
    p.add_argument("--manifest", default=S, help="manifest path")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    top = _Parser(prog="usf-lab", description="Spanning forests and double circle packings.")
    top.add_argument("--version", action="version", version=f"usf-lab {__version__}")
    _global(top)
    sub = top.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def cmd(name, **kw):
        p = sub.add_parser(name, **kw)
        _global(p)
        return p

    g = cmd("gen", help="write a generated network in planenet format")
    g.add_argument("kind", choices=["tess", "tube", "grid", "layered", "cycle",
                                    "tetrahedron", "cube", "octahedron"])
    g.add_argument("--p", type=int, default=S)
    g.add_argument("--q", type=int, default=S)
    g.add_argument("--depth", type=int, default=S)
    g.add_argument("--rings", type=int, default=S)
    g.add_argument("--c", type=float, default=S)
    g.add_argument("--n", type=int, default=S)
    g.add_argument("--bands", default=S, help="comma-separated band lengths")

    g = cmd("graph", help="inspect or dualise a planenet file")
    g.add_argument("action", choices=["info", "dual"])
    g.add_argument("file")

    g = cmd("elec", help="effective resistance and wired/free gap tables")
    g.add_argument("action", choices=["reff", "gap"])
    g.add_argument("file")
    g.add_argument("--A", default=S)
    g.add_argument("--B", default=S)
    g.add_argument("--mode", choices=["plain", "free", "wired"], default=S)

    g = cmd("sample", help="sample spanning trees or forests with Wilson's algorithm")
    g.add_argument("kind", choices=["ust", "wusf", "fusf"])
    g.add_argument("file")
    g.add_argument("--n", type=int, default=S)
    g.add_argument("--root", default=S)

    g = cmd("pack", help="solve the double circle packing")
    g.add_argument("file", nargs="?", default="-")
    g.add_argument("--model", choices=["disc", "euclidean", "plane"], default=S)
    g.add_argument("--normalize", default=S, help="x,y: put the tangency point of x and y at 0")
    g.add_argument("--tol", type=float, default=S)

    g = cmd("render", help="draw a dcp file as SVG")
    g.add_argument("file")
    g.add_argument("--forest", default=S)
    g.add_argument("--highlight", default=S)
    g.add_argument("--size", type=int, default=S)
    g.add_argument("--no-dual", action="store_true", default=S)

    g = cmd("exp", help="Monte-Carlo tail experiments")
    g.add_argument("which", choices=["wired-diam", "wired-area", "free-length", "parabolic"])
    g.add_argument("--family", choices=["tess", "layered", "grid"], default=S)
    g.add_argument("--p", type=int, default=S)
    g.add_argument("--q", type=int, default=S)
    g.add_argument("--depth", type=int, default=S)
    g.add_argument("--bands", default=S)
    g.add_argument("--edge", default=S, help="x,y root edge")
    g.add_argument("--n", type=int, default=S)
    g.add_argument("--censor-layers", type=int, default=S)
    g.add_argument("--no-censor", action="store_true", default=S)
    g.add_argument("--window", default=S, help="quantile window lo,hi")
    g.add_argument("--rule", choices=list(RULES), default=S)
    g.add_argument("--n-grid", type=int, default=S)
    g.add_argument("--n-boot", type=int, default=S)
    g.add_argument("--c", default=S, help="parabolic: comma-separated ring conductances")
    g.add_argument("--rings", type=int, default=S)
    g.add_argument("--max-level", type=int, default=S)

    g = cmd("selftest", help="enumeration-oracle checks")
    g.add_argument("--n", type=int, default=S)
    return top


def resolve(ns: argparse.Namespace) -> dict:
    """Merge flags, config file and defaults (in that order of precedence)."""
    flags = vars(ns)
    cfg_file: dict = {}
    if "config" in flags:
        try:
            cfg_file = json.loads(Path(flags["config"]).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config {flags['config']}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{flags['config']}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(cfg_file, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(cfg_file) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cmd = flags["command"]
    sub = flags.get("kind") or flags.get("which")
    merged = dict(DEFAULTS)
    merged.update(COMMAND_DEFAULTS.get((cmd, None), {}))
    merged.update(COMMAND_DEFAULTS.get((cmd, sub), {}))
    merged.update(cfg_file)
    merged.update(flags)
    if merged["threads"] is None:
        merged["threads"] = default_workers()
    if merged["threads"] < 1:
        raise UsageError("--threads must be positive")
    return merged


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        a = resolve(ns)
        run = Run(argv, a)
        COMMANDS[a["command"]](run, a)
        run.write_manifest(a["out"], a["manifest"])
    except UsageError as exc:
        print(f"usf-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, PackingError, ElectricalError, ForestError, ExperimentError,
            ValueError, OSError) as exc:
        print(f"usf-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
