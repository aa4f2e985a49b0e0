"""Time the compiled and pure-Python kernels on the same workload.

    python3 benchmarks/bench_kernels.py [--depth 7] [--samples 20]

Both backends consume identical random streams, so the script also checks
that they return the same forests.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from usflab import kernels
from usflab.forest import WalkConfig, wusf_sample
from usflab.generators import TessellationSpec, tessellation_ball
from usflab.graph import wired_truncation


def _time(fn, repeat):
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return statistics.median(out)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=7)
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    ball = tessellation_ball(TessellationSpec(3, 7, args.depth + 1))
    keep = np.flatnonzero(ball.labels["layer"] <= args.depth)
    net = wired_truncation(ball, keep)
    print(f"{{3,7}} depth {args.depth}: {net.n_vertices} vertices, {net.n_edges} edges")

    backends = ["python"] + (["compiled"] if kernels.compiled_available() else [])
    results = {}
    trees = {}
    for name in backends:
        kernels.use_backend(name)

        def wilson():
            for i in range(args.samples):
                wusf_sample(net, WalkConfig(1, i))

        f = wusf_sample(net, WalkConfig(1, 0))
        trees[name] = f.parent.copy()
        results[(name, "wilson")] = _time(wilson, args.repeat) / args.samples
        results[(name, "subtree")] = _time(
            lambda: [kernels.subtree(f.parent, v) for v in range(0, net.n_vertices, 97)],
            args.repeat)

    print(f"{'kernel':<10}{'backend':<10}{'seconds':>12}")
    for (name, kern), t in sorted(results.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        print(f"{kern:<10}{name:<10}{t:>12.5f}")
    if "compiled" in trees:
        same = np.array_equal(trees["python"], trees["compiled"])
        for kern in ("wilson", "subtree"):
            r = results[("python", kern)] / results[("compiled", kern)]
            print(f"speed-up {kern}: {r:.1f}x")
        print(f"identical forests: {same}")
    else:
        print("compiled kernels not built; python timings only")


if __name__ == "__main__":
    main()
