"""Pure-Python twins of the compiled kernels.

Each step draws exactly one double from the generator, so forests agree
bit-for-bit with the compiled path for the same (seed, stream).
"""
from __future__ import annotations

import numpy as np

_BLOCK = 4096


class _Uniforms:
    # buffered next_double(); Generator.random(k) consumes the stream in order
    __slots__ = ("gen", "buf", "pos")

    def __init__(self, gen):
        self.gen = gen
        self.buf = gen.random(_BLOCK)
        self.pos = 0

    def __call__(self) -> float:
        if self.pos == _BLOCK:
            self.buf = self.gen.random(_BLOCK)
            self.pos = 0
        u = self.buf[self.pos]
        self.pos += 1
        return float(u)


def _uniforms(rng) -> _Uniforms:
    # ``rng`` is a kernels.RngHandle; the buffer lives on it so that
    # successive kernel calls continue the same stream
    if rng.uniforms is None:
        rng.uniforms = _Uniforms(rng.generator)
    return rng.uniforms


def wilson(indptr, nbr, nedge, cumw, in_tree, order, next_v, next_e, rng, step_cap):
    draw = _uniforms(rng)
    indptr_l = indptr.tolist()
    nbr_l = nbr.tolist()
    nedge_l = nedge.tolist()
    cumw_l = cumw.tolist()
    steps = 0
    for u in order.tolist():
        v = u
        while not in_tree[v]:
            lo, hi = indptr_l[v], indptr_l[v + 1] - 1
            target = draw() * cumw_l[hi]
            while lo < hi:
                mid = (lo + hi) >> 1
                if cumw_l[mid] > target:
                    hi = mid
                else:
                    lo = mid + 1
            w = nbr_l[lo]
            next_v[v] = w
            next_e[v] = nedge_l[lo]
            v = w
            steps += 1
            if steps > step_cap:
                return -1
        v = u
        while not in_tree[v]:
            in_tree[v] = 1
            v = next_v[v]
    return steps


def subtree(parent, x):
    n = len(parent)
    kids = [[] for _ in range(n)]
    for v, p in enumerate(parent.tolist()):
        if p >= 0:
            kids[p].append(v)
    out = [x]
    stack = [x]
    while stack:
        v = stack.pop()
        for w in kids[v]:
            out.append(w)
            stack.append(w)
    return np.array(sorted(out), dtype=np.int64)
