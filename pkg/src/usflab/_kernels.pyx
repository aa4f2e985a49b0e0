# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled random-walk kernels.  Must stay step-for-step identical to _kernels_py."""
import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t

cnp.import_array()

ctypedef cnp.int64_t i64


cdef inline Py_ssize_t _pick(const i64[::1] indptr, const double[::1] cumw,
                             Py_ssize_t v, double u) noexcept nogil:
    cdef Py_ssize_t lo = indptr[v], hi = indptr[v + 1] - 1, mid
    cdef double target = u * cumw[hi]
    # smallest k in [lo, hi] with cumw[k] > target
    while lo < hi:
        mid = (lo + hi) >> 1
        if cumw[mid] > target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def wilson(const i64[::1] indptr, const i64[::1] nbr, const i64[::1] nedge,
           const double[::1] cumw, cnp.uint8_t[::1] in_tree, const i64[::1] order,
           i64[::1] next_v, i64[::1] next_e, rng, long long step_cap):
    """Cycle-popping Wilson sweep over ``order``; returns steps taken or -1 at the cap."""
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(rng.bit_generator.capsule, "BitGenerator")
    cdef Py_ssize_t i, u, v, k
    cdef long long steps = 0
    cdef bint over = False
    with nogil:
        for i in range(order.shape[0]):
            u = order[i]
            v = u
            while not in_tree[v]:
                k = _pick(indptr, cumw, v, bg.next_double(bg.state))
                next_v[v] = nbr[k]
                next_e[v] = nedge[k]
                v = nbr[k]
                steps += 1
                if steps > step_cap:
                    over = True
                    break
            if over:
                break
            v = u
            while not in_tree[v]:
                in_tree[v] = 1
                v = next_v[v]
    return -1 if over else steps


def subtree(const i64[::1] parent, Py_ssize_t x):
    """Vertices whose parent chain passes through ``x`` (including ``x``), sorted."""
    cdef Py_ssize_t n = parent.shape[0], v, w, top
    cdef cnp.ndarray[cnp.int8_t, ndim=1] status_arr = np.zeros(n, dtype=np.int8)
    cdef cnp.int8_t[::1] status = status_arr
    cdef cnp.ndarray[i64, ndim=1] stack_arr = np.empty(n, dtype=np.int64)
    cdef i64[::1] stack = stack_arr
    cdef cnp.int8_t s
    status[x] = 1
    with nogil:
        for v in range(n):
            top = 0
            w = v
            while status[w] == 0:
                if parent[w] < 0:
                    status[w] = 2
                    break
                stack[top] = w
                top += 1
                w = parent[w]
            s = status[w]
            while top > 0:
                top -= 1
                status[stack[top]] = s
    return np.flatnonzero(status_arr == 1)
