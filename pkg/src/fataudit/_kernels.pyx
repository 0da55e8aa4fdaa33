# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled mixed-distance kernels.

Must stay bit-identical to ``_kernels_py``: per pair, numeric terms are
accumulated in feature order, then categorical mismatches, then the sum is
divided by the feature count.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def pairwise_mixed_distance(
    const double[:, ::1] a_num,
    const long long[:, ::1] a_cat,
    const double[:, ::1] b_num,
    const long long[:, ::1] b_cat,
    const double[::1] span,
    int n_features,
):
    cdef Py_ssize_t m = a_num.shape[0]
    cdef Py_ssize_t n = b_num.shape[0]
    cdef Py_ssize_t p = a_num.shape[1]
    cdef Py_ssize_t q = a_cat.shape[1]
    cdef Py_ssize_t i, j, f
    cdef double acc, t, s
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] res = out
    with nogil:
        for i in range(m):
            for j in range(n):
                acc = 0.0
                for f in range(p):
                    s = span[f]
                    if s > 0.0:
                        t = fabs(a_num[i, f] - b_num[j, f]) / s
                        if t > 1.0:
                            t = 1.0
                        acc = acc + t
                for f in range(q):
                    if a_cat[i, f] != b_cat[j, f]:
                        acc = acc + 1.0
                res[i, j] = acc / n_features
    return out


def kth_smallest_rows(const double[:, ::1] dist, int k, bint skip_one_zero):
    """Per row, the k-th smallest entry (1-based), optionally ignoring one zero.

    Uses a bounded insertion buffer of size k+1, so cost is O(n*k) per row.
    """
    cdef Py_ssize_t m = dist.shape[0]
    cdef Py_ssize_t n = dist.shape[1]
    cdef Py_ssize_t i, j, pos, filled
    cdef int need
    cdef double v
    cdef bint skipped
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    buf_arr = np.empty(k + 1, dtype=np.float64)
    cdef double[::1] buf = buf_arr
    with nogil:
        for i in range(m):
            filled = 0
            skipped = not skip_one_zero
            need = k
            for j in range(n):
                v = dist[i, j]
                if not skipped and v == 0.0:
                    skipped = True
                    continue
                if filled == need and v >= buf[filled - 1]:
                    continue
                if filled < need:
                    filled = filled + 1
                pos = filled - 1
                while pos > 0 and buf[pos - 1] > v:
                    buf[pos] = buf[pos - 1]
                    pos = pos - 1
                buf[pos] = v
            res[i] = buf[need - 1]
    return out
