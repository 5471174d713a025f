# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: token-sequence primitives on the engine's hot paths.

Same contract as `_pure`; token comparison uses an identity fast path
(streamed tokens are usually the same interned str objects).
"""

from cpython.object cimport PyObject_RichCompareBool, Py_EQ
from libc.stdlib cimport malloc, free


cdef inline bint _eq(object x, object y) except -1:
    if x is y:
        return True
    return PyObject_RichCompareBool(x, y, Py_EQ)


def common_prefix_len(a, b):
    """Length of the longest common prefix of two token sequences."""
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t n = min(len(a), len(b))
    while i < n and _eq(a[i], b[i]):
        i += 1
    return i


def common_suffix_len(a, b):
    """Length of the longest common suffix of two token sequences."""
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    cdef Py_ssize_t n = min(la, lb)
    cdef Py_ssize_t i = 0
    while i < n and _eq(a[la - 1 - i], b[lb - 1 - i]):
        i += 1
    return i


def levenshtein(a, b):
    """Token-level edit distance (insert/delete/substitute, unit costs).

    Banded with doubling thresholds, so near-identical sequences cost
    O(d * min(len)) instead of O(len^2).
    """
    if len(a) < len(b):
        a, b = b, a
    cdef Py_ssize_t m = len(a)
    cdef Py_ssize_t n = len(b)
    if n == 0:
        return m
    ids = {}
    cdef long *xs = <long *> malloc(m * sizeof(long))
    cdef long *ys = <long *> malloc(n * sizeof(long))
    if xs == NULL or ys == NULL:
        free(xs)
        free(ys)
        raise MemoryError()
    cdef Py_ssize_t i
    try:
        for i in range(m):
            xs[i] = ids.setdefault(a[i], len(ids))
        for i in range(n):
            ys[i] = ids.setdefault(b[i], len(ids))
        t = max(1, m - n)
        while True:
            d = _banded(xs, ys, m, n, t)
            if d <= t:
                return d
            t = min(t * 2, m)
    finally:
        free(xs)
        free(ys)


cdef long _banded(long *xs, long *ys, Py_ssize_t m, Py_ssize_t n, long t):
    cdef long big = t + 1
    cdef long *prev = <long *> malloc((n + 1) * sizeof(long))
    cdef long *cur = <long *> malloc((n + 1) * sizeof(long))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    cdef Py_ssize_t i, j, lo, hi
    cdef long xi, up, diag, best, left, res
    cdef long *tmp
    try:
        for j in range(n + 1):
            prev[j] = j if j <= t else big
        for i in range(1, m + 1):
            lo = i - t
            if lo < 1:
                lo = 1
            hi = i + t
            if hi > n:
                hi = n
            if lo > hi:
                return big
            cur[lo - 1] = i if i <= t else big
            xi = xs[i - 1]
            left = cur[lo - 1]
            for j in range(lo, hi + 1):
                up = prev[j]
                diag = prev[j - 1]
                if xi != ys[j - 1]:
                    diag += 1
                best = diag
                if up + 1 < best:
                    best = up + 1
                if left + 1 < best:
                    best = left + 1
                cur[j] = best
                left = best
            if hi < n:
                cur[hi + 1] = big
            tmp = prev
            prev = cur
            cur = tmp
        res = prev[n]
        return res
    finally:
        free(prev)
        free(cur)
