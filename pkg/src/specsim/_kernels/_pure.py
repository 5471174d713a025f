"""Pure-Python kernels: token-sequence primitives on the engine's hot paths.

Mirrors `_speed.pyx`; either module satisfies the same contract and the
package selects one at import time (see `specsim._kernels`).
"""

from __future__ import annotations

from typing import Sequence

_CHUNK = 256  # slice-compare stride; slice equality runs at C speed


def common_prefix_len(a: Sequence, b: Sequence) -> int:
    """Length of the longest common prefix of two token sequences."""
    n = min(len(a), len(b))
    lo = 0
    while lo < n:
        hi = min(lo + _CHUNK, n)
        if a[lo:hi] == b[lo:hi]:
            lo = hi
            continue
        for i in range(lo, hi):
            if a[i] != b[i]:
                return i
        return hi
    return n


def common_suffix_len(a: Sequence, b: Sequence) -> int:
    """Length of the longest common suffix of two token sequences."""
    la, lb = len(a), len(b)
    n = min(la, lb)
    matched = 0
    while matched < n:
        ch = min(_CHUNK, n - matched)
        if a[la - matched - ch:la - matched] == b[lb - matched - ch:lb - matched]:
            matched += ch
            continue
        for i in range(matched, matched + ch):
            if a[la - 1 - i] != b[lb - 1 - i]:
                return i
        return matched + ch
    return n


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Token-level edit distance (insert/delete/substitute, unit costs).

    Banded with doubling thresholds, so near-identical sequences cost
    O(d * min(len)) instead of O(len^2).
    """
    if len(a) < len(b):
        a, b = b, a
    m, n = len(a), len(b)
    if n == 0:
        return m
    ids: dict = {}
    xs = [ids.setdefault(t, len(ids)) for t in a]
    ys = [ids.setdefault(t, len(ids)) for t in b]
    t = max(1, m - n)
    while True:
        d = _banded(xs, ys, m, n, t)
        if d <= t:
            return d
        t = min(t * 2, m)


def _banded(xs: list, ys: list, m: int, n: int, t: int) -> int:
    big = t + 1
    prev = [j if j <= t else big for j in range(n + 1)]
    cur = [big] * (n + 1)
    for i in range(1, m + 1):
        lo = max(1, i - t)
        hi = min(n, i + t)
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
        prev, cur = cur, prev
    return prev[n]
