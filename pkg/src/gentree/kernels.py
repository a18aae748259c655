"""Compiled hot loops: jump-driven decoding and consecutive-pattern counts.

The decoder tracks the active sites of the growing permutation as a
sorted array of gap indices and updates it per family in O(k). The
update rules were derived once from the membership definition and are
checked against the slow path of :mod:`gentree.tree` in the tests.

Every kernel returns a status instead of raising, since raising from
compiled code loses the context: 0 means success, -(i+1) means the
label at position i is not a child of its parent.
"""
import numpy as np

from ._jit import HAVE_NUMBA, njit
from .families import (AV123, AV132, AV1234, AV1324, AV1423, AV2314, AV2413,
                       AV3412, FAMA, FAMB)


@njit
def child_label(code, k, j, a):
    """Label of the child obtained at the j-th (0-based) of k sites."""
    if code == FAMA or code == FAMB:
        return a[j]
    if code == AV123:
        return k + 1 if j == 0 else j + 1
    if code == AV132:
        return k + 1 if j == 0 else k - j + 1
    if code == AV1423 or code == AV1324:
        return k + 1 if (j == 0 or j == k - 1) else j + 2
    if code == AV1234:
        return k + 1 if j <= 1 else j + 1
    # AV2314, AV2413, AV3412
    return k + 1 if j == k - 1 else j + 3


@njit
def site_step(code, a, k, j, b):
    """Write the child's active sites into b; return their number."""
    m = a[j]
    lo = m
    hi = m + 1
    if code == FAMA:
        # sites of a child with last value v are [1, v+1] minus {v}
        n = 0
        for s in range(1, m):
            b[n] = s
            n += 1
        b[n] = m + 1
        return n + 1
    if code == FAMB:
        n = 0
        s = 1 if (m - 1) % 2 == 1 else 2
        while s < m:
            b[n] = s
            n += 1
            s += 2
        b[n] = m + 1
        return n + 1
    if j == 0 and code != AV3412:
        b[0] = lo
        b[1] = hi
        if code == AV2314:
            b[2] = a[1] + 1
            return 3
        if code == AV2413:
            b[2] = a[k - 1] + 1
            return 3
        for t in range(1, k):
            b[t + 1] = a[t] + 1
        return k + 1
    if code == AV123:
        for t in range(j):
            b[t] = a[t]
        b[j] = lo
        return j + 1
    if code == AV132:
        b[0] = a[0]
        b[1] = hi
        n = 2
        for t in range(j + 1, k):
            b[n] = a[t] + 1
            n += 1
        return n
    if code == AV1423:
        for t in range(j):
            b[t] = a[t]
        b[j] = lo
        if j == k - 1:
            b[j + 1] = hi
        else:
            b[j + 1] = a[k - 1] + 1
        return j + 2
    if code == AV1234:
        if j == 1:
            b[0] = a[0]
            b[1] = lo
            b[2] = hi
            for t in range(2, k):
                b[t + 1] = a[t] + 1
            return k + 1
        for t in range(j):
            b[t] = a[t]
        b[j] = lo
        return j + 1
    if code == AV1324:
        for t in range(j):
            b[t] = a[t]
        b[j] = lo
        b[j + 1] = hi
        return j + 2
    if code == AV2314 or code == AV2413:
        for t in range(j):
            b[t] = a[t]
        b[j] = lo
        b[j + 1] = hi
        if j < k - 1:
            b[j + 2] = (a[j + 1] if code == AV2314 else a[k - 1]) + 1
            return j + 3
        return j + 2
    # AV3412: keep sites below, the new low gap, then the top two of the rest
    for t in range(j):
        b[t] = a[t]
    b[j] = lo
    rest = k - j  # hi plus the k-j-1 shifted sites above
    if rest == 1:
        b[j + 1] = hi
        return j + 2
    if rest == 2:
        b[j + 1] = hi
        b[j + 2] = a[k - 1] + 1
        return j + 3
    b[j + 1] = a[k - 2] + 1
    b[j + 2] = a[k - 1] + 1
    return j + 3


@njit
def decode_gaps(code, labels, colors, gaps):
    """Fill gaps[i] with the site used at step i; labels start at the
    size-1 permutation (synthetic roots already stripped)."""
    n = labels.shape[0]
    a = np.empty(n + 4, np.int64)
    b = np.empty(n + 4, np.int64)
    if code == FAMA or code == FAMB:
        a[0] = 2
        k = 1
        first = 1
    else:
        a[0] = 1
        a[1] = 2
        k = 2
        first = 2
    if labels[0] != first or colors[0] != 1:
        return -1
    gaps[0] = 1
    for i in range(1, n):
        v = labels[i]
        c = colors[i]
        seen = 0
        j = -1
        for t in range(k):
            if child_label(code, k, t, a) == v:
                seen += 1
                if seen == c:
                    j = t
                    break
        if j < 0:
            return -(i + 1)
        gaps[i] = a[j]
        k = site_step(code, a, k, j, b)
        a, b = b, a
    return 0


@njit
def gaps_to_perm(gaps, out):
    """Final values from the sequence of appended sites (reverse pass with
    a Fenwick tree over the values still free)."""
    n = gaps.shape[0]
    tree = np.zeros(n + 1, np.int64)
    for i in range(1, n + 1):
        tree[i] += 1
        p = i + (i & -i)
        if p <= n:
            tree[p] += tree[i]
    top = 1
    while top * 2 <= n:
        top *= 2
    for i in range(n - 1, -1, -1):
        # find the gaps[i]-th smallest free value
        r = gaps[i]
        pos = 0
        step = top
        while step > 0:
            nxt = pos + step
            if nxt <= n and tree[nxt] < r:
                pos = nxt
                r -= tree[nxt]
            step //= 2
        v = pos + 1
        out[i] = v
        p = v
        while p <= n:
            tree[p] -= 1
            p += p & -p


@njit
def decode_batch(code, labels, colors, out):
    """Row-wise decode; returns a status per row."""
    rows, n = labels.shape
    status = np.zeros(rows, np.int64)
    gaps = np.empty(n, np.int64)
    for r in range(rows):
        s = decode_gaps(code, labels[r], colors[r], gaps)
        status[r] = s
        if s == 0:
            gaps_to_perm(gaps, out[r])
    return status


@njit
def count_consecutive(perm, pi):
    n = perm.shape[0]
    k = pi.shape[0]
    total = 0
    for i in range(n - k + 1):
        ok = True
        for s in range(k):
            for t in range(s + 1, k):
                if (perm[i + s] < perm[i + t]) != (pi[s] < pi[t]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            total += 1
    return total


@njit
def count_consecutive_batch(perms, pi):
    rows = perms.shape[0]
    out = np.empty(rows, np.int64)
    for r in range(rows):
        out[r] = count_consecutive(perms[r], pi)
    return out


def count_consecutive_np(perms, pi):
    """Vectorized recount: rank every window by argsort and compare."""
    perms = np.atleast_2d(np.asarray(perms))
    k = len(pi)
    if k > perms.shape[1]:
        return np.zeros(perms.shape[0], np.int64)
    win = np.lib.stride_tricks.sliding_window_view(perms, k, axis=1)
    ranks = win.argsort(axis=-1).argsort(axis=-1) + 1
    return (ranks == np.asarray(pi)).all(axis=-1).sum(axis=-1)


def decode_array(F, labels, colors):
    """Decode a batch of body label rows (no synthetic root) into permutations.

    Raises ConsistencyError naming the first failing row and position.
    """
    from .errors import ConsistencyError
    labels = np.ascontiguousarray(np.atleast_2d(labels), dtype=np.int64)
    colors = np.ascontiguousarray(np.atleast_2d(colors), dtype=np.int64)
    out = np.empty(labels.shape, np.int64)
    status = decode_batch(F.code, labels, colors, out)
    bad = np.flatnonzero(status)
    if bad.size:
        r = int(bad[0])
        raise ConsistencyError(f"row {r} is not a path of {F.id}", int(-status[r] - 1))
    return out


__all__ = ["HAVE_NUMBA", "child_label", "site_step", "decode_gaps", "gaps_to_perm",
           "decode_batch", "count_consecutive", "count_consecutive_batch",
           "count_consecutive_np", "decode_array"]
