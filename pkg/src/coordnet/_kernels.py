"""Compiled inner loops for gestalt matching and windowed pair scans.

Functions here are written as plain Python over integer code-point arrays so
that ``NUMBA_DISABLE_JIT=1`` runs the exact same logic uncompiled.
"""

from __future__ import annotations

import numpy as np
from numba import njit


def to_codes(text: str) -> np.ndarray:
    """Unicode scalar values of ``text`` as an int32 array."""
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)


@njit(nogil=True, cache=True)
def longest_block(a, alo, ahi, b, blo, bhi, prev, cur):
    """Longest common run of a[alo:ahi] and b[blo:bhi].

    Ties resolve to the smallest start in ``a`` and then the smallest start in
    ``b``: rows are scanned in ascending ``i`` and the best is replaced only on
    a strictly longer run, so the first run reaching the maximum length wins.
    ``prev``/``cur`` are scratch rows of length >= len(b) + 1.
    """
    besti = alo
    bestj = blo
    bestk = 0
    for j in range(blo, bhi + 1):
        prev[j - blo] = 0
    for i in range(alo, ahi):
        ai = a[i]
        cur[0] = 0
        for j in range(blo, bhi):
            if b[j] == ai:
                k = prev[j - blo] + 1
                cur[j - blo + 1] = k
                if k > bestk:
                    bestk = k
                    besti = i - k + 1
                    bestj = j - k + 1
            else:
                cur[j - blo + 1] = 0
        prev, cur = cur, prev
    return besti, bestj, bestk


@njit(nogil=True, cache=True)
def matched_count(a, b):
    """Total characters matched by the recursive gestalt decomposition."""
    na = a.shape[0]
    nb = b.shape[0]
    if na == 0 or nb == 0:
        return 0
    prev = np.empty(nb + 1, dtype=np.int32)
    cur = np.empty(nb + 1, dtype=np.int32)
    # explicit stack of (alo, ahi, blo, bhi); depth is bounded by min(na, nb)
    stack = np.empty((2 * min(na, nb) + 4, 4), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = na
    stack[0, 2] = 0
    stack[0, 3] = nb
    top = 1
    total = 0
    while top > 0:
        top -= 1
        alo = stack[top, 0]
        ahi = stack[top, 1]
        blo = stack[top, 2]
        bhi = stack[top, 3]
        i, j, k = longest_block(a, alo, ahi, b, blo, bhi, prev, cur)
        if k == 0:
            continue
        total += k
        if alo < i and blo < j:
            stack[top, 0] = alo
            stack[top, 1] = i
            stack[top, 2] = blo
            stack[top, 3] = j
            top += 1
        if i + k < ahi and j + k < bhi:
            stack[top, 0] = i + k
            stack[top, 1] = ahi
            stack[top, 2] = j + k
            stack[top, 3] = bhi
            top += 1
    return total


@njit(nogil=True, cache=True)
def _multiset_overlap(sa, sb):
    # sa, sb are sorted code arrays; merge-count the multiset intersection
    i = 0
    j = 0
    n = 0
    while i < sa.shape[0] and j < sb.shape[0]:
        if sa[i] == sb[j]:
            n += 1
            i += 1
            j += 1
        elif sa[i] < sb[j]:
            i += 1
        else:
            j += 1
    return n


@njit(nogil=True, cache=True)
def scan_pairs(codes, sorted_codes, offsets, times, lo, hi, window, max_distance, threshold):
    """Score every pair (i, j), lo <= i < hi, i < j, inside the comparison window.

    A pair is in the window when ``times[j] - times[i] < window`` and, if
    ``max_distance > 0``, ``j - i <= max_distance``.  With ``threshold >= 0``
    only pairs whose score is strictly above it are returned and cheap upper
    bounds skip hopeless pairs; with ``threshold < 0`` every pair is returned.
    Pairs of two empty texts are never returned.

    Returns parallel arrays (i, j, matched).
    """
    n = times.shape[0]
    cap = 1024
    out_i = np.empty(cap, dtype=np.int64)
    out_j = np.empty(cap, dtype=np.int64)
    out_m = np.empty(cap, dtype=np.int64)
    count = 0
    keep_all = threshold < 0.0
    for i in range(lo, hi):
        a = codes[offsets[i]:offsets[i + 1]]
        la = a.shape[0]
        j = i + 1
        while j < n and times[j] - times[i] < window:
            if max_distance > 0 and j - i > max_distance:
                break
            lb = offsets[j + 1] - offsets[j]
            total = la + lb
            if total == 0:
                j += 1
                continue
            m = -1
            if not keep_all:
                if 2.0 * min(la, lb) / total <= threshold:
                    j += 1
                    continue
                ov = _multiset_overlap(
                    sorted_codes[offsets[i]:offsets[i + 1]],
                    sorted_codes[offsets[j]:offsets[j + 1]],
                )
                if 2.0 * ov / total <= threshold:
                    j += 1
                    continue
            m = matched_count(a, codes[offsets[j]:offsets[j + 1]])
            if keep_all or 2.0 * m / total > threshold:
                if count == cap:
                    cap *= 2
                    grown_i = np.empty(cap, dtype=np.int64)
                    grown_j = np.empty(cap, dtype=np.int64)
                    grown_m = np.empty(cap, dtype=np.int64)
                    grown_i[:count] = out_i[:count]
                    grown_j[:count] = out_j[:count]
                    grown_m[:count] = out_m[:count]
                    out_i = grown_i
                    out_j = grown_j
                    out_m = grown_m
                out_i[count] = i
                out_j[count] = j
                out_m[count] = m
                count += 1
            j += 1
    return out_i[:count], out_j[:count], out_m[:count]
