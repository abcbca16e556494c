"""Ratcliff/Obershelp gestalt pattern matching.

The score of two strings is ``2 * M / (len(a) + len(b))`` where ``M`` counts
characters matched by repeatedly taking the longest common block and
recursing into the unmatched pieces to its left and right.  Lengths are in
Unicode scalar values.  No junk heuristics are applied, so a score depends
only on the two strings.
"""

from __future__ import annotations

import numpy as np

from . import _kernels


def longest_common_block(a: str, b: str) -> tuple[int, int, int]:
    """Return ``(start_a, start_b, length)`` of the longest common substring.

    Ties go to the smallest ``start_a``, then the smallest ``start_b``.
    ``(0, 0, 0)`` when the strings share no character.
    """
    ca = _kernels.to_codes(a)
    cb = _kernels.to_codes(b)
    scratch = len(cb) + 1
    prev = np.empty(scratch, dtype=np.int32)
    cur = np.empty(scratch, dtype=np.int32)
    i, j, k = _kernels.longest_block(ca, 0, len(ca), cb, 0, len(cb), prev, cur)
    if k == 0:
        return 0, 0, 0
    return int(i), int(j), int(k)


def matched_characters(a: str, b: str) -> int:
    """Total characters matched by the gestalt recursion."""
    return int(_kernels.matched_count(_kernels.to_codes(a), _kernels.to_codes(b)))


def ratcliff_obershelp(a: str, b: str) -> float:
    """Gestalt similarity in [0, 1]; two empty strings score 1.0."""
    total = len(a) + len(b)
    if total == 0:
        return 1.0
    if not a or not b:
        return 0.0
    return 2 * matched_characters(a, b) / total
