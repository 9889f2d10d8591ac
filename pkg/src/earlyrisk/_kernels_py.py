"""Pure-Python lexical-diversity kernels.

Fallback for :mod:`earlyrisk._kernels_cy`; same signatures, same results.
Tokens arrive integer-coded as an int64 array with values in [0, n_vocab).
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def msttr_sum(codes: np.ndarray, n_vocab: int, segment_len: int) -> tuple[float, int]:
    """Sum of per-segment TTRs over full disjoint segments, plus segment count.

    The trailing partial segment is discarded.
    """
    n = len(codes)
    n_segments = n // segment_len
    total = 0.0
    for s in range(n_segments):
        segment = codes[s * segment_len : (s + 1) * segment_len]
        total += len(set(segment.tolist())) / segment_len
    return total, n_segments


def mattr_mean(codes: np.ndarray, n_vocab: int, window_len: int) -> float:
    """Mean TTR over every sliding window of length ``window_len``.

    Requires ``len(codes) >= window_len``; the distinct count is maintained
    incrementally so each step is O(1).
    """
    n = len(codes)
    counts = [0] * n_vocab
    distinct = 0
    for i in range(window_len):
        c = codes[i]
        counts[c] += 1
        if counts[c] == 1:
            distinct += 1
    distinct_total = distinct
    for right in range(window_len, n):
        c_in = codes[right]
        counts[c_in] += 1
        if counts[c_in] == 1:
            distinct += 1
        c_out = codes[right - window_len]
        counts[c_out] -= 1
        if counts[c_out] == 0:
            distinct -= 1
        distinct_total += distinct
    n_windows = n - window_len + 1
    return distinct_total / (n_windows * window_len)


def mtld_factors(codes: np.ndarray, n_vocab: int, threshold: float) -> float:
    """Factor score of one directional pass: full factors close when the
    running TTR drops below ``threshold``; a trailing partial factor counts
    fractionally as (1 - TTR) / (1 - threshold)."""
    stamp = [-1] * n_vocab
    generation = 0
    factors = 0.0
    distinct = 0
    length = 0
    ttr = 1.0
    for c in codes:
        length += 1
        if stamp[c] != generation:
            stamp[c] = generation
            distinct += 1
        ttr = distinct / length
        if ttr < threshold:
            factors += 1.0
            generation += 1
            distinct = 0
            length = 0
    if length > 0:
        factors += (1.0 - ttr) / (1.0 - threshold)
    return factors
