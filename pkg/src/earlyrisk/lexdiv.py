"""The eight lexical-diversity statistics over a word-token sequence.

Callers pass lowercased word tokens (no punctuation).  TTR, root TTR,
log TTR, Maas and HD-D are order-free; MSTTR, MATTR and MTLD are
order-sensitive by design.  The segment/window loops run on the compiled
kernel backend when available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DomainError


@dataclass(frozen=True)
class LexDivConfig:
    segment_len: int = 50
    window_len: int = 50
    hdd_sample: int = 42
    mtld_threshold: float = 0.72

    def __post_init__(self):
        if self.segment_len < 1 or self.window_len < 1 or self.hdd_sample < 1:
            raise DomainError("segment_len, window_len and hdd_sample must be positive")
        if not 0.0 < self.mtld_threshold < 1.0:
            raise DomainError("mtld_threshold must lie in (0, 1)")


@dataclass(frozen=True)
class LexDivScores:
    ttr: float
    root_ttr: float
    log_ttr: float
    maas: float
    msttr: float
    mattr: float
    hdd: float
    mtld: float

    FIELDS = ("ttr", "root_ttr", "log_ttr", "maas", "msttr", "mattr", "hdd", "mtld")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.ttr, self.root_ttr, self.log_ttr, self.maas,
                self.msttr, self.mattr, self.hdd, self.mtld)


def _encode(tokens: Sequence[str]) -> tuple[np.ndarray, int]:
    lookup: dict[str, int] = {}
    codes = np.empty(len(tokens), dtype=np.int64)
    for i, token in enumerate(tokens):
        code = lookup.get(token)
        if code is None:
            code = len(lookup)
            lookup[token] = code
        codes[i] = code
    return codes, len(lookup)


def _log_choose(n: int, k: int) -> float:
    """ln C(n, k); requires 0 <= k <= n."""
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def hdd_score(codes: np.ndarray, n_vocab: int, sample_size: int) -> float:
    """HD-D: summed per-type contributions to the expected TTR of a
    hypergeometric sample of ``sample_size`` tokens.

    Binomials are evaluated in log space so counts around 10^4 cannot
    overflow.  With the sample as large as the text this reduces exactly
    to plain TTR, and that identity is preserved bit-for-bit.
    """
    n = len(codes)
    s = min(sample_size, n)
    if s >= n:
        return n_vocab / n
    type_counts = np.bincount(codes, minlength=n_vocab)
    log_denominator = _log_choose(n, s)
    total = 0.0
    for count in type_counts:
        remaining = n - int(count)
        if s > remaining:
            p_absent = 0.0
        else:
            p_absent = math.exp(_log_choose(remaining, s) - log_denominator)
        total += 1.0 - p_absent
    return total / s


def mtld_score(codes: np.ndarray, n_vocab: int, threshold: float) -> float:
    """Mean of the forward and reverse MTLD passes; a pass with factor
    score 0 (TTR never dropped below the threshold) evaluates to N."""
    n = len(codes)
    values = []
    for direction in (codes, codes[::-1].copy()):
        factors = kernels.mtld_factors(direction, n_vocab, threshold)
        values.append(n / factors if factors > 0.0 else float(n))
    return (values[0] + values[1]) / 2.0


def lexdiv(tokens: Sequence[str], cfg: LexDivConfig | None = None) -> LexDivScores:
    if cfg is None:
        cfg = LexDivConfig()
    n = len(tokens)
    if n == 0:
        raise DomainError("lexdiv requires at least one token")
    codes, n_vocab = _encode(tokens)
    v = n_vocab

    ttr = v / n
    root_ttr = v / math.sqrt(n)
    if n == 1:
        log_ttr = 1.0
        maas = 0.0
    else:
        log_n = math.log(n)
        log_ttr = math.log(v) / log_n
        maas = (log_n - math.log(v)) / (log_n * log_n)

    if n < cfg.segment_len:
        msttr = ttr
    else:
        total, n_segments = kernels.msttr_sum(codes, n_vocab, cfg.segment_len)
        msttr = total / n_segments

    if n <= cfg.window_len:
        mattr = ttr
    else:
        mattr = kernels.mattr_mean(codes, n_vocab, cfg.window_len)

    return LexDivScores(
        ttr=ttr,
        root_ttr=root_ttr,
        log_ttr=log_ttr,
        maas=maas,
        msttr=msttr,
        mattr=mattr,
        hdd=hdd_score(codes, n_vocab, cfg.hdd_sample),
        mtld=mtld_score(codes, n_vocab, cfg.mtld_threshold),
    )
