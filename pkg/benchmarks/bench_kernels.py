"""Benchmark the compiled lexical-diversity kernels against the pure-Python
fallback on synthetic token streams.

Usage: python benchmarks/bench_kernels.py [--sizes 1000,10000,100000] [--vocab 2000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from earlyrisk import _kernels_py

try:
    from earlyrisk import _kernels_cy
except ImportError:
    _kernels_cy = None


def run_backend(impl, codes, n_vocab, repeats):
    timings = {}
    for name, call in (
        ("msttr", lambda: impl.msttr_sum(codes, n_vocab, 50)),
        ("mattr", lambda: impl.mattr_mean(codes, n_vocab, 50)),
        ("mtld", lambda: impl.mtld_factors(codes, n_vocab, 0.72)),
    ):
        best = float("inf")
        for _ in range(repeats):
            started = time.perf_counter()
            call()
            best = min(best, time.perf_counter() - started)
        timings[name] = best
    return timings


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1000,10000,100000",
                        help="comma-separated token counts")
    parser.add_argument("--vocab", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    rng = np.random.default_rng(0)
    print(f"{'n_tokens':>10} {'kernel':>7} {'pure (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}")
    for n in sizes:
        # Zipf-ish draw so the vocabulary is used unevenly, as in real text.
        codes = (rng.zipf(1.3, size=n) % args.vocab).astype(np.int64)
        pure = run_backend(_kernels_py, codes, args.vocab, args.repeats)
        compiled = run_backend(_kernels_cy, codes, args.vocab, args.repeats) if _kernels_cy else None
        for kernel in ("msttr", "mattr", "mtld"):
            pure_ms = pure[kernel] * 1e3
            if compiled is None:
                print(f"{n:>10} {kernel:>7} {pure_ms:>12.3f} {'n/a':>14} {'n/a':>8}")
            else:
                compiled_ms = compiled[kernel] * 1e3
                ratio = pure[kernel] / compiled[kernel] if compiled[kernel] else float("inf")
                print(f"{n:>10} {kernel:>7} {pure_ms:>12.3f} {compiled_ms:>14.3f} {ratio:>7.1f}x")

    if _kernels_cy is not None:
        # sanity: both backends agree bit for bit on a fresh draw
        codes = (rng.zipf(1.3, size=5000) % args.vocab).astype(np.int64)
        assert _kernels_py.mattr_mean(codes, args.vocab, 50) == _kernels_cy.mattr_mean(codes, args.vocab, 50)
        assert _kernels_py.mtld_factors(codes, args.vocab, 0.72) == _kernels_cy.mtld_factors(codes, args.vocab, 0.72)
        print("\nbackends agree bit-for-bit on a 5000-token draw")


if __name__ == "__main__":
    main()
