"""Kernel backend selection.

The compiled Cython extension is preferred; the pure-Python fallback is used
when the extension is missing or when ``EARLYRISK_PURE_KERNELS=1`` is set
(useful for benchmarking and debugging).  Both backends are numerically
identical: same algorithms, same operation order.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("EARLYRISK_PURE_KERNELS") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
msttr_sum = _impl.msttr_sum
mattr_mean = _impl.mattr_mean
mtld_factors = _impl.mtld_factors
