"""Backend selection for the Boolean matrix kernels.

The compiled extension is used when it was built; setting
``MONOPRUNE_PURE_PYTHON=1`` forces the pure-Python kernels.
"""

import os

from monoprune import _pykernels

if os.environ.get("MONOPRUNE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from monoprune import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND
ones_row = _impl.ones_row
mat_or = _impl.mat_or
mat_and = _impl.mat_and
mat_mul = _impl.mat_mul
mat_closure = _impl.mat_closure
mat_complement = _impl.mat_complement
mat_leq = _impl.mat_leq

__all__ = [
    "BACKEND",
    "ones_row",
    "mat_or",
    "mat_and",
    "mat_mul",
    "mat_closure",
    "mat_complement",
    "mat_leq",
]
