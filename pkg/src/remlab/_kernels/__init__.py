"""Grouped log-sum-exp reduction kernels.

The compiled Cython kernel is preferred when the extension built; the
NumPy implementation is the fallback and the reference.  Setting
``REMLAB_PURE_PYTHON=1`` forces the fallback (used by the benchmark and
the equivalence tests).
"""

import os

from . import _reduce_py

if os.environ.get("REMLAB_PURE_PYTHON", "") == "1":
    _impl = _reduce_py
    BACKEND = "numpy"
else:
    try:
        from . import _reduce as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _reduce_py
        BACKEND = "numpy"

grouped_logsumexp = _impl.grouped_logsumexp
grouped_logsumexp_equal = _impl.grouped_logsumexp_equal

__all__ = ["grouped_logsumexp", "grouped_logsumexp_equal", "BACKEND"]
