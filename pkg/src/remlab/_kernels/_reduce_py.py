"""NumPy reference implementation of the reduction kernels."""

import numpy as np


def grouped_logsumexp_equal(vals: np.ndarray, m: int, out: np.ndarray | None = None):
    """Log-sum-exp over consecutive groups of equal size m."""
    v = np.asarray(vals, dtype=np.float64).reshape(-1, m)
    mx = v.max(axis=1)
    res = mx + np.log(np.exp(v - mx[:, None]).sum(axis=1))
    if out is None:
        return res
    out[:] = res
    return out


def grouped_logsumexp(vals: np.ndarray, offsets: np.ndarray,
                      out: np.ndarray | None = None):
    """Log-sum-exp over CSR-style groups vals[offsets[g]:offsets[g+1]].

    Groups must be non-empty and cover the array.
    """
    vals = np.asarray(vals, dtype=np.float64)
    offsets = np.asarray(offsets)
    starts = offsets[:-1]
    counts = np.diff(offsets)
    mx = np.maximum.reduceat(vals, starts)
    shifted = np.exp(vals - np.repeat(mx, counts))
    sums = np.add.reduceat(shifted, starts)
    res = mx + np.log(sums)
    if out is None:
        return res
    out[:] = res
    return out
