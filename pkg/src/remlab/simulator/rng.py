"""Keyed counter-based random streams.

Every random quantity in a simulation is drawn from a Philox generator
whose key is a hash of (master seed, replica, purpose, level, ...).  The
streams are therefore independent of traversal order, worker count and of
how consumers chunk their draws (Philox generators fill arrays
sequentially, so drawing 13+7 values equals drawing 20).
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream"]


def stream(seed: int, *path) -> np.random.Generator:
    """A fresh generator for the given (seed, *path) address."""
    tag = repr((int(seed),) + tuple(path)).encode()
    digest = hashlib.sha256(tag).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
