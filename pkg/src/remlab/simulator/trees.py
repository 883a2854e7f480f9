"""Deterministic and random level trees over the configuration space.

A tree of height n assigns to each level a number of children per node:
fixed powers of two (the deterministic GREM), one Poisson draw per level
(regular Poisson tree), one Poisson draw per node, or powers of two with
multinomially drawn exponents.  All random variants keep every furcation
count >= 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["TreeModel", "TreeStats", "RegularTree", "PerNodeTree",
           "partition", "build_tree", "multinomial_path"]

logger = logging.getLogger(__name__)

_NODE_CAP = 2 ** 27  # per-replica hard cap on materialized nodes
_MAX_RETRIES = 16

VARIANTS = ("fixed", "regular-poisson", "poisson", "multinomial1", "multinomial2")


def partition(N: int, p) -> tuple[int, ...]:
    """Largest-remainder split of N into len(p) parts, each >= 1.

    Remainder ties break toward the lowest index; a zero part steals one
    unit from the currently largest part (again lowest index first).
    Deterministic in all inputs.
    """
    p = [float(v) for v in p]
    n = len(p)
    if N < n:
        raise ValueError(f"cannot split N={N} into {n} positive parts")
    if any(v <= 0 for v in p):
        raise ValueError("proportions must be > 0")
    quota = [N * v / sum(p) for v in p]
    k = [int(math.floor(q)) for q in quota]
    remainder = [q - f for q, f in zip(quota, k)]
    deficit = N - sum(k)
    for idx in sorted(range(n), key=lambda i: (-remainder[i], i))[:deficit]:
        k[idx] += 1
    while any(v == 0 for v in k):
        zero = min(i for i in range(n) if k[i] == 0)
        donor = min(i for i in range(n) if k[i] == max(k))
        k[donor] -= 1
        k[zero] += 1
    return tuple(k)


@dataclass(frozen=True)
class TreeModel:
    """variant in {fixed, regular-poisson, poisson, multinomial1,
    multinomial2} plus the base level proportions."""

    variant: str
    p: tuple[float, ...]

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown tree variant {self.variant!r}")
        if len(self.p) < 1 or any(v <= 0 for v in self.p):
            raise ValueError("proportions must be > 0")


@dataclass(frozen=True)
class TreeStats:
    """Per-level node counts, squared-leaf-count sums, and the leaf count."""

    branch_counts: tuple[int, ...]  # B_i, number of nodes at level i
    sq_leaf_sums: tuple[float, ...]  # s2_i = sum over level-i nodes of e(node)^2
    leaves: int  # B_N = B_n

    def __post_init__(self):
        if self.branch_counts[-1] != self.leaves:
            raise ValueError("leaf count must equal the last branch count")


@dataclass(frozen=True)
class RegularTree:
    """Same number of children for every node of a level."""

    children: tuple[int, ...]  # children per node, by level

    @property
    def n(self) -> int:
        return len(self.children)

    def level_sizes(self) -> tuple[int, ...]:
        sizes = []
        acc = 1
        for m in self.children:
            acc *= m
            sizes.append(acc)
        return tuple(sizes)

    def stats(self) -> TreeStats:
        sizes = self.level_sizes()
        leaves = sizes[-1]
        s2 = tuple(b * (leaves / b) ** 2 for b in sizes)
        return TreeStats(sizes, s2, leaves)


@dataclass(frozen=True)
class PerNodeTree:
    """Explicit per-node child counts.

    ``counts[i]`` holds one entry per level-i node (level 0 is the root,
    so ``counts[0]`` has length 1); its values are the numbers of level
    (i+1) children.  The tree has ``len(counts)`` levels below the root.
    """

    counts: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.counts)

    def level_sizes(self) -> tuple[int, ...]:
        return tuple(int(c.sum()) for c in self.counts)

    def parent_offsets(self, level: int) -> np.ndarray:
        """CSR offsets grouping level-``level`` nodes by their parents."""
        c = self.counts[level - 1]
        out = np.zeros(len(c) + 1, dtype=np.int64)
        np.cumsum(c, out=out[1:])
        return out

    def stats(self) -> TreeStats:
        sizes = self.level_sizes()
        leaves = sizes[-1]
        e = np.ones(leaves)
        s2 = [float(leaves)]
        for level in range(self.n, 1, -1):
            off = self.parent_offsets(level)
            e = np.add.reduceat(e, off[:-1])
            s2.append(float(np.sum(e * e)))
        s2.reverse()
        return TreeStats(sizes, tuple(s2), leaves)


def multinomial_path(p, N: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Counts of each face in the first N throws of one die sequence.

    Drawing the throws explicitly (rather than a multinomial vector)
    keeps the counts nested across N within one stream, which is what the
    first-kind multinomial tree uses along an N-list.
    """
    throws = rng.choice(len(p), size=N, p=np.asarray(p) / sum(p))
    return tuple(int(np.sum(throws == i)) for i in range(len(p)))


def build_tree(model: TreeModel, N: int, rng: np.random.Generator):
    """Realize a tree for the N-particle system; returns (tree, stats).

    Per-node Poisson draws can blow past the node cap; such replicas are
    retried on a fresh substream and the retry is logged.
    """
    k = partition(N, model.p)
    if model.variant == "fixed":
        tree = RegularTree(tuple(2 ** v for v in k))
        return tree, tree.stats()
    if model.variant == "regular-poisson":
        children = tuple(1 + int(rng.poisson(2.0 ** v)) for v in k)
        tree = RegularTree(children)
        return tree, tree.stats()
    if model.variant in ("multinomial1", "multinomial2"):
        if model.variant == "multinomial2":
            # fresh throws for every (stream, N) pair: the first kind rides
            # one die sequence (counts nested across N), the second redraws
            salt = int(rng.integers(2 ** 62))
            key = np.array([salt, N], dtype=np.uint64)
            rng = np.random.Generator(np.random.Philox(key=key))
        counts = multinomial_path(model.p, N, rng)
        tree = RegularTree(tuple(2 ** v for v in counts))
        return tree, tree.stats()
    if model.variant == "poisson":
        for _attempt in range(_MAX_RETRIES):
            counts: list[np.ndarray] = []
            width = 1
            total = 1
            ok = True
            for v in k:
                draw = 1 + rng.poisson(2.0 ** v, size=width).astype(np.int64)
                counts.append(draw)
                width = int(draw.sum())
                total += width
                if total > _NODE_CAP:
                    ok = False
                    break
            if ok:
                tree = PerNodeTree(tuple(counts))
                return tree, tree.stats()
            logger.warning("poisson tree exceeded %d nodes; retrying", _NODE_CAP)
        raise RuntimeError("poisson tree draw exceeded the node cap repeatedly")
    raise ValueError(f"unknown tree variant {model.variant!r}")
