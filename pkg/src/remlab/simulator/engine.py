"""Finite-N partition-function runs: exact enumeration and replica studies.

Per replica, node variables are drawn from keyed counter-based streams
(one stream per level), the Hamiltonian is accumulated bottom-up over the
tree, and (1/N) log Z is computed with grouped streaming log-sum-exp so
nothing larger than a slab is ever materialized.  Subset- and
word-indexed models enumerate the 2^N configurations by broadcasting the
projected variable arrays.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..analytic_bk import BkSpec
from ..analytic_grem import GremSpec
from ..external_field import WordSpec
from ..rates import DrivingDistribution, rate_from_descriptor
from .rng import stream
from .trees import RegularTree, TreeModel, TreeStats, build_tree, partition

__all__ = ["RemModel", "SimResult", "BudgetError", "simulate", "model_descriptor"]

MAX_ENUM = 2 ** 26
_SLAB = 2 ** 21


class BudgetError(RuntimeError):
    """Enumeration budget exceeded; carries the required configuration count."""

    def __init__(self, required: int, budget: int):
        super().__init__(
            f"enumeration needs {required} configurations, budget is {budget}; "
            "request sampling mode")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class RemModel:
    """Single-level REM driven by an arbitrary rate family, weight a."""

    rate_desc: dict
    a: float = 1.0

    @property
    def p(self) -> tuple[float, ...]:
        return (1.0,)


def model_descriptor(model) -> dict:
    if isinstance(model, RemModel):
        return {"kind": "rem", "rate": model.rate_desc, "a": model.a}
    if isinstance(model, GremSpec):
        return {"kind": "grem", **model.to_dict()}
    if isinstance(model, BkSpec):
        return {"kind": "bk", **model.to_dict()}
    if isinstance(model, WordSpec):
        return {"kind": "word", **model.to_dict()}
    raise TypeError(f"unsupported model {type(model).__name__}")


@dataclass(frozen=True)
class SimResult:
    """Per-(beta, replica) values of (1/N) log Z_N plus tree statistics."""

    model: dict
    N: int
    seed: int
    betas: tuple[float, ...]
    values: np.ndarray  # shape (replicas, len(betas))
    tree_stats: tuple[TreeStats, ...] | None = None

    @property
    def replicas(self) -> int:
        return self.values.shape[0]

    def mean(self) -> np.ndarray:
        return self.values.mean(axis=0)

    def std(self) -> np.ndarray:
        if self.replicas < 2:
            return np.zeros(len(self.betas))
        return self.values.std(axis=0, ddof=1)

    def to_csv(self) -> str:
        name = self.model.get("kind", "model")
        rows = ["model,N,seed,replica,beta,logZ_over_N"]
        for r in range(self.replicas):
            for b, v in zip(self.betas, self.values[r]):
                rows.append(f"{name},{self.N},{self.seed},{r},{b:.17g},{v:.17g}")
        return "\n".join(rows) + "\n"

    def to_json(self) -> str:
        return json.dumps({
            "model": self.model,
            "N": self.N,
            "seed": self.seed,
            "betas": list(self.betas),
            "values": [[float(v) for v in row] for row in self.values],
            "mean": [float(v) for v in self.mean()],
            "std": [float(v) for v in self.std()],
        })


def _worker_count() -> int:
    env = os.environ.get("REMLAB_THREADS", "")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# Per-level samplers
# ---------------------------------------------------------------------------


def _level_sampler(gamma: float, N: int):
    """Normalized driving sampler for one shape parameter.

    gamma = 2 and 1 take the direct normal / Laplace path (the same laws
    the generalized-gamma transform produces, drawn in fewer variates).
    """
    if gamma == 2.0:
        sd = 1.0 / math.sqrt(N)
        return lambda rng, size: rng.normal(0.0, sd, size=size)
    if gamma == 1.0:
        return lambda rng, size: rng.laplace(0.0, 1.0 / N, size=size)

    def draw(rng, size):
        scale = gamma * N ** (gamma - 1.0)
        mag = (rng.standard_gamma(1.0 / gamma, size=size) * scale) ** (1.0 / gamma)
        signs = rng.integers(0, 2, size=size) * 2 - 1
        return signs * mag / N

    return draw


def _grem_levels(model, N: int):
    """List of (weight, sampler) pairs for tree-structured models."""
    if isinstance(model, RemModel):
        dist = DrivingDistribution(rate_from_descriptor(model.rate_desc), N)
        return [(model.a, lambda rng, size: dist.sample_normalized(rng, size))]
    if isinstance(model, GremSpec):
        return [(model.a[i], _level_sampler(model.gammas[i], N))
                for i in range(model.n)]
    raise TypeError("tree simulation expects a RemModel or GremSpec")


# ---------------------------------------------------------------------------
# Tree-structured enumeration
# ---------------------------------------------------------------------------


def _leaf_offsets(tree, sizes):
    """CSR offsets of leaves grouped by their level-(n-1) parents."""
    if tree.n == 1:
        return np.array([0, sizes[-1]], dtype=np.int64)
    if isinstance(tree, RegularTree):
        m = tree.children[-1]
        return np.arange(sizes[-2] + 1, dtype=np.int64) * m
    return tree.parent_offsets(tree.n)


def _reduce_level(acc: np.ndarray, tree, level: int) -> np.ndarray:
    """Group level-``level`` values by their parents (level >= 2)."""
    if isinstance(tree, RegularTree):
        return _kernels.grouped_logsumexp_equal(acc, tree.children[level - 1])
    return _kernels.grouped_logsumexp(acc, tree.parent_offsets(level))


def _tree_logz(levels, tree, N, betas, seed, replica) -> np.ndarray:
    """(1/N) log Z at every beta for one realized tree."""
    sizes = tree.level_sizes()
    n = tree.n
    nb = len(betas)
    betas = np.asarray(betas, dtype=float)

    # Upper levels are materialized; the leaf level is streamed in slabs.
    xs = [levels[i][1](stream(seed, "vars", replica, i), sizes[i])
          for i in range(n - 1)]
    leaf_rng = stream(seed, "vars", replica, n - 1)
    a_leaf, leaf_draw = levels[n - 1]
    offsets = _leaf_offsets(tree, sizes)
    n_parents = len(offsets) - 1

    reduced = np.empty((nb, n_parents))
    lo = 0  # leaf index reached so far (draws are sequential)
    g = 0
    while g < n_parents:
        # batch whole parents up to the slab size
        g_end = g
        while g_end < n_parents and offsets[g_end + 1] - offsets[g] <= _SLAB:
            g_end += 1
        if g_end == g:  # single parent larger than one slab: stream it
            hi = offsets[g + 1]
            run_max = np.full(nb, -np.inf)
            run_sum = np.zeros(nb)
            while lo < hi:
                take = min(_SLAB, hi - lo)
                x = leaf_draw(leaf_rng, take)
                for bi in range(nb):
                    vals = (-betas[bi] * N * a_leaf) * x
                    m = max(float(vals.max()), run_max[bi])
                    run_sum[bi] = run_sum[bi] * math.exp(run_max[bi] - m) + float(
                        np.exp(vals - m).sum())
                    run_max[bi] = m
                lo += take
            reduced[:, g] = run_max + np.log(run_sum)
            g += 1
            continue
        count = int(offsets[g_end] - offsets[g])
        x = leaf_draw(leaf_rng, count)
        local = offsets[g:g_end + 1] - offsets[g]
        equal = isinstance(tree, RegularTree)
        for bi in range(nb):
            vals = (-betas[bi] * N * a_leaf) * x
            if equal:
                reduced[bi, g:g_end] = _kernels.grouped_logsumexp_equal(
                    vals, tree.children[-1])
            else:
                reduced[bi, g:g_end] = _kernels.grouped_logsumexp(
                    vals, local.astype(np.int64))
        lo += count
        g = g_end

    out = np.empty(nb)
    for bi in range(nb):
        acc = reduced[bi]
        for level in range(n - 1, 0, -1):
            acc = acc + (-betas[bi] * N * levels[level - 1][0]) * xs[level - 1]
            if level >= 2:
                acc = _reduce_level(acc, tree, level)
        out[bi] = _kernels.grouped_logsumexp(
            acc, np.array([0, len(acc)], dtype=np.int64))[0] / N
    return out


def _tree_logz_sampled(levels, tree, N, betas, seed, replica,
                       samples: int) -> np.ndarray:
    """Uniform-configuration estimate (1/N) log((B_N/M) sum e^{-beta H}).

    Upper-level variables are exact; sampled leaves draw fresh variables
    (collisions are vanishingly rare at enumeration-exceeding sizes).
    Biased low at large beta; meant for convergence diagnostics only.
    """
    sizes = tree.level_sizes()
    n = tree.n
    rng = stream(seed, "sample", replica)
    xs = [levels[i][1](stream(seed, "vars", replica, i), sizes[i])
          for i in range(n - 1)]
    if not isinstance(tree, RegularTree):
        raise NotImplementedError("sampling mode supports regular trees only")
    leaf_rng = stream(seed, "vars", replica, n - 1)
    h = np.zeros(samples)
    idx = np.zeros(samples, dtype=np.int64)
    for level in range(n):
        child = rng.integers(0, tree.children[level], size=samples)
        idx = idx * tree.children[level] + child
        if level < n - 1:
            h += levels[level][0] * xs[level][idx]
        else:
            h += levels[level][0] * levels[n - 1][1](leaf_rng, samples)
    out = np.empty(len(betas))
    log_count = math.log(sizes[-1]) - math.log(samples)
    for bi, beta in enumerate(betas):
        vals = -beta * N * h
        m = float(vals.max())
        out[bi] = (log_count + m + math.log(float(np.exp(vals - m).sum()))) / N
    return out


# ---------------------------------------------------------------------------
# Subset / word enumeration
# ---------------------------------------------------------------------------


def _spin_sums(k: int) -> np.ndarray:
    """sum of the k spins encoded by each integer in [0, 2^k)."""
    idx = np.arange(2 ** k, dtype=np.int64)
    pop = np.zeros(2 ** k, dtype=np.int64)
    for bit in range(k):
        pop += (idx >> bit) & 1
    return (2 * pop - k).astype(float)


def _word_variables(model, N, k, seed, replica):
    """Draw one variable array per word, shaped for broadcasting.

    Streams are keyed by the word's content (plus an occurrence counter
    for repeated words), never by list position, and zero-weight words
    draw nothing: adding or removing them leaves every other draw - and
    hence the whole run - bit-identical.
    """
    n = len(k)
    if isinstance(model, BkSpec):
        entries = [(s, tuple(sorted(s)), a, model.gamma) for s, a in model.weights]
        h = 0.0
    else:
        entries = [(seq, tuple(sorted(set(seq))), a, 2.0) for seq, a in model.words]
        h = model.h
    arrays = []
    seen: dict[tuple, int] = {}
    for key, subset, a, gamma in entries:
        if a == 0.0:
            continue
        occurrence = seen.get(key, 0)
        seen[key] = occurrence + 1
        size = int(np.prod([2 ** k[i - 1] for i in subset]))
        rng = stream(seed, "vars", replica, "w", key, occurrence)
        draw = _level_sampler(gamma, N)(rng, size)
        shape = tuple(2 ** k[i - 1] if i in subset else 1 for i in range(1, n + 1))
        arrays.append((a, draw.reshape(shape)))
    return arrays, h


def _word_logz(model, N, betas, seed, replica) -> np.ndarray:
    p = model.p
    k = partition(N, p)
    n = len(k)
    arrays, h = _word_variables(model, N, k, seed, replica)
    lead = 2 ** k[0]
    rest_shape = tuple(2 ** v for v in k[1:])
    chunk = max(1, _SLAB // max(1, int(np.prod(rest_shape))))
    nb = len(betas)
    run_max = np.full(nb, -np.inf)
    run_sum = np.zeros(nb)
    spin = [_spin_sums(v) for v in k] if h > 0 else None
    for c0 in range(0, lead, chunk):
        c1 = min(lead, c0 + chunk)
        hshape = (c1 - c0,) + rest_shape
        ham = np.zeros(hshape)
        for a, arr in arrays:
            if a == 0.0:
                continue
            part = arr[c0:c1] if arr.shape[0] > 1 else arr
            ham = ham + (N * a) * part
        if spin is not None:
            for i, s in enumerate(spin):
                shape = [1] * n
                shape[i] = len(s)
                piece = s[c0:c1] if i == 0 else s
                if i == 0:
                    shape[0] = c1 - c0
                ham = ham + h * piece.reshape(shape)
        flat = ham.ravel()
        for bi, beta in enumerate(betas):
            vals = -beta * flat
            m = max(float(vals.max()), run_max[bi])
            run_sum[bi] = run_sum[bi] * math.exp(run_max[bi] - m) + float(
                np.exp(vals - m).sum())
            run_max[bi] = m
    return (run_max + np.log(run_sum)) / N


# ---------------------------------------------------------------------------
# Front door
# ---------------------------------------------------------------------------


def simulate(model, N: int, betas, *, replicas: int = 1, seed: int = 0,
             tree: TreeModel | None = None, mode: str = "enumerate",
             samples: int | None = None, budget: int = MAX_ENUM) -> SimResult:
    """Run a finite-N study; deterministic in (model, N, seed, replicas).

    ``model`` is a RemModel, GremSpec, BkSpec or WordSpec.  Tree-shaped
    models accept any TreeModel (default: the deterministic tree); subset
    and word models always enumerate the full 2^N space.  Enumeration
    requires at most ``budget`` configurations per replica; beyond that a
    :class:`BudgetError` is raised unless ``mode="sample"``.
    """
    betas = tuple(float(b) for b in betas)
    if any(b < 0 for b in betas):
        raise ValueError("beta must be >= 0")
    if isinstance(model, (BkSpec, WordSpec)):
        if tree is not None and tree.variant != "fixed":
            raise ValueError("subset/word models run on the deterministic tree")
        if 2 ** N > budget:
            raise BudgetError(2 ** N, budget)

        def one(replica: int):
            return _word_logz(model, N, betas, seed, replica), None
    else:
        levels = _grem_levels(model, N)
        tree_model = tree or TreeModel("fixed", tuple(
            model.p if isinstance(model, GremSpec) else (1.0,)))
        if len(tree_model.p) != len(levels):
            raise ValueError("tree proportions must match the model's level count")

        def one(replica: int):
            realized, stats = build_tree(tree_model, N, stream(seed, "tree", replica))
            leaves = realized.level_sizes()[-1]
            if mode == "enumerate":
                if leaves > budget:
                    raise BudgetError(leaves, budget)
                return _tree_logz(levels, realized, N, betas, seed, replica), stats
            if mode == "sample":
                m = samples or 2 ** 16
                return _tree_logz_sampled(levels, realized, N, betas, seed,
                                          replica, m), stats
            raise ValueError(f"unknown mode {mode!r}")

    values = np.empty((replicas, len(betas)))
    stats_list: list[TreeStats | None] = [None] * replicas
    workers = _worker_count()
    if workers == 1 or replicas == 1:
        results = map(one, range(replicas))
        for r, (vals, st) in enumerate(results):
            values[r] = vals
            stats_list[r] = st
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for r, (vals, st) in enumerate(pool.map(one, range(replicas))):
                values[r] = vals
                stats_list[r] = st
    tree_stats = None
    if any(st is not None for st in stats_list):
        tree_stats = tuple(st for st in stats_list if st is not None)
    return SimResult(model_descriptor(model), N, seed, betas, values, tree_stats)
