"""Non-hierarchical (subset-indexed) GREM free energies.

A ``BkSpec`` attaches weights to arbitrary non-empty subsets of the level
index set.  Its free energy equals the minimum over all n! level
permutations of an ordinary tree-GREM energy with grouped subset weights
(``bk_energy_min``); for the Gaussian family the same value comes out of
the chain construction (``bk_chain`` / ``bk_energy_chain``), which also
identifies the surviving permutation class.  ``block_tree_energy`` is the
max-over-permutations sibling model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

from .analytic_grem import GremSpec, grem_energy_exp, grem_energy_gamma
from .rates import LOG2

__all__ = [
    "BkSpec",
    "ChainResult",
    "pi_grem",
    "bk_energy_min",
    "bk_chain",
    "bk_energy_chain",
    "block_tree_energy",
]

_MAX_N = 8  # n! permutation scans stay desk-scale up to 8 symbols


def _canonical_weights(weights) -> dict[tuple[int, ...], float]:
    out: dict[tuple[int, ...], float] = {}
    for key, value in weights.items():
        if isinstance(key, str):
            subset = tuple(sorted(int(tok) for tok in key.split(",")))
        else:
            subset = tuple(sorted(int(i) for i in key))
        if len(subset) == 0 or len(set(subset)) != len(subset):
            raise ValueError(f"subset key {key!r} must be a non-empty set")
        if float(value) < 0:
            raise ValueError("subset weights must be >= 0")
        if subset in out:
            raise ValueError(f"duplicate subset key {key!r}")
        out[subset] = float(value)
    return out


@dataclass(frozen=True)
class BkSpec:
    """Subset-weighted spec: symbols 1..n, proportions p, weights a_s."""

    n: int
    p: tuple[float, ...]
    weights: tuple[tuple[tuple[int, ...], float], ...]
    gamma: float = 2.0  # 2 = Gaussian driving family

    def __post_init__(self):
        if not 1 <= self.n <= _MAX_N:
            raise ValueError(f"n must lie in 1..{_MAX_N}")
        if len(self.p) != self.n or any(q <= 0 for q in self.p):
            raise ValueError("need n strictly positive proportions")
        if abs(sum(self.p) - 1.0) > 1e-12:
            raise ValueError("proportions must sum to 1")
        for subset, _ in self.weights:
            if any(not 1 <= i <= self.n for i in subset):
                raise ValueError(f"subset {subset} out of range 1..{self.n}")
        if not any(a > 0 for _, a in self.weights):
            raise ValueError("at least one subset weight must be > 0")
        if self.gamma < 1.0:
            raise ValueError("driving family must have gamma >= 1")

    @classmethod
    def make(cls, n: int, p, weights, gamma: float = 2.0) -> "BkSpec":
        canon = _canonical_weights(weights)
        return cls(n, tuple(float(v) for v in p),
                   tuple(sorted(canon.items())), float(gamma))

    @property
    def weight_map(self) -> dict[tuple[int, ...], float]:
        return dict(self.weights)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": list(self.p),
            "weights": {",".join(str(i) for i in s): a for s, a in self.weights},
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BkSpec":
        return cls.make(int(d["n"]), d["p"], d["weights"], float(d.get("gamma", 2.0)))


def _grouped_weight(spec: BkSpec, known: frozenset, new: frozenset, norm: float) -> float:
    """(sum of a_s^norm over s inside known|new but not inside known)^(1/norm)."""
    merged = known | new
    total = 0.0
    for subset, a in spec.weights:
        s = frozenset(subset)
        if a > 0 and s <= merged and not s <= known:
            total += a ** norm
    return total ** (1.0 / norm)


def pi_grem(spec: BkSpec, pi) -> GremSpec:
    """The n-level GREM hidden behind a level permutation.

    Level i gets proportion p_{pi(i)} and weight w(pi, i) with
    w^2 = sum of a_s^2 over subsets inside {pi(1..i)} containing pi(i).
    """
    pi = tuple(int(i) for i in pi)
    if sorted(pi) != list(range(1, spec.n + 1)):
        raise ValueError("pi must be a permutation of 1..n")
    p_levels = tuple(spec.p[i - 1] for i in pi)
    w = []
    for i in range(1, spec.n + 1):
        known = frozenset(pi[: i - 1])
        w.append(_grouped_weight(spec, known, frozenset({pi[i - 1]}), 2.0))
    return GremSpec.uniform(p_levels, tuple(w), spec.gamma)


def _pi_energy(spec: BkSpec, pi, beta: float) -> float:
    """Energy of the permutation GREM; non-Gaussian gamma combines subset
    weights in the conjugate-exponent norm (the Hoelder step of the
    grouping argument), which reduces to the l2 norm at gamma = 2."""
    g = spec.gamma
    if g == 2.0:
        level_spec = pi_grem(spec, pi)
    else:
        pi = tuple(int(i) for i in pi)
        norm = math.inf if g == 1.0 else g / (g - 1.0)
        w = []
        for i in range(1, spec.n + 1):
            known = frozenset(pi[: i - 1])
            if math.isinf(norm):
                merged = known | {pi[i - 1]}
                w.append(max((a for s, a in spec.weights
                              if frozenset(s) <= merged and not frozenset(s) <= known),
                             default=0.0))
            else:
                w.append(_grouped_weight(spec, known, frozenset({pi[i - 1]}), norm))
        level_spec = GremSpec.uniform(tuple(spec.p[i - 1] for i in pi), tuple(w), g)
    if g == 1.0:
        return grem_energy_exp(level_spec, beta)
    return grem_energy_gamma(level_spec, beta)


def bk_energy_min(spec: BkSpec, beta: float) -> float:
    """min over all n! permutations of the hidden-GREM energy."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return min(_pi_energy(spec, pi, beta)
               for pi in permutations(range(1, spec.n + 1)))


@dataclass(frozen=True)
class ChainResult:
    """Increasing sets G_1 c ... c G_K = I with freezing thresholds.

    ``surviving_blocks`` is the ordered partition (G_1, G_2-G_1, ...); the
    permutations realizing the minimum are exactly those laying out the
    blocks in order, so their count is the product of block factorials.
    """

    sets: tuple[tuple[int, ...], ...]
    thresholds: tuple[float, ...]

    def __post_init__(self):
        prev: frozenset = frozenset()
        for s in self.sets:
            if not prev < frozenset(s):
                raise ValueError("chain sets must strictly increase")
            prev = frozenset(s)
        if any(b2 <= b1 for b1, b2 in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must strictly increase")

    @property
    def K(self) -> int:
        return len(self.sets)

    @property
    def surviving_blocks(self) -> tuple[tuple[int, ...], ...]:
        blocks = []
        prev: frozenset = frozenset()
        for s in self.sets:
            blocks.append(tuple(sorted(frozenset(s) - prev)))
            prev = frozenset(s)
        return tuple(blocks)

    @property
    def minimizing_permutation_count(self) -> int:
        out = 1
        for block in self.surviving_blocks:
            out *= math.factorial(len(block))
        return out


def bk_chain(spec: BkSpec) -> ChainResult:
    """Gaussian chain construction.

    At each step the next threshold is min over non-empty T outside the
    current set G of sqrt(2 p_T log2 / (w2(G|T) - w2(G))); the new set is
    G united with every argmin T, and the grouped ratio at that union is
    asserted to equal the threshold (it does, by the merging lemma).
    Steps whose every candidate ratio is infinite (no remaining weight)
    absorb the rest of the symbols without a new threshold.
    """
    if spec.gamma != 2.0:
        raise ValueError("the chain construction is for the Gaussian family")
    full = frozenset(range(1, spec.n + 1))
    w2 = {frozenset(s): 0.0 for s in _powerset(full)}
    for subset, a in spec.weights:
        for sup in w2:
            if frozenset(subset) <= sup:
                w2[sup] += a * a

    def ratio(g: frozenset, t: frozenset) -> float:
        dw = w2[g | t] - w2[g]
        if dw <= 0.0:
            return math.inf
        p_t = sum(spec.p[i - 1] for i in t)
        return math.sqrt(2.0 * p_t * LOG2 / dw)

    sets: list[tuple[int, ...]] = []
    thresholds: list[float] = []
    g: frozenset = frozenset()
    while g != full:
        candidates = [t for t in _powerset(full - g) if t]
        best = math.inf
        winners: list[frozenset] = []
        for t in candidates:
            r = ratio(g, t)
            if r < best * (1.0 - 1e-12):
                best, winners = r, [t]
            elif r <= best * (1.0 + 1e-12):
                winners.append(t)
        if math.isinf(best):
            # no remaining weight: the rest never freezes
            break
        union = frozenset().union(*winners)
        merged_ratio = ratio(g, union)
        if abs(merged_ratio - best) > 1e-9 * max(1.0, best):
            raise AssertionError("maximal-union ratio differs from the minimum")
        g = g | union
        sets.append(tuple(sorted(g)))
        thresholds.append(best)
    if g != full:
        sets.append(tuple(sorted(full)))
        # no threshold recorded: remaining symbols carry no weight
    return ChainResult(tuple(sets), tuple(thresholds))


def _powerset(items: frozenset):
    items = sorted(items)
    out = [frozenset()]
    for i in items:
        out += [s | {i} for s in out]
    return out


def bk_energy_chain(spec: BkSpec, beta: float) -> float:
    """Chain formula: on [beta_j, beta_{j+1}) the frozen blocks contribute
    linearly through their thresholds, the rest quadratically."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    chain = bk_chain(spec)
    w_total = sum(a * a for _, a in spec.weights)
    j = sum(1 for b in chain.thresholds if b <= beta)
    g_j: frozenset = frozenset(chain.sets[j - 1]) if j > 0 else frozenset()
    p_out = sum(spec.p[i - 1] for i in range(1, spec.n + 1) if i not in g_j)
    w2_in = 0.0
    frozen = 0.0
    prev: frozenset = frozenset()
    for l in range(j):
        cur = frozenset(chain.sets[l])
        block_w2 = sum(a * a for s, a in spec.weights
                       if frozenset(s) <= cur and not frozenset(s) <= prev)
        frozen += chain.thresholds[l] * block_w2
        w2_in += block_w2
        prev = cur
    return p_out * LOG2 + beta * frozen + 0.5 * beta * beta * (w_total - w2_in)


def block_tree_energy(p, a, beta: float, gamma: float = 2.0) -> float:
    """max over permutations of the per-level-weight GREM energy."""
    p = tuple(float(v) for v in p)
    a = tuple(float(v) for v in a)
    if len(p) > _MAX_N:
        raise ValueError(f"n must be <= {_MAX_N}")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    best = -math.inf
    for pi in permutations(range(len(p))):
        spec = GremSpec.uniform(tuple(p[i] for i in pi), tuple(a[i] for i in pi), gamma)
        e = grem_energy_exp(spec, beta) if gamma == 1.0 else grem_energy_gamma(spec, beta)
        best = max(best, e)
    return best
