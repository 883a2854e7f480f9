"""Magnetized models: REM with external field and the Gaussian word GREM.

The field couples to the mean spin, whose large deviations are governed by
the binary entropy rate I0.  The Gaussian REM with field has a closed form
built from two scalar root-finding problems; the general word model only
has the constrained variational characterization, solved numerically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import minimize

from .analytic_rem import rem_gaussian
from .rates import LOG2

__all__ = [
    "FieldParams",
    "WordSpec",
    "binary_entropy_rate",
    "rem_field_energy",
    "rem_field_grid_oracle",
    "word_grem_energy",
]


def binary_entropy_rate(y: float) -> float:
    """I0(y) = ((1+y)/2) log(1+y) + ((1-y)/2) log(1-y); log 2 at y = +-1.

    Evaluated in the product form so the endpoints need no atanh; +inf
    outside [-1, 1].
    """
    if abs(y) > 1.0:
        return math.inf
    if abs(y) == 1.0:
        return LOG2
    return 0.5 * (1.0 + y) * math.log1p(y) + 0.5 * (1.0 - y) * math.log1p(-y)


@dataclass(frozen=True)
class FieldParams:
    """Gaussian REM with Hamiltonian a*N*xi + h * sum of spins."""

    a: float
    h: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be > 0")
        if self.h < 0:
            raise ValueError("h must be >= 0")


def _solve_y0(a: float, h: float) -> float:
    """Non-negative root of a*atanh(y) = h*sqrt(2(log2 - I0(y)))."""
    if h == 0.0:
        return 0.0

    def g(y: float) -> float:
        return a * math.atanh(y) - h * math.sqrt(max(2.0 * (LOG2 - binary_entropy_rate(y)), 0.0))

    lo, hi = 0.0, 1.0 - 1e-12
    if g(hi) <= 0.0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-12:
            break
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _solve_c_beta(a: float, beta: float) -> float:
    """Root of I0(c) = log2 - (beta*a)^2/2 for beta <= sqrt(2 log2)/a."""
    target = LOG2 - 0.5 * beta * beta * a * a
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-14:
            break
        if binary_entropy_rate(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def rem_field_energy(fp: FieldParams, beta: float) -> float:
    """Gaussian REM with external field.

    High-temperature branch log2 + (beta a)^2/2 + log cosh(beta h) while
    beta <= sqrt(2 log2)/a and y0 <= c_beta; otherwise the frozen value
    beta (a x0 + h y0) with x0 = sqrt(2 (log2 - I0(y0))).  The equivalent
    form x0 = a atanh(y0)/h is 0/0 at h = 0, so the sqrt form is used; it
    extends continuously to the plain Gaussian REM (weight a rescales the
    inverse temperature).
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    a, h = fp.a, fp.h
    if h == 0.0:
        return rem_gaussian(beta * a)
    y0 = _solve_y0(a, h)
    if beta * a <= math.sqrt(2.0 * LOG2):
        c_beta = _solve_c_beta(a, beta)
        if y0 <= c_beta:
            return LOG2 + 0.5 * beta * beta * a * a + _log_cosh(beta * h)
    x0 = math.sqrt(max(2.0 * (LOG2 - binary_entropy_rate(y0)), 0.0))
    return beta * (a * x0 + h * y0)


def _log_cosh(t: float) -> float:
    return np.logaddexp(t, -t) - LOG2


def rem_field_grid_oracle(fp: FieldParams, beta: float, *, rounds: int = 8,
                          num: int = 257) -> float:
    """Independent 2-D zoomed-grid value of the field variational problem:

        log2 - inf { x^2/2 + I0(y) - beta (a x + h y) } over
        { (x, y) in R+ x [0,1] : x^2/2 + I0(y) <= log2 }.

    The grid lives in box coordinates (s, y) in [0,1]^2 with
    x = s * sqrt(2 (log2 - I0(y))), so the curved feasibility boundary is
    the exact grid edge s = 1 and the zoom converges geometrically even
    onto boundary optima.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    a, h = fp.a, fp.h
    s_lo, s_hi = 0.0, 1.0
    y_lo, y_hi = 0.0, 1.0
    best = 0.0
    for _ in range(rounds):
        ss = np.linspace(s_lo, s_hi, num)
        ys = np.linspace(y_lo, y_hi, num)
        gs, gy = np.meshgrid(ss, ys, indexing="ij")
        yy = np.clip(gy, 0.0, 1.0 - 1e-16)
        i0 = 0.5 * (1.0 + yy) * np.log1p(yy) + 0.5 * (1.0 - yy) * np.log1p(-yy)
        i0[gy >= 1.0] = LOG2
        gx = gs * np.sqrt(np.maximum(2.0 * (LOG2 - i0), 0.0))
        vals = 0.5 * gx * gx + i0 - beta * (a * gx + h * gy)
        k = int(np.argmin(vals))
        best = min(best, float(vals.ravel()[k]))
        i_s, i_y = divmod(k, num)
        ds, dy = ss[1] - ss[0], ys[1] - ys[0]
        s_lo, s_hi = max(0.0, ss[i_s] - 2 * ds), min(1.0, ss[i_s] + 2 * ds)
        y_lo, y_hi = max(0.0, ys[i_y] - 2 * dy), min(1.0, ys[i_y] + 2 * dy)
    return LOG2 - best


# ---------------------------------------------------------------------------
# Word GREM
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordSpec:
    """Gaussian words over n symbols with an external field.

    Each word is a symbol sequence (repetitions allowed) with weight
    a_s >= 0; its variable is indexed by the projection onto the word's
    symbol *set*, which is also what the feasibility constraints see.
    """

    n: int
    words: tuple[tuple[tuple[int, ...], float], ...]  # (symbol sequence, weight)
    p: tuple[float, ...]
    h: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if len(self.p) != self.n or any(q <= 0 for q in self.p):
            raise ValueError("need n strictly positive proportions")
        if abs(sum(self.p) - 1.0) > 1e-12:
            raise ValueError("proportions must sum to 1")
        if self.h < 0:
            raise ValueError("h must be >= 0")
        covered = set()
        for seq, a in self.words:
            if len(seq) == 0:
                raise ValueError("words must be non-empty")
            if any(not 1 <= i <= self.n for i in seq):
                raise ValueError(f"word {seq} uses symbols outside 1..{self.n}")
            if a < 0:
                raise ValueError("word weights must be >= 0")
            covered |= set(seq)
        if covered != set(range(1, self.n + 1)):
            raise ValueError("every symbol must appear in some word")

    @classmethod
    def make(cls, n: int, words, p, h: float = 0.0) -> "WordSpec":
        return cls(n, tuple((tuple(int(i) for i in seq), float(a)) for seq, a in words),
                   tuple(float(v) for v in p), float(h))

    @property
    def sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(seq) for seq, _ in self.words)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "words": [{"sym": list(seq), "a": a} for seq, a in self.words],
            "p": list(self.p),
            "h": self.h,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WordSpec":
        return cls.make(int(d["n"]), [(w["sym"], w["a"]) for w in d["words"]],
                        d["p"], float(d.get("h", 0.0)))


_MAX_WORDS = 7
_MAX_SYMBOLS = 3


def word_grem_energy(ws: WordSpec, beta: float, *, starts: int = 24,
                     seed: int = 0) -> float:
    """Numeric free energy of the Gaussian word GREM with field.

    Minimizes sum_s (x_s^2/2 - beta a_s x_s) + sum_i (p_i I0(y_i/p_i)
    - beta h y_i) over the subset-budget region (constraints indexed by
    every non-empty A: words inside A plus the magnetizations of A's
    symbols must fit within p_A log 2).  Multi-start SLSQP from random
    feasible points; scale-capped at 3 symbols / 7 words.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if ws.n > _MAX_SYMBOLS or len(ws.words) > _MAX_WORDS:
        raise ValueError(
            f"oracle scale caps exceeded (n <= {_MAX_SYMBOLS}, words <= {_MAX_WORDS})")
    m = len(ws.words)
    n = ws.n
    a = np.array([w for _, w in ws.words])
    p = np.array(ws.p)
    word_sets = ws.sets
    h = ws.h

    def entropy_term(y):
        # sum_i p_i I0(y_i / p_i), smooth inside |y_i| < p_i
        u = np.clip(y / p, -1.0 + 1e-12, 1.0 - 1e-12)
        return float(np.sum(p * (0.5 * (1 + u) * np.log1p(u) + 0.5 * (1 - u) * np.log1p(-u))))

    def objective(z):
        x, y = z[:m], z[m:]
        return float(np.sum(0.5 * x * x - beta * a * x)) - beta * h * float(np.sum(y)) \
            + entropy_term(y)

    subsets = [frozenset(c) for r in range(1, n + 1)
               for c in combinations(range(1, n + 1), r)]

    def budget_slack(z, A):
        x, y = z[:m], z[m:]
        used = sum(0.5 * x[k] ** 2 for k in range(m) if word_sets[k] <= A)
        used += sum(p[i - 1] * binary_entropy_rate(
            min(max(y[i - 1] / p[i - 1], -1.0), 1.0)) for i in A)
        return sum(p[i - 1] for i in A) * LOG2 - used

    constraints = [{"type": "ineq", "fun": (lambda z, A=A: budget_slack(z, A))}
                   for A in subsets]
    bounds = [(0.0, math.sqrt(2.0 * LOG2))] * m + [(0.0, float(p[i]) * (1 - 1e-9)) for i in range(n)]

    rng = np.random.default_rng(seed)
    best = 0.0  # the origin is feasible with objective 0
    z_starts = [np.zeros(m + n)]
    # deterministic warm start: the unconstrained stationary point,
    # shrunk into the feasible region (exact in the high-temperature phase)
    warm = np.concatenate([np.minimum(beta * a, math.sqrt(2.0 * LOG2)),
                           p * math.tanh(beta * h)])
    for _ in range(60):
        if all(budget_slack(warm, A) >= 0 for A in subsets):
            z_starts.append(warm)
            break
        warm = warm * 0.85
    for _ in range(starts):
        z = np.concatenate([
            rng.uniform(0, math.sqrt(2.0 * LOG2) * 0.7, size=m),
            rng.uniform(0, 0.7, size=n) * p,
        ])
        # shrink into the feasible region
        for _ in range(60):
            if all(budget_slack(z, A) >= 0 for A in subsets):
                break
            z *= 0.8
        z_starts.append(z)
    for z0 in z_starts:
        with warnings.catch_warnings():
            # SLSQP clips iterates to the bounds and warns about it
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(objective, z0, method="SLSQP", bounds=bounds,
                           constraints=constraints,
                           options={"maxiter": 300, "ftol": 1e-12})
        if res.success or res.status == 8:  # 8: positive directional derivative
            feasible = all(budget_slack(res.x, A) >= -1e-9 for A in subsets)
            if feasible:
                best = min(best, float(res.fun))
    return LOG2 - best
