"""Closed-form limiting free energies for single-level random energy models.

The ground truth for everything here is the one-dimensional variational
formula

    E(beta) = log 2 - inf { beta f(x) + I(x) : I(x) <= log 2 },

implemented by ``rem_variational`` with a derivative-free solver (the
objective can have kinks, e.g. for shape parameters < 1).  The named
operations evaluate the explicit two-regime formulas and must agree with
the oracle to 1e-6; tests enforce that.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .curves import FreeEnergyCurve, Segment
from .rates import (
    LOG2,
    BinomialRate,
    GaussianRate,
    NegatedRate,
    PoissonRate,
    PowerGammaRate,
    RateFunction,
    TruncatedRate,
    TwoSidedExponentialRate,
    _bisect,
)

__all__ = [
    "rem_variational",
    "rem_gaussian",
    "rem_exponential",
    "rem_weibull",
    "weibull_threshold",
    "rem_poisson",
    "rem_binomial",
    "annealed_compact",
    "rem_truncated",
    "build_rem_curve",
    "rate_for_model",
]


def _objective(descriptor) -> Callable[[np.ndarray], np.ndarray]:
    """Map an objective descriptor to a vectorized f.

    Supported: "identity", "negation", "square", ("scale", c).
    """
    if callable(descriptor):
        return descriptor
    if descriptor == "identity":
        return lambda x: x
    if descriptor == "negation":
        return lambda x: -x
    if descriptor == "square":
        return lambda x: x * x
    if isinstance(descriptor, tuple) and descriptor[0] == "scale":
        c = float(descriptor[1])
        return lambda x: c * x
    raise ValueError(f"unsupported objective descriptor {descriptor!r}")


def rem_variational(rate: RateFunction, objective="identity", beta: float = 0.0,
                    *, tol: float = 1e-8) -> float:
    """log 2 - inf over {I <= log 2} of (beta*f + I), to ``tol`` absolute.

    Derivative-free: a 1001-point grid on the level set followed by four
    bracketed refinement rounds.  Grid endpoints stay exact so boundary
    minima (the frozen regimes) are hit exactly.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    f = _objective(objective)
    lo, hi = rate.level_set(LOG2)
    if not lo <= hi:
        raise RuntimeError("empty level set; rate invariants violated")
    if hi - lo < 1e-15:
        return LOG2 - (beta * float(f(np.asarray(lo))) + float(rate.evaluate(lo)))

    def h(x: np.ndarray) -> np.ndarray:
        return beta * f(x) + np.asarray(rate.evaluate(x), dtype=float)

    a, b = lo, hi
    best_val = math.inf
    for _ in range(5):
        xs = np.linspace(a, b, 1001)
        vals = h(xs)
        k = int(np.argmin(vals))
        best_val = min(best_val, float(vals[k]))
        a2 = xs[max(k - 1, 0)]
        b2 = xs[min(k + 1, len(xs) - 1)]
        if b2 - a2 <= tol * 1e-3:
            break
        a, b = a2, b2
    return LOG2 - best_val


def rem_gaussian(beta: float) -> float:
    """Gaussian REM: log 2 + beta^2/2 below sqrt(2 log 2), linear above."""
    bc = math.sqrt(2.0 * LOG2)
    if beta < bc:
        return LOG2 + 0.5 * beta * beta
    return beta * bc


def rem_exponential(beta: float) -> float:
    """Two-sided exponential REM: flat up to beta = 1, then beta*log2."""
    return LOG2 if beta < 1.0 else beta * LOG2


def weibull_threshold(gamma: float) -> float:
    """Inverse temperature where the two-sided Weibull REM freezes.

    For gamma > 1 the stationary point beta^(1/(gamma-1)) leaves the level
    set at (gamma log 2)^((gamma-1)/gamma); for gamma <= 1 the corner
    comparison gives gamma^(-1/gamma) (log 2)^(-(1-gamma)/gamma).  Both
    reduce to 1 at gamma = 1 and the first to sqrt(2 log 2) at gamma = 2.
    """
    if gamma > 1.0:
        return (gamma * LOG2) ** ((gamma - 1.0) / gamma)
    return gamma ** (-1.0 / gamma) * LOG2 ** (-(1.0 - gamma) / gamma)


def rem_weibull(gamma: float, beta: float) -> float:
    """REM with rate |x|^gamma / gamma (two-sided Weibull energies)."""
    if not gamma > 0:
        raise ValueError("gamma must be > 0")
    bc = weibull_threshold(gamma)
    edge = (gamma * LOG2) ** (1.0 / gamma)
    if beta >= bc:
        return beta * edge
    if gamma > 1.0:
        return LOG2 + (gamma - 1.0) / gamma * beta ** (gamma / (gamma - 1.0))
    return LOG2


def _poisson_left_root(theta: float) -> float:
    """Least positive solution of I(x) = log 2 for theta > log 2."""
    rate = PoissonRate(theta)
    return _bisect(lambda x: float(rate.evaluate(x)) - LOG2, 1e-300, theta)


def _poisson_right_root(theta: float) -> float:
    rate = PoissonRate(theta)
    hi = theta + 1.0
    while float(rate.evaluate(hi)) <= LOG2:
        hi *= 2.0
    return _bisect(lambda x: float(rate.evaluate(x)) - LOG2, theta, hi)


def rem_poisson(theta: float, sign: int, beta: float) -> float:
    """REM with Hamiltonian +/- Poisson(N theta).

    sign=+1: below the freezing point beta0 (which exists only for
    theta > log 2) the free energy is log2 - theta + theta e^{-beta};
    past it the variational formula gives -beta*x1 with I(x1) = log 2
    (the least positive root).  sign=-1 mirrors with x2 and beta1.
    """
    if not theta > 0:
        raise ValueError("theta must be > 0")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if sign == 1:
        if theta <= LOG2:
            return LOG2 - theta + theta * math.exp(-beta)
        x1 = _poisson_left_root(theta)
        beta0 = math.log(theta / x1)
        if beta <= beta0:
            return LOG2 - theta + theta * math.exp(-beta)
        # Value of the variational formula at the boundary point x1:
        # log2 - (beta*x1 + I(x1)) = -beta*x1.
        return -beta * x1
    if sign == -1:
        x2 = _poisson_right_root(theta)
        beta1 = math.log(x2 / theta)
        if beta <= beta1:
            return LOG2 - theta + theta * math.exp(beta)
        return beta * x2
    raise ValueError("sign must be +1 or -1")


def rem_binomial(p: float, sign: int, beta: float) -> float:
    """REM with Hamiltonian +/- Binomial(N, p)."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    rate = BinomialRate(p)
    if sign == 1:
        # stationary point xbar(beta) = p / (p + (1-p) e^beta), decreasing
        if p <= 0.5:
            return LOG2 - beta + math.log(p + (1.0 - p) * math.exp(beta))
        x1 = _bisect(lambda x: float(rate.evaluate(x)) - LOG2, 1e-300, p)
        # beta0 solves xbar(beta0) = x1; xbar is monotone in beta
        xbar = lambda b: p / (p + (1.0 - p) * math.exp(b))
        hi = 1.0
        while xbar(hi) > x1:
            hi *= 2.0
        beta0 = _bisect(lambda b: xbar(b) - x1, 0.0, hi)
        if beta <= beta0:
            return LOG2 - beta + math.log(p + (1.0 - p) * math.exp(beta))
        return -beta * x1
    if sign == -1:
        if p >= 0.5:
            return LOG2 + beta + math.log(p + (1.0 - p) * math.exp(-beta))
        x2 = _bisect(lambda x: float(rate.evaluate(x)) - LOG2, p, 1.0 - 1e-300)
        xlow = lambda b: p / (p + (1.0 - p) * math.exp(-b))
        hi = 1.0
        while xlow(hi) < x2:
            hi *= 2.0
        beta1 = _bisect(lambda b: xlow(b) - x2, 0.0, hi)
        if beta <= beta1:
            return LOG2 + beta + math.log(p + (1.0 - p) * math.exp(-beta))
        return beta * x2
    raise ValueError("sign must be +1 or -1")


def annealed_compact(alpha: float, beta: float) -> float:
    """Compact-support energies with sub-exponential tails: log 2 + alpha*beta.

    The tail condition (no exponential decay of the upper-tail mass) is
    assumed by the caller, not checked.  alpha = inf is allowed and gives
    +inf for beta > 0.
    """
    if alpha < 0 or beta < 0:
        raise ValueError("alpha and beta must be >= 0")
    if beta == 0.0:
        return LOG2
    return LOG2 + alpha * beta


def rem_truncated(kind: str, alpha: float, beta: float) -> float:
    """Truncated double-exponential / truncated Gaussian REM.

    ``alpha`` is the rate height at the truncation edge; for the
    exponential kind that equals the support half-width, for the Gaussian
    kind the half-width is sqrt(2 alpha).  For alpha >= log 2 the
    truncation never binds.
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if kind == "exp":
        if alpha >= LOG2:
            return rem_exponential(beta)
        if beta <= 1.0:
            return LOG2
        return LOG2 - alpha + beta * alpha
    if kind == "gauss":
        if alpha >= LOG2:
            return rem_gaussian(beta)
        edge = math.sqrt(2.0 * alpha)
        if beta <= edge:
            return LOG2 + 0.5 * beta * beta
        return LOG2 - alpha + beta * edge
    raise ValueError("kind must be 'exp' or 'gauss'")


# ---------------------------------------------------------------------------
# Curve builders
# ---------------------------------------------------------------------------


def build_rem_curve(model: str, **params) -> FreeEnergyCurve:
    """Breakpoints and segment descriptors for a named REM model.

    Models: gaussian, exponential, weibull(gamma), poisson(theta, sign),
    binomial(p, sign), compact(alpha), truncated-exp(alpha),
    truncated-gauss(alpha).
    """
    if model == "gaussian":
        bc = math.sqrt(2.0 * LOG2)
        return FreeEnergyCurve((bc,), (Segment("quadratic", (LOG2, 0.0, 0.5)),
                                       Segment("linear", (0.0, bc))))
    if model == "exponential":
        return FreeEnergyCurve((1.0,), (Segment("constant", (LOG2,)),
                                        Segment("linear", (0.0, LOG2))))
    if model == "weibull":
        g = float(params["gamma"])
        if not g > 0:
            raise ValueError("gamma must be > 0")
        bc = weibull_threshold(g)
        edge = (g * LOG2) ** (1.0 / g)
        if g > 1.0:
            first = Segment("power", (LOG2, 0.0, (g - 1.0) / g, g / (g - 1.0)))
        else:
            first = Segment("constant", (LOG2,))
        return FreeEnergyCurve((bc,), (first, Segment("linear", (0.0, edge))))
    if model == "poisson":
        theta = float(params["theta"])
        sign = int(params.get("sign", 1))
        if sign == 1:
            if theta <= LOG2:
                return FreeEnergyCurve((), (Segment("exp-decay", (LOG2 - theta, theta, -1.0)),))
            x1 = _poisson_left_root(theta)
            beta0 = math.log(theta / x1)
            return FreeEnergyCurve((beta0,), (Segment("exp-decay", (LOG2 - theta, theta, -1.0)),
                                              Segment("linear", (0.0, -x1))))
        x2 = _poisson_right_root(theta)
        beta1 = math.log(x2 / theta)
        return FreeEnergyCurve((beta1,), (Segment("exp-decay", (LOG2 - theta, theta, 1.0)),
                                          Segment("linear", (0.0, x2))))
    if model == "binomial":
        p = float(params["p"])
        sign = int(params.get("sign", 1))
        rate = BinomialRate(p)
        if sign == 1:
            smooth = Segment("logistic", (LOG2, -1.0, p, 1.0 - p, 1.0))
            if p <= 0.5:
                return FreeEnergyCurve((), (smooth,))
            x1 = _bisect(lambda x: float(rate.evaluate(x)) - LOG2, 1e-300, p)
            beta0 = math.log(p * (1.0 - x1) / ((1.0 - p) * x1))
            return FreeEnergyCurve((beta0,), (smooth, Segment("linear", (0.0, -x1))))
        smooth = Segment("logistic", (LOG2, 1.0, p, 1.0 - p, -1.0))
        if p >= 0.5:
            return FreeEnergyCurve((), (smooth,))
        x2 = _bisect(lambda x: float(rate.evaluate(x)) - LOG2, p, 1.0 - 1e-300)
        beta1 = math.log((1.0 - p) * x2 / (p * (1.0 - x2)))
        return FreeEnergyCurve((beta1,), (smooth, Segment("linear", (0.0, x2))))
    if model == "compact":
        alpha = float(params["alpha"])
        return FreeEnergyCurve((), (Segment("linear", (LOG2, alpha)),))
    if model == "truncated-exp":
        alpha = float(params["alpha"])
        if alpha >= LOG2:
            return build_rem_curve("exponential")
        return FreeEnergyCurve((1.0,), (Segment("constant", (LOG2,)),
                                        Segment("linear", (LOG2 - alpha, alpha))))
    if model == "truncated-gauss":
        alpha = float(params["alpha"])
        if alpha >= LOG2:
            return build_rem_curve("gaussian")
        edge = math.sqrt(2.0 * alpha)
        return FreeEnergyCurve((edge,), (Segment("quadratic", (LOG2, 0.0, 0.5)),
                                         Segment("linear", (LOG2 - alpha, edge))))
    raise ValueError(f"unknown REM model {model!r}")


def rate_for_model(model: str, **params) -> RateFunction:
    """The driving rate function matching :func:`build_rem_curve` models."""
    if model == "gaussian":
        return GaussianRate()
    if model == "exponential":
        return TwoSidedExponentialRate()
    if model == "weibull":
        return PowerGammaRate(float(params["gamma"]))
    if model == "poisson":
        r = PoissonRate(float(params["theta"]))
        return r if int(params.get("sign", 1)) == 1 else NegatedRate(r)
    if model == "binomial":
        r = BinomialRate(float(params["p"]))
        return r if int(params.get("sign", 1)) == 1 else NegatedRate(r)
    if model == "truncated-exp":
        return TruncatedRate(TwoSidedExponentialRate(), float(params["alpha"]))
    if model == "truncated-gauss":
        # alpha is the rate height; the support half-width is sqrt(2 alpha)
        return TruncatedRate(GaussianRate(), math.sqrt(2.0 * float(params["alpha"])))
    raise ValueError(f"no driving rate for model {model!r}")
