"""Driving-distribution families and their large-deviation rate functions.

Every model in this package is driven by a family of per-node random
variables whose normalized values obey a large-deviation principle at speed
N with a rate function ``I``.  This module provides:

* ``RateFunction`` subclasses: evaluation of ``I`` (total into the extended
  reals), level-set queries ``{I <= c}`` and the zero set.
* ``DrivingDistribution``: exact finite-N samplers for each family, both in
  the family's native scale and in the normalized (energy-per-particle)
  scale used by the simulator.

Conventions
-----------
``sample_normalized`` always returns the variable ``x`` whose law has
density proportional to ``exp(-N I(x))`` in the tail sense, so that
``-(1/N) log P(x in dx) -> I(x)``.  ``sample`` returns the family in the
scale it is usually written in: the Gaussian and two-sided exponential
families are already normalized (variance ``1/N``, scale ``1/N``), while
the generalized-gamma family is at particle scale (density proportional to
``exp(-|x|^g / (g N^(g-1)))``) and the Poisson/Binomial families return raw
counts ``P(N*theta)`` / ``B(N, p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

LOG2 = math.log(2.0)

__all__ = [
    "LOG2",
    "RateFunction",
    "GaussianRate",
    "TwoSidedExponentialRate",
    "PowerGammaRate",
    "PoissonRate",
    "BinomialRate",
    "NegatedRate",
    "TruncatedRate",
    "PiecewiseHalfRate",
    "DrivingDistribution",
    "rate_from_descriptor",
    "distribution_from_descriptor",
]


def _bisect(f: Callable[[float], float], lo: float, hi: float, *, tol: float = 1e-14,
            max_iter: int = 200) -> float:
    """Root of a sign-changing monotone function by plain bisection."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


class RateFunction:
    """Base class for one-dimensional large-deviation rate functions.

    Subclasses implement ``evaluate`` (vectorized, +inf outside the
    effective domain), ``domain``, and ``zero_interval``.  ``level_set``
    has a generic bisection implementation relying on the U-shape
    invariants: nonincreasing left of the zero set, nondecreasing right of
    it, with compact level sets.
    """

    family: str = "abstract"

    def evaluate(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.evaluate(x)

    def domain(self) -> tuple[float, float]:
        """Interval outside which the rate is identically +inf."""
        return (-math.inf, math.inf)

    def zero_interval(self) -> tuple[float, float]:
        """The set {I = 0} (a point or an interval; always non-empty)."""
        raise NotImplementedError

    def params(self) -> tuple[float, ...]:
        return ()

    def level_set(self, c: float) -> tuple[float, float]:
        """Endpoints of the compact interval {x : I(x) <= c} for c >= 0."""
        if c < 0:
            raise ValueError("level_set requires c >= 0")
        z_lo, z_hi = self.zero_interval()
        if c == 0.0:
            return (z_lo, z_hi)
        d_lo, d_hi = self.domain()
        lo = self._side_root(c, z_lo, d_lo, left=True)
        hi = self._side_root(c, z_hi, d_hi, left=False)
        return (lo, hi)

    def _side_root(self, c: float, z: float, bound: float, *, left: bool) -> float:
        """Solve I(x) = c on one monotone side, clipping at the domain edge."""
        ev = lambda x: float(self.evaluate(x))
        # Find a finite bracket endpoint beyond which I exceeds c.
        if math.isinf(bound):
            step = 1.0
            probe = z - step if left else z + step
            while ev(probe) <= c:
                step *= 2.0
                probe = z - step if left else z + step
                if step > 1e12:  # unbounded level set would violate goodness
                    raise RuntimeError("level set appears unbounded")
            outer = probe
        else:
            outer = bound
            if ev(outer) <= c:
                return outer
        if left:
            return _bisect(lambda x: ev(x) - c, outer, z)
        return _bisect(lambda x: ev(x) - c, z, outer)


@dataclass(frozen=True)
class GaussianRate(RateFunction):
    """I(x) = x^2 / 2."""

    family: str = field(default="gaussian", init=False)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * x * x

    def zero_interval(self):
        return (0.0, 0.0)

    def level_set(self, c):
        if c < 0:
            raise ValueError("level_set requires c >= 0")
        r = math.sqrt(2.0 * c)
        return (-r, r)


@dataclass(frozen=True)
class TwoSidedExponentialRate(RateFunction):
    """I(x) = |x|."""

    family: str = field(default="exponential", init=False)

    def evaluate(self, x):
        return np.abs(np.asarray(x, dtype=float))

    def zero_interval(self):
        return (0.0, 0.0)

    def level_set(self, c):
        if c < 0:
            raise ValueError("level_set requires c >= 0")
        return (-c, c)


@dataclass(frozen=True)
class PowerGammaRate(RateFunction):
    """I(x) = |x|^gamma / gamma, gamma > 0.

    gamma = 1 is the two-sided exponential rate, gamma = 2 the Gaussian
    one; gamma < 1 gives a non-convex but quasi-convex rate.
    """

    gamma: float
    family: str = field(default="power-gamma", init=False)

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return np.abs(x) ** self.gamma / self.gamma

    def zero_interval(self):
        return (0.0, 0.0)

    def level_set(self, c):
        if c < 0:
            raise ValueError("level_set requires c >= 0")
        r = (self.gamma * c) ** (1.0 / self.gamma)
        return (-r, r)

    def params(self):
        return (self.gamma,)


def _xlogx(v: np.ndarray) -> np.ndarray:
    # x log x with the 0 log 0 = 0 convention
    out = np.zeros_like(v)
    pos = v > 0
    out[pos] = v[pos] * np.log(v[pos])
    return out


@dataclass(frozen=True)
class PoissonRate(RateFunction):
    """I(x) = theta - x + x log(x/theta) on x >= 0, +inf for x < 0."""

    theta: float
    family: str = field(default="poisson", init=False)

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be > 0")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, np.inf)
        ok = x >= 0
        v = x[ok]
        out[ok] = self.theta - v + _xlogx(v) - v * math.log(self.theta)
        return out if out.shape else float(out)

    def domain(self):
        return (0.0, math.inf)

    def zero_interval(self):
        return (self.theta, self.theta)

    def params(self):
        return (self.theta,)


@dataclass(frozen=True)
class BinomialRate(RateFunction):
    """I(x) = x log(x/p) + (1-x) log((1-x)/(1-p)) on [0, 1]."""

    p: float
    family: str = field(default="binomial", init=False)

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, np.inf)
        ok = (x >= 0) & (x <= 1)
        v = x[ok]
        out[ok] = (_xlogx(v) - v * math.log(self.p)
                   + _xlogx(1.0 - v) - (1.0 - v) * math.log(1.0 - self.p))
        return out if out.shape else float(out)

    def domain(self):
        return (0.0, 1.0)

    def zero_interval(self):
        return (self.p, self.p)

    def params(self):
        return (self.p,)


@dataclass(frozen=True)
class NegatedRate(RateFunction):
    """Rate of the negated variable: I(x) = inner(-x)."""

    inner: RateFunction
    family: str = field(default="negated", init=False)

    def evaluate(self, x):
        return self.inner.evaluate(-np.asarray(x, dtype=float))

    def domain(self):
        lo, hi = self.inner.domain()
        return (-hi, -lo)

    def zero_interval(self):
        lo, hi = self.inner.zero_interval()
        return (-hi, -lo)

    def level_set(self, c):
        lo, hi = self.inner.level_set(c)
        return (-hi, -lo)

    def params(self):
        return self.inner.params()


@dataclass(frozen=True)
class TruncatedRate(RateFunction):
    """inner on [-alpha, alpha], +inf outside."""

    inner: RateFunction
    alpha: float
    family: str = field(default="truncated", init=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        z_lo, z_hi = self.inner.zero_interval()
        if z_hi < -self.alpha or z_lo > self.alpha:
            raise ValueError("truncation window must contain the zero set")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.inner.evaluate(x), dtype=float).copy()
        out[np.abs(x) > self.alpha] = np.inf
        return out if out.shape else float(out)

    def domain(self):
        lo, hi = self.inner.domain()
        return (max(lo, -self.alpha), min(hi, self.alpha))

    def zero_interval(self):
        z_lo, z_hi = self.inner.zero_interval()
        return (max(z_lo, -self.alpha), min(z_hi, self.alpha))

    def level_set(self, c):
        lo, hi = self.inner.level_set(c)
        return (max(lo, -self.alpha), min(hi, self.alpha))

    def params(self):
        return (self.alpha, *self.inner.params())


@dataclass(frozen=True)
class PiecewiseHalfRate(RateFunction):
    """Two one-sided rates glued at 0: left(x) for x < 0, right(x) for x >= 0.

    Both pieces must vanish at 0 so the glued rate keeps its zero there.
    """

    left: RateFunction
    right: RateFunction
    family: str = field(default="piecewise-half", init=False)

    def __post_init__(self):
        for piece in (self.left, self.right):
            z_lo, z_hi = piece.zero_interval()
            if not (z_lo <= 0.0 <= z_hi):
                raise ValueError("both pieces must have I(0) = 0")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        neg = x < 0
        out = np.asarray(self.right.evaluate(x), dtype=float).copy()
        out[neg] = np.asarray(self.left.evaluate(x), dtype=float)[neg]
        return out if out.shape else float(out)

    def domain(self):
        return (self.left.domain()[0], self.right.domain()[1])

    def zero_interval(self):
        return (0.0, 0.0)

    def level_set(self, c):
        if c < 0:
            raise ValueError("level_set requires c >= 0")
        if c == 0.0:
            return (0.0, 0.0)
        return (self.left.level_set(c)[0], self.right.level_set(c)[1])


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------


_SIMPLE_RATES = {
    "gaussian": lambda params: GaussianRate(),
    "exponential": lambda params: TwoSidedExponentialRate(),
    "power-gamma": lambda params: PowerGammaRate(params[0]),
    "poisson": lambda params: PoissonRate(params[0]),
    "binomial": lambda params: BinomialRate(params[0]),
}


@dataclass(frozen=True)
class DrivingDistribution:
    """A driving-distribution family at particle count N.

    ``rate_of()`` returns the matching rate function.  ``sample`` draws
    from the family's native law, ``sample_normalized`` from the law of
    the energy-per-particle variable (see module docstring).  Samplers
    only consume the generator that is passed in; they never share state.
    """

    rate: RateFunction
    N: int

    def __post_init__(self):
        if not (isinstance(self.N, (int, np.integer)) and self.N >= 1):
            raise ValueError("N must be an integer >= 1")

    @property
    def family(self) -> str:
        return self.rate.family

    def rate_of(self) -> RateFunction:
        return self.rate

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        r = self.rate
        if isinstance(r, GaussianRate):
            return rng.normal(0.0, 1.0 / math.sqrt(self.N), size=size)
        if isinstance(r, TwoSidedExponentialRate):
            return rng.laplace(0.0, 1.0 / self.N, size=size)
        if isinstance(r, PowerGammaRate):
            g = r.gamma
            scale = g * self.N ** (g - 1.0)
            magnitudes = (rng.standard_gamma(1.0 / g, size=size) * scale) ** (1.0 / g)
            signs = rng.integers(0, 2, size=size) * 2 - 1
            return signs * magnitudes
        if isinstance(r, PoissonRate):
            return rng.poisson(self.N * r.theta, size=size).astype(float)
        if isinstance(r, BinomialRate):
            return rng.binomial(self.N, r.p, size=size).astype(float)
        if isinstance(r, NegatedRate):
            return -DrivingDistribution(r.inner, self.N).sample(rng, size)
        if isinstance(r, TruncatedRate):
            return self._sample_truncated(r, rng, size, normalized=False)
        if isinstance(r, PiecewiseHalfRate):
            return self._sample_piecewise(r, rng, size)
        raise TypeError(f"no sampler for rate family {r.family!r}")

    def sample_normalized(self, rng: np.random.Generator,
                          size: int | None = None) -> np.ndarray:
        r = self.rate
        if isinstance(r, (GaussianRate, TwoSidedExponentialRate)):
            return self.sample(rng, size)
        if isinstance(r, (PowerGammaRate, PoissonRate, BinomialRate)):
            return self.sample(rng, size) / self.N
        if isinstance(r, NegatedRate):
            return -DrivingDistribution(r.inner, self.N).sample_normalized(rng, size)
        if isinstance(r, TruncatedRate):
            return self._sample_truncated(r, rng, size, normalized=True)
        if isinstance(r, PiecewiseHalfRate):
            return self._sample_piecewise(r, rng, size)
        raise TypeError(f"no sampler for rate family {r.family!r}")

    def _sample_truncated(self, r: TruncatedRate, rng, size, *, normalized: bool):
        inner = DrivingDistribution(r.inner, self.N)
        draw = inner.sample_normalized if normalized else inner.sample
        scalar = size is None
        n = 1 if scalar else int(size)
        out = np.empty(n)
        filled = 0
        while filled < n:
            batch = draw(rng, max(n - filled, 64))
            keep = batch[np.abs(batch) <= r.alpha]
            take = min(len(keep), n - filled)
            out[filled:filled + take] = keep[:take]
            filled += take
        return float(out[0]) if scalar else out

    def _sample_piecewise(self, r: PiecewiseHalfRate, rng, size):
        # Each half carries probability exactly 1/2: the glued density is
        # half the left family's normalized density on x<0 and half the
        # right one's on x>=0.
        scalar = size is None
        n = 1 if scalar else int(size)
        signs = rng.integers(0, 2, size=n) * 2 - 1
        left = np.abs(DrivingDistribution(r.left, self.N).sample_normalized(rng, n))
        right = np.abs(DrivingDistribution(r.right, self.N).sample_normalized(rng, n))
        out = np.where(signs < 0, -left, right)
        return float(out[0]) if scalar else out

    def descriptor(self) -> dict:
        return rate_descriptor(self.rate)


# ---------------------------------------------------------------------------
# JSON descriptors: {"family": string, "params": [numbers]}
# ---------------------------------------------------------------------------


def rate_descriptor(rate: RateFunction) -> dict:
    """Serialize a rate function to the flat CLI descriptor."""
    if isinstance(rate, NegatedRate):
        inner = rate_descriptor(rate.inner)
        return {"family": f"negated-{inner['family']}", "params": inner["params"]}
    if isinstance(rate, TruncatedRate):
        inner = rate_descriptor(rate.inner)
        return {"family": f"truncated-{inner['family']}",
                "params": [rate.alpha, *inner["params"]]}
    if isinstance(rate, PiecewiseHalfRate):
        lf = rate_descriptor(rate.left)
        rf = rate_descriptor(rate.right)
        return {"family": f"piecewise-{lf['family']}-{rf['family']}",
                "params": [*lf["params"], *rf["params"]]}
    return {"family": rate.family, "params": list(rate.params())}


def rate_from_descriptor(desc: dict) -> RateFunction:
    """Inverse of :func:`rate_descriptor`."""
    family = desc["family"]
    params = [float(v) for v in desc.get("params", [])]
    if family in _SIMPLE_RATES:
        return _SIMPLE_RATES[family](params)
    if family.startswith("negated-"):
        inner = rate_from_descriptor({"family": family[len("negated-"):],
                                      "params": params})
        return NegatedRate(inner)
    if family.startswith("truncated-"):
        inner = rate_from_descriptor({"family": family[len("truncated-"):],
                                      "params": params[1:]})
        return TruncatedRate(inner, params[0])
    if family.startswith("piecewise-"):
        left_name, right_name = family[len("piecewise-"):].split("-")
        n_left = {"gaussian": 0, "exponential": 0, "power-gamma": 1,
                  "poisson": 1, "binomial": 1}[left_name]
        left = rate_from_descriptor({"family": left_name, "params": params[:n_left]})
        right = rate_from_descriptor({"family": right_name, "params": params[n_left:]})
        return PiecewiseHalfRate(left, right)
    raise ValueError(f"unknown rate family {family!r}")


def distribution_from_descriptor(desc: dict, N: int) -> DrivingDistribution:
    return DrivingDistribution(rate_from_descriptor(desc), N)
