"""Empirical-measure checks of the driving distributions' rate functions.

With 2^N i.i.d. draws, a bin's mass decays like exp(-N inf I) as long as
that infimum stays below log 2; beyond it the bin empties out.  The
histogram records -(1/N) log(mass) per bin for direct comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rates import DrivingDistribution, RateFunction
from .rng import stream

__all__ = ["EmpiricalHistogram", "empirical_ldp", "bin_rate_infimum"]

_CHUNK = 2 ** 20


@dataclass(frozen=True)
class EmpiricalHistogram:
    """Bin masses of the normalized draws and their decay statistics.

    Two unbounded catch-all bins flank the user-supplied edges so the
    masses always sum to one.  ``rate_stat`` is -(1/N) log(mass), +inf on
    empty bins.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    mass: tuple[float, ...]
    rate_stat: tuple[float, ...]
    N: int

    def interior(self) -> list[tuple[float, float, float, float]]:
        return [(l, h, m, r) for l, h, m, r in
                zip(self.lo, self.hi, self.mass, self.rate_stat)
                if math.isfinite(l) and math.isfinite(h)]

    def to_csv(self) -> str:
        rows = ["lo,hi,mass,rate_stat"]
        for l, h, m, r in zip(self.lo, self.hi, self.mass, self.rate_stat):
            rows.append(f"{l:.17g},{h:.17g},{m:.17g},{r:.17g}")
        return "\n".join(rows) + "\n"


def empirical_ldp(dist: DrivingDistribution, bins, *, seed: int = 0,
                  replica: int = 0) -> EmpiricalHistogram:
    """Histogram the 2^N normalized draws over the given bin edges."""
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bins must be increasing edges")
    N = dist.N
    total = 2 ** N
    counts = np.zeros(len(edges) + 1, dtype=np.int64)
    rng = stream(seed, "ldp", replica)
    done = 0
    while done < total:
        take = min(_CHUNK, total - done)
        x = dist.sample_normalized(rng, take)
        idx = np.searchsorted(edges, x, side="right")
        counts += np.bincount(idx, minlength=len(edges) + 1)
        done += take
    mass = counts / total
    lo = (-math.inf, *edges[:-1], edges[-1])
    hi = (edges[0], *edges[1:], math.inf)
    rate_stat = tuple(
        -math.log(m) / N if m > 0 else math.inf for m in mass)
    return EmpiricalHistogram(lo, hi, tuple(mass), rate_stat, N)


def bin_rate_infimum(rate: RateFunction, lo: float, hi: float) -> float:
    """inf of I over [lo, hi] using the U-shape: attained at an endpoint
    or on the zero set when the bin straddles it."""
    z_lo, z_hi = rate.zero_interval()
    if lo <= z_hi and hi >= z_lo:
        return 0.0
    candidates = []
    for x in (lo, hi):
        if math.isfinite(x):
            candidates.append(float(rate.evaluate(x)))
    return min(candidates) if candidates else math.inf
