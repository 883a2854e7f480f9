"""Piecewise closed-form free-energy curves.

A ``FreeEnergyCurve`` is a list of ordered breakpoints together with one
closed-form segment descriptor per interval.  Intervals are treated as
left-closed; every curve built here is continuous at its breakpoints, so
which side owns the breakpoint never changes a value.  Segment kinds:

==========  =======================  =====================================
kind        coeffs                   value at beta
==========  =======================  =====================================
constant    (c0,)                    c0
linear      (c0, c1)                 c0 + c1*b
quadratic   (c0, c1, c2)             c0 + c1*b + c2*b^2
power       (c0, c1, c2, e)          c0 + c1*b + c2*b^e
exp-decay   (c0, c1, c2)             c0 + c1*exp(c2*b)
logistic    (c0, c1, c2, c3, c4)     c0 + c1*b + log(c2 + c3*exp(c4*b))
cosh-field  (c0, c1, c2)             c0 + c2*b^2 + log(cosh(c1*b))
==========  =======================  =====================================
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Segment", "FreeEnergyCurve", "InvalidCurveError"]


class InvalidCurveError(ValueError):
    """Raised when a curve fails a structural or identity check."""


def _eval_segment(kind: str, coeffs: tuple[float, ...], b: np.ndarray) -> np.ndarray:
    if kind == "constant":
        return np.full_like(b, coeffs[0])
    if kind == "linear":
        return coeffs[0] + coeffs[1] * b
    if kind == "quadratic":
        return coeffs[0] + coeffs[1] * b + coeffs[2] * b * b
    if kind == "power":
        return coeffs[0] + coeffs[1] * b + coeffs[2] * b ** coeffs[3]
    if kind == "exp-decay":
        return coeffs[0] + coeffs[1] * np.exp(coeffs[2] * b)
    if kind == "logistic":
        return coeffs[0] + coeffs[1] * b + np.log(coeffs[2] + coeffs[3] * np.exp(coeffs[4] * b))
    if kind == "cosh-field":
        return coeffs[0] + coeffs[2] * b * b + np.logaddexp(coeffs[1] * b, -coeffs[1] * b) - math.log(2.0)
    raise InvalidCurveError(f"unknown segment kind {kind!r}")


@dataclass(frozen=True)
class Segment:
    kind: str
    coeffs: tuple[float, ...]

    def __call__(self, beta):
        return _eval_segment(self.kind, self.coeffs, np.asarray(beta, dtype=float))


@dataclass(frozen=True)
class FreeEnergyCurve:
    """Piecewise closed-form map beta -> E(beta) on [0, inf)."""

    breakpoints: tuple[float, ...]
    segments: tuple[Segment, ...]

    def __post_init__(self):
        bp = self.breakpoints
        if len(self.segments) != len(bp) + 1:
            raise InvalidCurveError("need exactly one segment per interval")
        if any(b <= 0 for b in bp) or any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise InvalidCurveError("breakpoints must be strictly increasing and > 0")

    def __call__(self, beta):
        b = np.asarray(beta, dtype=float)
        scalar = b.ndim == 0
        b = np.atleast_1d(b)
        if np.any(b < 0):
            raise ValueError("curves are defined for beta >= 0")
        idx = np.searchsorted(np.asarray(self.breakpoints), b, side="right")
        out = np.empty_like(b)
        for i, seg in enumerate(self.segments):
            sel = idx == i
            if np.any(sel):
                out[sel] = seg(b[sel])
        return float(out[0]) if scalar else out

    # -- checks used throughout the test-suite ---------------------------

    def max_breakpoint_jump(self) -> float:
        """Largest |left - right| segment mismatch across breakpoints."""
        worst = 0.0
        for i, b in enumerate(self.breakpoints):
            worst = max(worst, abs(float(self.segments[i](b)) - float(self.segments[i + 1](b))))
        return worst

    def convexity_defect(self, beta_max: float, num: int = 500) -> float:
        """Most negative second difference on a uniform grid (>= 0 is convex)."""
        grid = np.linspace(0.0, beta_max, num)
        v = self(grid)
        return float(np.min(np.diff(v, 2))) if num >= 3 else 0.0

    # -- export -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "breakpoints": list(self.breakpoints),
            "segments": [{"kind": s.kind, "coeffs": list(s.coeffs)} for s in self.segments],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "FreeEnergyCurve":
        return cls(
            tuple(float(b) for b in d["breakpoints"]),
            tuple(Segment(s["kind"], tuple(float(c) for c in s["coeffs"]))
                  for s in d["segments"]),
        )

    def to_csv(self, betas) -> str:
        rows = ["beta,value"]
        for b, v in zip(np.asarray(betas, dtype=float), self(betas)):
            rows.append(f"{b:.17g},{v:.17g}")
        return "\n".join(rows) + "\n"
