"""n-level GREM free energies: ladder recursion, closed forms, and oracle.

The closed forms cover a uniform shape parameter gamma > 1 (freezing
thresholds from the grouped-ratio ladder), gamma = 1 (suffix-maximum
ladder), the two-level gamma < 1 corner-point formula, and the two-level
mixed exponential/Gaussian models.  ``grem_variational`` is the
independent oracle: a masked zoomed grid plus coordinate line searches on
the rate-budget parametrization of the feasible set

    Psi+ = { x >= 0 : sum_{i<=k} I_i(x_i) <= sum_{i<=k} p_i log 2 }.

``recover_params`` inverts reduced-form energy curves back to (p, a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import FreeEnergyCurve, InvalidCurveError, Segment
from .rates import LOG2

__all__ = [
    "GremSpec",
    "BetaLadder",
    "beta_ladder",
    "grem_energy_gamma",
    "grem_energy_exp",
    "grem_energy",
    "grem2_sub1",
    "grem2_exp_gauss",
    "grem2_gauss_exp",
    "grem_variational",
    "gamma_limit_check",
    "GammaLimitReport",
    "reduce_exp_grem",
    "recover_params",
    "grem_curve",
]


@dataclass(frozen=True)
class GremSpec:
    """An n-level GREM: proportions p_i, weights a_i, per-level rates.

    ``gammas`` holds the shape parameter of each level's driving family
    (1 = two-sided exponential, 2 = Gaussian).
    """

    p: tuple[float, ...]
    a: tuple[float, ...]
    gammas: tuple[float, ...]

    def __post_init__(self):
        n = len(self.p)
        if n < 1 or len(self.a) != n or len(self.gammas) != n:
            raise ValueError("p, a and gammas must have equal positive length")
        if any(q <= 0 for q in self.p):
            raise ValueError("all proportions must be > 0")
        if abs(sum(self.p) - 1.0) > 1e-12:
            raise ValueError("proportions must sum to 1")
        if any(w < 0 for w in self.a):
            raise ValueError("weights must be >= 0")
        if not any(w > 0 for w in self.a):
            raise ValueError("at least one weight must be > 0")
        if any(g <= 0 for g in self.gammas):
            raise ValueError("shape parameters must be > 0")

    @classmethod
    def uniform(cls, p, a, gamma: float) -> "GremSpec":
        p = tuple(float(v) for v in p)
        return cls(p, tuple(float(v) for v in a), (float(gamma),) * len(p))

    @classmethod
    def mixed(cls, p, a, kinds) -> "GremSpec":
        code = {"exp": 1.0, "gauss": 2.0}
        return cls(tuple(float(v) for v in p), tuple(float(v) for v in a),
                   tuple(code[k] for k in kinds))

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def uniform_gamma(self) -> float | None:
        g0 = self.gammas[0]
        return g0 if all(g == g0 for g in self.gammas) else None

    def to_dict(self) -> dict:
        g0 = self.uniform_gamma
        if g0 is not None:
            levels = {"uniform_gamma": g0}
        elif set(self.gammas) <= {1.0, 2.0}:
            levels = {"mixed": ["exp" if g == 1.0 else "gauss" for g in self.gammas]}
        else:
            levels = {"per_level": list(self.gammas)}
        return {"p": list(self.p), "a": list(self.a), "levels": levels}

    @classmethod
    def from_dict(cls, d: dict) -> "GremSpec":
        levels = d["levels"]
        p = tuple(float(v) for v in d["p"])
        a = tuple(float(v) for v in d["a"])
        if "uniform_gamma" in levels:
            return cls.uniform(p, a, float(levels["uniform_gamma"]))
        if "per_level" in levels:
            return cls(p, a, tuple(float(g) for g in levels["per_level"]))
        if "mixed" in levels:
            return cls.mixed(p, a, levels["mixed"])
        raise ValueError("levels must specify uniform_gamma, per_level or mixed")


@dataclass(frozen=True)
class BetaLadder:
    """Freezing thresholds beta_1 < ... < beta_K and group ends r_1 < ... < r_K.

    For specs with all weights positive the last rank equals n.  Trailing
    all-zero weights never freeze; the ladder then stops early and those
    levels stay in the high-temperature branch forever.
    """

    betas: tuple[float, ...]
    ranks: tuple[int, ...]
    n: int

    def __post_init__(self):
        if any(b2 <= b1 for b1, b2 in zip(self.betas, self.betas[1:])):
            raise ValueError("thresholds must be strictly increasing")
        if any(r2 <= r1 for r1, r2 in zip(self.ranks, self.ranks[1:])):
            raise ValueError("ranks must be strictly increasing")


_TIE = 1e-12


def _ladder_gamma(p, a, gamma: float) -> BetaLadder:
    """Grouped-ratio recursion: B(j,k) minimized over suffixes, ties to the
    largest index.  Zero-weight groups give an infinite ratio and are never
    selected; if every remaining weight is zero the recursion stops."""
    n = len(p)
    gp = gamma / (gamma - 1.0)
    betas: list[float] = []
    ranks: list[int] = []
    r = 0
    while r < n:
        best = math.inf
        best_k = -1
        num = 0.0
        den = 0.0
        for k in range(r + 1, n + 1):
            num += p[k - 1] * gamma * LOG2
            den += a[k - 1] ** gp
            if den <= 0.0:
                continue
            cand = (num / den) ** (1.0 / gp)
            if cand < best * (1.0 - _TIE):
                best, best_k = cand, k
            elif cand <= best * (1.0 + _TIE):
                best_k = k
        if best_k < 0:  # all remaining weights are zero
            break
        betas.append(best)
        ranks.append(best_k)
        r = best_k
    return BetaLadder(tuple(betas), tuple(ranks), n)


def _ladder_exp(p, a) -> BetaLadder:
    """gamma = 1 recursion: thresholds 1/max(a over suffix), tie to the
    last index attaining the maximum."""
    n = len(p)
    betas: list[float] = []
    ranks: list[int] = []
    r = 0
    while r < n:
        m = max(a[r:])
        if m <= 0.0:
            break
        last = max(i + 1 for i in range(r, n) if a[i] == m)
        betas.append(1.0 / m)
        ranks.append(last)
        r = last
    return BetaLadder(tuple(betas), tuple(ranks), n)


def beta_ladder(spec: GremSpec) -> BetaLadder:
    """Freezing ladder of a uniform-gamma spec (gamma > 1 uses the grouped
    ratios, gamma = 1 the suffix-maximum rule)."""
    g = spec.uniform_gamma
    if g is None:
        raise ValueError("beta_ladder requires a uniform shape parameter")
    if g == 1.0:
        return _ladder_exp(spec.p, spec.a)
    if g < 1.0:
        raise ValueError("no ladder exists for gamma < 1")
    return _ladder_gamma(spec.p, spec.a, g)


def grem_energy_gamma(spec: GremSpec, beta: float) -> float:
    """Free energy of a uniform gamma > 1 GREM at inverse temperature beta."""
    g = spec.uniform_gamma
    if g is None or g <= 1.0:
        raise ValueError("grem_energy_gamma requires uniform gamma > 1")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    lad = _ladder_gamma(spec.p, spec.a, g)
    gp = g / (g - 1.0)
    j = sum(1 for b in lad.betas if b <= beta)
    r_j = lad.ranks[j - 1] if j > 0 else 0
    tail_p = sum(spec.p[r_j:]) * LOG2
    tail_power = (g - 1.0) / g * beta ** gp * sum(w ** gp for w in spec.a[r_j:])
    frozen = 0.0
    prev = 0
    for l in range(j):
        r_l = lad.ranks[l]
        frozen += lad.betas[l] ** (1.0 / (g - 1.0)) * sum(w ** gp for w in spec.a[prev:r_l])
        prev = r_l
    return tail_p + tail_power + beta * frozen


def grem_energy_exp(spec: GremSpec, beta: float) -> float:
    """Free energy of the two-sided exponential GREM (uniform gamma = 1)."""
    if spec.uniform_gamma != 1.0:
        raise ValueError("grem_energy_exp requires uniform gamma = 1")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    lad = _ladder_exp(spec.p, spec.a)
    value = LOG2
    prev = 0
    for b_l, r_l in zip(lad.betas, lad.ranks):
        if b_l > beta:
            break
        value += (beta * spec.a[r_l - 1] - 1.0) * sum(spec.p[prev:r_l]) * LOG2
        prev = r_l
    return value


def grem_energy(spec: GremSpec, beta: float) -> float:
    """Closed form where one exists, otherwise the variational oracle."""
    g = spec.uniform_gamma
    if g is not None and g > 1.0:
        return grem_energy_gamma(spec, beta)
    if g == 1.0:
        return grem_energy_exp(spec, beta)
    if g is not None and g < 1.0 and spec.n == 2:
        return grem2_sub1(*spec.p, *spec.a, g, beta)
    if spec.n == 2 and spec.gammas == (1.0, 2.0):
        return grem2_exp_gauss(spec.p, spec.a, beta)
    if spec.n == 2 and spec.gammas == (2.0, 1.0):
        return grem2_gauss_exp(spec.p, spec.a, beta)
    return grem_variational(spec, beta)


def grem2_sub1(p1: float, p2: float, a1: float, a2: float, gamma: float,
               beta: float) -> float:
    """Two-level GREM with uniform gamma in (0, 1).

    In budget coordinates u_i = x_i^gamma / gamma the feasible set is the
    polygon {u >= 0, u1 <= c, u1+u2 <= c+d} and the (convex) objective is
    maximized at one of its corners A=(0,0), B=(c,0), C=(c,d), D=(0,c+d);
    the three scenarios order which corner wins as beta grows.
    """
    if not (0.0 < gamma < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    alpha = 1.0 / gamma
    s = gamma ** (1.0 / gamma)
    A, B = a1 * s, a2 * s
    c, d = p1 * LOG2, p2 * LOG2

    f_B = beta * A * c ** alpha - c
    f_C = f_B + beta * B * d ** alpha - d
    f_D = beta * B * (c + d) ** alpha - (c + d)

    t_AB = 1.0 / (A * c ** (alpha - 1.0))
    if B * (c + d) ** alpha <= A * c ** alpha + B * d ** alpha:
        t_BC = 1.0 / (B * d ** (alpha - 1.0))
        if beta <= t_AB:
            return LOG2
        if beta <= t_BC:
            return LOG2 + f_B
        return LOG2 + f_C
    if B * (c + d) ** (alpha - 1.0) <= A * c ** (alpha - 1.0):
        t_BD = d / (B * (c + d) ** alpha - A * c ** alpha)
        if beta <= t_AB:
            return LOG2
        if beta <= t_BD:
            return LOG2 + f_B
        return LOG2 + f_D
    t_AD = 1.0 / (B * (c + d) ** (alpha - 1.0))
    if beta <= t_AD:
        return LOG2
    return LOG2 + f_D


def grem2_exp_gauss(p, a, beta: float) -> float:
    """Two-level GREM, exponential first level and Gaussian second."""
    p1, p2 = p
    a1, a2 = a
    if beta < 0:
        raise ValueError("beta must be >= 0")
    ratio = a2 / a1
    if ratio < math.sqrt(2.0 * p2 * LOG2):  # subcase A1: two independent REMs
        if beta <= 1.0 / a1:
            return LOG2 + 0.5 * beta * beta * a2 * a2
        if beta <= math.sqrt(2.0 * p2 * LOG2) / a2:
            return p2 * LOG2 + 0.5 * beta * beta * a2 * a2 + beta * p1 * a1 * LOG2
        return beta * (a2 * math.sqrt(2.0 * p2 * LOG2) + a1 * p1 * LOG2)
    if ratio < math.sqrt(2.0 * LOG2):  # subcase A2
        if beta <= 1.0 / a1:
            return LOG2 + 0.5 * beta * beta * a2 * a2
        return beta * (0.5 * a2 * a2 / a1 + a1 * LOG2)
    # subcase A3: reduces to a Gaussian REM with weight a2
    if beta <= math.sqrt(2.0 * LOG2) / a2:
        return LOG2 + 0.5 * beta * beta * a2 * a2
    return beta * a2 * math.sqrt(2.0 * LOG2)


def grem2_gauss_exp(p, a, beta: float) -> float:
    """Two-level GREM, Gaussian first level and exponential second."""
    p1, p2 = p
    a1, a2 = a
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if a1 / a2 <= math.sqrt(2.0 * p1 * LOG2):  # subcase B1
        if beta <= 1.0 / a2:
            return LOG2 + 0.5 * beta * beta * a1 * a1
        return beta * (0.5 * a1 * a1 / a2 + a2 * LOG2)
    # subcase B2: two independent REMs; the first threshold is where the
    # Gaussian stationary point beta*a1 hits sqrt(2 p1 log 2)
    if beta <= math.sqrt(2.0 * p1 * LOG2) / a1:
        return LOG2 + 0.5 * beta * beta * a1 * a1
    if beta <= 1.0 / a2:
        return p2 * LOG2 + beta * a1 * math.sqrt(2.0 * p1 * LOG2)
    return beta * (a1 * math.sqrt(2.0 * p1 * LOG2) + a2 * p2 * LOG2)


# ---------------------------------------------------------------------------
# Variational oracle
# ---------------------------------------------------------------------------


def _oracle_objective(u: np.ndarray, beta: float, a: np.ndarray,
                      g: np.ndarray) -> np.ndarray:
    """sum_i (u_i - beta a_i (g_i u_i)^(1/g_i)) for u of shape (n, m)."""
    total = np.zeros(u.shape[1])
    for i in range(u.shape[0]):
        total += u[i] - beta * a[i] * (g[i] * u[i]) ** (1.0 / g[i])
    return total


def _masked_grid_min(axes, beta, a, g, budgets):
    mesh = np.meshgrid(*axes, indexing="ij")
    u = np.stack([m.ravel() for m in mesh], axis=0)
    vals = _oracle_objective(u, beta, a, g)
    cum = np.cumsum(u, axis=0)
    feasible = np.all(cum <= budgets[:, None] + 1e-12, axis=0)
    vals = np.where(feasible, vals, np.inf)
    order = np.argsort(vals)
    return u, vals, order


def _line_min(u, direction, lo, hi, beta, a, g, points=129, rounds=3):
    """Exact-endpoint line search for min along u + t*direction, t in [lo, hi]."""
    for _ in range(rounds):
        ts = np.linspace(lo, hi, points)
        cand = u[:, None] + direction[:, None] * ts
        vals = _oracle_objective(cand, beta, a, g)
        k = int(np.argmin(vals))
        best_t = ts[k]
        lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, points - 1)]
    return u + direction * best_t


def _coordinate_polish(u0, beta, a, g, budgets, sweeps=8, points=129):
    """Cyclic exact-endpoint line searches along the axes plus pairwise
    transfer directions e_i - e_j.

    Axis moves handle concave slices (gamma < 1, boundary optima); the
    transfers slide along binding cumulative-budget faces, where axis
    moves alone would stall (frozen regimes have sum u_i = b_k exactly).
    """
    n = len(u0)
    u = np.array(u0, dtype=float)
    for _ in range(sweeps):
        for i in range(n):
            slack = budgets[i:] - (np.cumsum(u)[i:] - u[i])
            hi = max(float(np.min(slack)), 0.0)
            direction = np.zeros(n)
            direction[i] = 1.0
            u = _line_min(u - direction * u[i], direction, 0.0, hi, beta, a, g,
                          points)
        for i in range(n):
            for j in range(i + 1, n):
                # move t along e_i - e_j: only cumulative sums i..j-1 change
                cum = np.cumsum(u)
                t_hi = min(float(np.min(budgets[i:j] - cum[i:j])), u[j])
                t_lo = -u[i]
                if t_hi <= t_lo:
                    continue
                direction = np.zeros(n)
                direction[i], direction[j] = 1.0, -1.0
                u = np.maximum(_line_min(u, direction, t_lo, t_hi, beta, a, g,
                                         points), 0.0)
    return u, float(_oracle_objective(u[:, None], beta, a, g)[0])


_GRID_BY_N = {1: 4001, 2: 120, 3: 60, 4: 26}
_LOCAL_BY_N = {1: 2001, 2: 48, 3: 32, 4: 16}


def grem_variational(spec: GremSpec, beta: float, *, tol: float = 1e-4) -> float:
    """Numeric value of log 2 - inf over Psi+ of sum (I_i(x_i) - beta a_i x_i).

    Independent of every closed form in this module: works on the
    rate-budget coordinates u_i = I_i(x_i), runs a feasibility-masked
    global grid, zooms around the best few cells, and finishes with
    coordinate line searches whose interval endpoints are exact so corner
    optima (gamma <= 1) are hit exactly.  Scales to n <= 4.
    """
    n = spec.n
    if n > 4:
        raise ValueError("variational oracle is limited to n <= 4")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    a = np.asarray(spec.a, dtype=float)
    g = np.asarray(spec.gammas, dtype=float)
    budgets = np.cumsum(np.asarray(spec.p, dtype=float)) * LOG2

    m = _GRID_BY_N[n]
    axes = [np.linspace(0.0, budgets[i], m) for i in range(n)]
    u_all, vals, order = _masked_grid_min(axes, beta, a, g, budgets)

    # zoom chains from up to three distinct incumbents
    cells = [axes[i][1] - axes[i][0] for i in range(n)]
    starts = []
    for idx in order[: min(12, len(order))]:
        if not math.isfinite(vals[idx]):
            break
        pt = u_all[:, idx]
        if all(np.linalg.norm(pt - s) > 2.0 * max(cells) for s in starts):
            starts.append(pt.copy())
        if len(starts) == 3:
            break
    if not starts:
        starts = [np.zeros(n)]

    best_u, best_val = starts[0], math.inf
    m_local = _LOCAL_BY_N[n]
    for start in starts:
        centre = start
        width = np.array(cells, dtype=float)
        for _ in range(4):
            loc_axes = [
                np.linspace(max(0.0, centre[i] - 2.0 * width[i]),
                            min(budgets[i], centre[i] + 2.0 * width[i]), m_local)
                for i in range(n)
            ]
            u_loc, v_loc, o_loc = _masked_grid_min(loc_axes, beta, a, g, budgets)
            k = o_loc[0]
            if math.isfinite(v_loc[k]):
                centre = u_loc[:, k]
            width = np.array([ax[1] - ax[0] for ax in loc_axes])
        u_fin, v_fin = _coordinate_polish(centre, beta, a, g, budgets)
        if v_fin < best_val:
            best_u, best_val = u_fin, v_fin

    # the origin is always feasible (objective 0)
    best_val = min(best_val, 0.0)
    return LOG2 - best_val


# ---------------------------------------------------------------------------
# gamma -> 1 continuity, reduction, parameter recovery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaLimitReport:
    beta: float
    eps: tuple[float, ...]
    gaps: tuple[float, ...]
    exp_value: float

    @property
    def monotone(self) -> bool:
        return all(g2 <= g1 + 1e-12 for g1, g2 in zip(self.gaps, self.gaps[1:]))


def gamma_limit_check(spec: GremSpec, beta: float,
                      eps=(0.1, 0.01, 0.001)) -> GammaLimitReport:
    """Gap between the gamma = 1 + eps energy and the exponential one."""
    if spec.uniform_gamma is None:
        raise ValueError("gamma_limit_check requires a uniform-family spec")
    exp_spec = GremSpec.uniform(spec.p, spec.a, 1.0)
    target = grem_energy_exp(exp_spec, beta)
    gaps = tuple(
        abs(grem_energy_gamma(GremSpec.uniform(spec.p, spec.a, 1.0 + e), beta) - target)
        for e in eps
    )
    return GammaLimitReport(beta, tuple(eps), gaps, target)


def reduce_exp_grem(spec: GremSpec) -> GremSpec:
    """Collapse a gamma = 1 spec to its equivalent strictly-decreasing form.

    Group l of the exponential ladder contributes only through its last
    weight, so (p', a')_l = (sum of group proportions, a_{r_l}).
    """
    if spec.uniform_gamma != 1.0:
        raise ValueError("reduce_exp_grem requires uniform gamma = 1")
    lad = _ladder_exp(spec.p, spec.a)
    if lad.ranks and lad.ranks[-1] != spec.n:
        raise ValueError("cannot reduce a spec with an all-zero weight tail")
    p_new: list[float] = []
    a_new: list[float] = []
    prev = 0
    for r in lad.ranks:
        p_new.append(sum(spec.p[prev:r]))
        a_new.append(spec.a[r - 1])
        prev = r
    return GremSpec.uniform(tuple(p_new), tuple(a_new), 1.0)


def grem_curve(spec: GremSpec) -> FreeEnergyCurve:
    """Closed-form curve of a uniform-gamma spec (gamma >= 1)."""
    g = spec.uniform_gamma
    if g is None or g < 1.0:
        raise ValueError("grem_curve requires uniform gamma >= 1")
    if g == 1.0:
        lad = _ladder_exp(spec.p, spec.a)
        segs = [Segment("constant", (LOG2,))]
        c0, c1 = LOG2, 0.0
        prev = 0
        for b_l, r_l in zip(lad.betas, lad.ranks):
            q = sum(spec.p[prev:r_l]) * LOG2
            c0 -= q
            c1 += spec.a[r_l - 1] * q
            segs.append(Segment("linear", (c0, c1)))
            prev = r_l
        return FreeEnergyCurve(tuple(lad.betas), tuple(segs))
    lad = _ladder_gamma(spec.p, spec.a, g)
    gp = g / (g - 1.0)
    segs = []
    for j in range(len(lad.betas) + 1):
        r_j = lad.ranks[j - 1] if j > 0 else 0
        c0 = sum(spec.p[r_j:]) * LOG2
        c1 = 0.0
        prev = 0
        for l in range(j):
            r_l = lad.ranks[l]
            c1 += lad.betas[l] ** (1.0 / (g - 1.0)) * sum(w ** gp for w in spec.a[prev:r_l])
            prev = r_l
        c2 = (g - 1.0) / g * sum(w ** gp for w in spec.a[r_j:])
        if c2 == 0.0:
            segs.append(Segment("linear", (c0, c1)))
        elif g == 2.0:
            segs.append(Segment("quadratic", (c0, c1, c2)))
        else:
            segs.append(Segment("power", (c0, c1, c2, gp)))
    return FreeEnergyCurve(tuple(lad.betas), tuple(segs))


def _segment_power_parts(seg: Segment, gp: float):
    """(constant, linear, power coefficient) of a gamma-family segment."""
    if seg.kind == "quadratic":
        if abs(gp - 2.0) > 1e-9:
            raise InvalidCurveError("quadratic segment in a non-Gaussian curve")
        return seg.coeffs[0], seg.coeffs[1], seg.coeffs[2]
    if seg.kind == "power":
        if abs(seg.coeffs[3] - gp) > 1e-9:
            raise InvalidCurveError("segment exponent does not match the family")
        return seg.coeffs[0], seg.coeffs[1], seg.coeffs[2]
    if seg.kind == "linear":
        return seg.coeffs[0], seg.coeffs[1], 0.0
    if seg.kind == "constant":
        return seg.coeffs[0], 0.0, 0.0
    raise InvalidCurveError(f"segment kind {seg.kind!r} is not a GREM form")


def recover_params(curve: FreeEnergyCurve, family) -> GremSpec:
    """Recover (p, a) from a reduced-form GREM energy curve.

    ``family`` is ``"exp"`` or ``("gamma", g)`` with g > 1 (``"gaussian"``
    is an alias for gamma = 2).  Raises :class:`InvalidCurveError` when the
    characterization identity fails by more than 1e-8: for the exponential
    family sum x_i (c_i - c_{i-1}) = log 2 over the derivative steps, for
    the gamma family sum x_i^(g/(g-1)) (C_i - C_{i+1}) = g log 2 over the
    power-coefficient steps.
    """
    if family == "gaussian":
        family = ("gamma", 2.0)
    x = list(curve.breakpoints)
    n = len(x)
    if n == 0:
        raise InvalidCurveError("a reduced-form curve needs at least one breakpoint")
    if family == "exp":
        slopes = [0.0]
        for seg in curve.segments:
            if seg.kind == "constant":
                slopes.append(0.0)
            elif seg.kind == "linear":
                slopes.append(seg.coeffs[1])
            else:
                raise InvalidCurveError("exponential curves are piecewise linear")
        c = slopes[1:]  # c[i] = slope on (x_i, x_{i+1}), c[0] the flat piece
        if abs(float(curve.segments[0](0.0)) - LOG2) > 1e-8:
            raise InvalidCurveError("not a valid reduced-form energy curve")
        if any(c2 <= c1 for c1, c2 in zip(c, c[1:])) or c[0] != 0.0:
            raise InvalidCurveError("not a valid reduced-form energy curve")
        total = sum(x[i] * (c[i + 1] - c[i]) for i in range(n))
        if abs(total - LOG2) > 1e-8:
            raise InvalidCurveError("not a valid reduced-form energy curve")
        a = tuple(1.0 / xi for xi in x)
        p = tuple(x[i] * (c[i + 1] - c[i]) / LOG2 for i in range(n))
        return GremSpec.uniform(p, a, 1.0)
    if isinstance(family, tuple) and family[0] == "gamma":
        g = float(family[1])
        if not g > 1.0:
            raise InvalidCurveError("recovery needs gamma > 1")
        gp = g / (g - 1.0)
        parts = [_segment_power_parts(seg, gp) for seg in curve.segments]
        big_c = [gp * part[2] for part in parts] + [0.0]
        # the final segment must be purely linear (everything frozen)
        if parts[-1][2] != 0.0:
            raise InvalidCurveError("not a valid reduced-form energy curve")
        if abs(float(curve.segments[0](0.0)) - LOG2) > 1e-8:
            raise InvalidCurveError("not a valid reduced-form energy curve")
        if any(big_c[i + 1] >= big_c[i] for i in range(n)):
            raise InvalidCurveError("not a valid reduced-form energy curve")
        total = sum(x[i] ** gp * (big_c[i] - big_c[i + 1]) for i in range(n))
        if abs(total - g * LOG2) > 1e-8:
            raise InvalidCurveError("not a valid reduced-form energy curve")
        a = tuple((big_c[i] - big_c[i + 1]) ** (1.0 / gp) for i in range(n))
        p = tuple(x[i] ** gp * (big_c[i] - big_c[i + 1]) / (g * LOG2) for i in range(n))
        return GremSpec.uniform(p, a, g)
    raise ValueError(f"unsupported recovery family {family!r}")
