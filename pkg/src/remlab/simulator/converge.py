"""Finite-N versus limiting free energy comparison tables."""

from __future__ import annotations

from dataclasses import dataclass

from .. import analytic_rem
from ..analytic_bk import BkSpec, bk_energy_min
from ..analytic_grem import GremSpec, grem_energy
from ..external_field import WordSpec, word_grem_energy
from ..rates import rate_from_descriptor
from .engine import RemModel, simulate
from .trees import TreeModel

__all__ = ["ConvergenceRow", "analytic_reference", "converge"]


def analytic_reference(model, beta: float) -> float:
    """The limiting value a simulation of ``model`` should approach.

    Closed forms are used where the model matches one; everything else
    falls back to the variational oracles.
    """
    if isinstance(model, RemModel):
        family = model.rate_desc["family"]
        params = model.rate_desc.get("params", [])
        a = model.a
        if a == 1.0:
            if family == "gaussian":
                return analytic_rem.rem_gaussian(beta)
            if family == "exponential":
                return analytic_rem.rem_exponential(beta)
            if family == "power-gamma":
                return analytic_rem.rem_weibull(params[0], beta)
            if family == "poisson":
                return analytic_rem.rem_poisson(params[0], 1, beta)
            if family == "negated-poisson":
                return analytic_rem.rem_poisson(params[0], -1, beta)
            if family == "binomial":
                return analytic_rem.rem_binomial(params[0], 1, beta)
            if family == "negated-binomial":
                return analytic_rem.rem_binomial(params[0], -1, beta)
            if family == "truncated-exponential":
                return analytic_rem.rem_truncated("exp", params[0], beta)
            if family == "truncated-gaussian":
                # the rate descriptor carries the half-width w; the closed
                # form is parametrized by the rate height w^2/2
                return analytic_rem.rem_truncated("gauss", 0.5 * params[0] ** 2, beta)
        rate = rate_from_descriptor(model.rate_desc)
        return analytic_rem.rem_variational(rate, ("scale", a), beta)
    if isinstance(model, GremSpec):
        return grem_energy(model, beta)
    if isinstance(model, BkSpec):
        return bk_energy_min(model, beta)
    if isinstance(model, WordSpec):
        return word_grem_energy(model, beta)
    raise TypeError(f"no analytic reference for {type(model).__name__}")


@dataclass(frozen=True)
class ConvergenceRow:
    tree: str
    N: int
    beta: float
    mean: float
    std: float
    analytic: float

    @property
    def abs_err(self) -> float:
        return abs(self.mean - self.analytic)


def converge(model, N_list, betas, *, replicas: int = 4, seed: int = 0,
             trees=("fixed",)) -> list[ConvergenceRow]:
    """Run ``simulate`` across an N-list and join with the analytic limit.

    Median errors usually shrink with N; that is reported, not asserted.
    """
    rows: list[ConvergenceRow] = []
    refs = {float(b): analytic_reference(model, float(b)) for b in betas}
    for variant in trees:
        for N in N_list:
            tree = None
            if not isinstance(model, (BkSpec, WordSpec)):
                p = model.p if isinstance(model, GremSpec) else (1.0,)
                tree = TreeModel(variant, tuple(p))
            elif variant != "fixed":
                raise ValueError("subset/word models support the fixed tree only")
            result = simulate(model, N, betas, replicas=replicas, seed=seed,
                              tree=tree)
            mean = result.mean()
            std = result.std()
            for i, b in enumerate(result.betas):
                rows.append(ConvergenceRow(variant, N, b, float(mean[i]),
                                           float(std[i]), refs[float(b)]))
    return rows


def rows_to_csv(rows: list[ConvergenceRow]) -> str:
    out = ["tree,N,beta,mean,std,analytic,abs_err"]
    for r in rows:
        out.append(f"{r.tree},{r.N},{r.beta:.17g},{r.mean:.17g},{r.std:.17g},"
                   f"{r.analytic:.17g},{r.abs_err:.17g}")
    return "\n".join(out) + "\n"
