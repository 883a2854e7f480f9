"""remlab: limiting free energies of random energy models.

Closed forms for REM/GREM variants, variational oracles that certify
them, and a finite-N simulator for cross-validation.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .analytic_bk import (
    BkSpec,
    ChainResult,
    bk_chain,
    bk_energy_chain,
    bk_energy_min,
    block_tree_energy,
    pi_grem,
)
from .analytic_grem import (
    BetaLadder,
    GremSpec,
    beta_ladder,
    gamma_limit_check,
    grem2_exp_gauss,
    grem2_gauss_exp,
    grem2_sub1,
    grem_curve,
    grem_energy,
    grem_energy_exp,
    grem_energy_gamma,
    grem_variational,
    recover_params,
    reduce_exp_grem,
)
from .analytic_rem import (
    annealed_compact,
    build_rem_curve,
    rem_binomial,
    rem_exponential,
    rem_gaussian,
    rem_poisson,
    rem_truncated,
    rem_variational,
    rem_weibull,
)
from .curves import FreeEnergyCurve, InvalidCurveError, Segment
from .external_field import (
    FieldParams,
    WordSpec,
    binary_entropy_rate,
    rem_field_energy,
    rem_field_grid_oracle,
    word_grem_energy,
)
from .rates import (
    LOG2,
    BinomialRate,
    DrivingDistribution,
    GaussianRate,
    NegatedRate,
    PiecewiseHalfRate,
    PoissonRate,
    PowerGammaRate,
    RateFunction,
    TruncatedRate,
    TwoSidedExponentialRate,
    distribution_from_descriptor,
    rate_from_descriptor,
)
from .simulator import (
    BudgetError,
    RemModel,
    SimResult,
    TreeModel,
    TreeStats,
    converge,
    empirical_ldp,
    partition,
    simulate,
)

__version__ = "0.1.0"
