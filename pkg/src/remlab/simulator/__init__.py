from .converge import ConvergenceRow, analytic_reference, converge, rows_to_csv
from .engine import BudgetError, RemModel, SimResult, model_descriptor, simulate
from .ldp import EmpiricalHistogram, bin_rate_infimum, empirical_ldp
from .rng import stream
from .trees import (
    PerNodeTree,
    RegularTree,
    TreeModel,
    TreeStats,
    build_tree,
    multinomial_path,
    partition,
)

__all__ = [
    "BudgetError",
    "ConvergenceRow",
    "EmpiricalHistogram",
    "PerNodeTree",
    "RegularTree",
    "RemModel",
    "SimResult",
    "TreeModel",
    "TreeStats",
    "analytic_reference",
    "bin_rate_infimum",
    "build_tree",
    "converge",
    "empirical_ldp",
    "model_descriptor",
    "multinomial_path",
    "partition",
    "rows_to_csv",
    "simulate",
    "stream",
]
