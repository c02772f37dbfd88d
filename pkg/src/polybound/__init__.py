"""polybound: verified evaluation and machine checking of polygamma-function bounds.

The core layers re-exported here are pure computation:

- engine: self-validating digamma/polygamma values with error radii
- means: logarithmic and generalized logarithmic means, shift solving
- catalog: the registry of strict inequalities as checkable bound cases
- verifier: grid sweeps, margin reports, counterexample refinement
- search: critical shifts, best-constant estimates, the failure threshold

The HTTP service and its models live in polybound.api; the command-line
client in polybound.cli.
"""

__version__ = "0.1.0"

from .catalog import (
    BoundCase,
    BoundEval,
    BoundId,
    bernoulli_power_bounds,
    evaluate_bound,
    exp_neg_psi,
    get_bound,
    list_bounds,
    make_cases,
    root_norm,
)
from .engine import (
    ApproxReal,
    DEFAULT_CONFIG,
    DomainError,
    ParameterError,
    PrecisionConfig,
    digamma,
    digamma_inverse,
    exp_inv_derivative,
    polygamma,
)
from .means import BracketError, MeanOrder, gen_log_mean, log_mean, solve_shift
from .search import (
    ConstantEstimate,
    CriticalShiftCurve,
    ThresholdResult,
    best_nk_constants,
    best_shift_constants,
    critical_shift,
    critical_shift_curve,
    critical_shift_nk,
    threshold_n,
)
from .verifier import (
    Counterexample,
    SampleGrid,
    VerificationReport,
    chain_check,
    complete_monotonicity_check,
    default_grid_points,
    limit_check,
    refine_counterexample,
    sweep,
)

__all__ = [
    "ApproxReal",
    "BoundCase",
    "BoundEval",
    "BoundId",
    "BracketError",
    "ConstantEstimate",
    "Counterexample",
    "CriticalShiftCurve",
    "DEFAULT_CONFIG",
    "DomainError",
    "MeanOrder",
    "ParameterError",
    "PrecisionConfig",
    "SampleGrid",
    "ThresholdResult",
    "VerificationReport",
    "__version__",
    "bernoulli_power_bounds",
    "best_nk_constants",
    "best_shift_constants",
    "chain_check",
    "complete_monotonicity_check",
    "critical_shift",
    "critical_shift_curve",
    "critical_shift_nk",
    "default_grid_points",
    "digamma",
    "digamma_inverse",
    "evaluate_bound",
    "exp_inv_derivative",
    "exp_neg_psi",
    "gen_log_mean",
    "get_bound",
    "limit_check",
    "list_bounds",
    "log_mean",
    "make_cases",
    "polygamma",
    "refine_counterexample",
    "root_norm",
    "solve_shift",
    "sweep",
    "threshold_n",
]
