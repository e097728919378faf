"""Upper-comonotonic couplings: dependence calibration and tail risk of aggregates.

Coordinates are independent below a common threshold ``gamma`` and
comonotone above it. A dependence budget fixes ``gamma``; tail risk
measures at levels ``alpha >= gamma`` then match the comonotone worst case.
"""

from .aggregation import (
    CustomAggregation,
    WeightedSum,
    aggregate_distribution,
    binomial_var,
    comonotone_distribution,
    conditional_distribution,
    conditional_var,
    expectile_aggregate,
    q_alpha,
    ratio_bounds,
    var_aggregate,
    var_ratio_curve,
)
from .calibration import CalibrationResult, delta_from_gamma, feasibility_bound, gamma_from_delta
from .coupling import GammaCoupling, copula_value, lower_orthant_dominates, sample, sample_conditional
from .dependence import (
    DependenceConstraint,
    Measure,
    aggregate_pairwise,
    analytic_dependence_gamma,
    estimate_dependence,
    reduce_constraints,
)
from .errors import ConvergenceError, DomainError, HypothesisNotSatisfied, InfeasibleError
from .marginals import Bernoulli, Dirac, Discrete, Empirical, Exponential, MarginalDist, Uniform01, from_sample
from .montecarlo import McConfig, mc_dependence_sweep, mc_expectile, mc_var
from .portfolio import PortfolioSpec, RiskReport, emit_figure_data, load_portfolio, run_report
from .riskmeasures import es, expectile, tail_distribution, tails_equal, var

__version__ = "0.1.0"
