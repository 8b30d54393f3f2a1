"""Optimal proposal scaling for random-walk MCMC under general acceptance rules."""

from .accept import (
    BalancingFunction,
    barker,
    bedard,
    check_balance,
    evaluate,
    generalized_barker,
    lazy,
    lipschitz_estimate,
    log_evaluate,
    mh,
    mix,
    parse,
)
from .errors import (
    BracketError,
    ChainError,
    DomainError,
    NonTerminationError,
    QuadratureError,
)
from .optim import OptimalScaling, efficiency_curves, optimal_l, optimize, speed_measure, table1
from .quad import (
    QuadratureSpec,
    acceptance_rate,
    acceptance_rate_bedard_closed,
    acceptance_rate_mh_closed,
    odd_moment,
)
from .sampler import ChainConfig, ChainStats, acceptance_vs_dimension, finite_d_optimal, run_chain
from .target import Target1D, logistic, moment_check, normal, quartic, roughness_I

__version__ = "0.1.0"
