"""Equity warrant valuation for firms whose value follows an uncertain differential equation."""

from .alpha_path import (
    AlphaPath,
    GeometricLiuSpec,
    UdeSpec,
    alpha_path_family,
    expected_monotone_functional,
    gbm_alpha_path,
    gbm_quantile,
    inverse_distribution_at,
    solve_alpha_path,
)
from .errors import (
    DivergenceError,
    DomainError,
    InfeasibleError,
    IntegrationError,
    NonConvergenceError,
    UWarrantError,
)
from .pricer import (
    CalibrationResult,
    FirmCapitalStructure,
    MarketObservables,
    MultipleRootsWarning,
    SolverOptions,
    calibrate,
    dfw_dv,
    elasticity,
    implied_stock_vol,
    price_warrant,
    pricing_terms,
    solve_firm_value,
    warrant_payoff,
)
from .uncertainty import (
    NormalUncertainVariable,
    QuadratureRule,
    QuantileFunction,
    expected_value_from_distribution,
    expected_value_from_quantile,
    integrate_logit,
    inv_normal,
    inv_std_normal,
    normal_distribution,
)

__version__ = "0.1.0"
