"""Dilution-adjusted equity warrant pricing and calibration.

A firm has ``N`` shares and ``M`` warrants; each warrant buys ``k`` new shares
for ``J`` at maturity.  With the firm value following the geometric Liu
model, the warrant price is

    f_w = exp(-r tau) / (N + M k) * int_0^1 (k V_tau^alpha - N J)^+ d alpha

where ``V_tau^alpha = V_t exp(mu tau + c ln(alpha / (1 - alpha)))`` and
``c = sigma tau sqrt(3) / pi``.  The payoff is positive exactly above the
level ``alpha0`` where ``k V_tau^alpha = N J``, so the integral is taken over
``[logit(alpha0), inf)`` in logit space, where the integrand is smooth.

Firm value ``V_t`` and volatility ``sigma`` are not observed.  ``calibrate``
recovers them from the stock price and stock volatility by solving

    N S_t = V_t - M f_w
    sigma_s = sigma V_t / (N S_t) * (1 - M df_w/dV_t)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import expit

from .alpha_path import DIVERGENCE_THRESHOLD
from .errors import DivergenceError, DomainError, InfeasibleError, NonConvergenceError
from .uncertainty import DEFAULT_RULE, SQRT3_OVER_PI, QuadratureRule, integrate_logit, log_logistic_weight

__all__ = [
    "FirmCapitalStructure",
    "MarketObservables",
    "PricingTerms",
    "SolverOptions",
    "CalibrationResult",
    "MultipleRootsWarning",
    "warrant_payoff",
    "pricing_terms",
    "price_warrant",
    "dfw_dv",
    "implied_stock_vol",
    "elasticity",
    "solve_firm_value",
    "calibrate",
]


def _finite(name, value, *, positive=False, nonnegative=False):
    if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
        raise DomainError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    if positive and not value > 0:
        raise DomainError(f"{name} must be > 0, got {value!r}")
    if nonnegative and not value >= 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")


@dataclass(frozen=True)
class FirmCapitalStructure:
    n_shares: float
    m_warrants: float
    k_ratio: float
    j_payment: float

    def __post_init__(self):
        _finite("n_shares", self.n_shares, positive=True)
        _finite("m_warrants", self.m_warrants, nonnegative=True)
        _finite("k_ratio", self.k_ratio, positive=True)
        _finite("j_payment", self.j_payment, nonnegative=True)

    @property
    def dilution(self) -> float:
        """Per-warrant share of post-exercise firm value, 1 / (N + M k)."""
        return 1.0 / (self.n_shares + self.m_warrants * self.k_ratio)


@dataclass(frozen=True)
class MarketObservables:
    stock_price: float
    stock_vol: float
    rate: float
    horizon: float
    drift: float

    def __post_init__(self):
        _finite("stock_price", self.stock_price, positive=True)
        _finite("stock_vol", self.stock_vol, positive=True)
        _finite("rate", self.rate)
        _finite("horizon", self.horizon, positive=True)
        _finite("drift", self.drift)


@dataclass(frozen=True)
class PricingTerms:
    """Closed-form pieces of the pricing integral at one (V_t, sigma)."""

    c: float
    u0: float
    alpha0: float
    discount: float
    log_forward: float


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 200
    scan_ratio: float = math.sqrt(2.0)
    scan_below: int = 12

    def __post_init__(self):
        _finite("tol", self.tol, positive=True)
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if not self.scan_ratio > 1:
            raise DomainError(f"scan_ratio must be > 1, got {self.scan_ratio!r}")


@dataclass
class CalibrationResult:
    sigma_star: float
    v_star: float
    price: float
    beta: float
    residual_value: float
    residual_vol: float
    iterations: int
    brackets: list = field(default_factory=list)


class MultipleRootsWarning(RuntimeWarning):
    """The volatility equation changes sign more than once on the scan grid."""


def warrant_payoff(v_T: float, cap: FirmCapitalStructure) -> float:
    """Undiscounted per-warrant payoff (k V_T - N J)^+ / (N + M k)."""
    _finite("v_T", v_T, nonnegative=True)
    return max(cap.k_ratio * v_T - cap.n_shares * cap.j_payment, 0.0) * cap.dilution


def pricing_terms(v_t: float, sigma: float, cap: FirmCapitalStructure, mkt: MarketObservables) -> PricingTerms:
    """Validate inputs and compute c, the exercise boundary and the discount.

    Raises :class:`DivergenceError` when ``c`` reaches the divergence threshold.
    """
    _finite("v_t", v_t, positive=True)
    _finite("sigma", sigma, nonnegative=True)
    tau = mkt.horizon
    c = sigma * tau * SQRT3_OVER_PI
    if c >= DIVERGENCE_THRESHOLD:
        raise DivergenceError(
            f"c = sigma*tau*sqrt(3)/pi = {c:.17g} >= 1: the warrant price integral diverges", c=c
        )
    log_forward = math.log(cap.k_ratio * v_t) + mkt.drift * tau
    strike = cap.n_shares * cap.j_payment
    if strike == 0:
        u0 = -math.inf
    elif c == 0:
        u0 = -math.inf if log_forward > math.log(strike) else math.inf
    else:
        u0 = (math.log(strike) - log_forward) / c
    alpha0 = float(expit(u0))
    return PricingTerms(c, u0, alpha0, math.exp(-mkt.rate * tau), log_forward)


def price_warrant(
    v_t: float,
    sigma: float,
    cap: FirmCapitalStructure,
    mkt: MarketObservables,
    rule: QuadratureRule = DEFAULT_RULE,
) -> float:
    terms = pricing_terms(v_t, sigma, cap, mkt)
    strike = cap.n_shares * cap.j_payment
    if terms.c == 0:
        payoff = max(math.exp(terms.log_forward) - strike, 0.0)
        return terms.discount * payoff * cap.dilution
    c, log_forward = terms.c, terms.log_forward

    def integrand(u):
        log_w = log_logistic_weight(u)
        return np.exp(log_forward + c * u + log_w) - strike * np.exp(log_w)

    integral = integrate_logit(integrand, terms.u0, math.inf, rule=rule, weighted=False)
    return max(terms.discount * integral * cap.dilution, 0.0)


def dfw_dv(
    v_t: float,
    sigma: float,
    cap: FirmCapitalStructure,
    mkt: MarketObservables,
    rule: QuadratureRule = DEFAULT_RULE,
) -> float:
    """Sensitivity of the warrant price to firm value.

    The boundary term vanishes because the payoff is zero at ``alpha0``, so
    this is the V_t-derivative of the integrand integrated over the
    in-the-money levels.
    """
    terms = pricing_terms(v_t, sigma, cap, mkt)
    scale = terms.discount * cap.k_ratio * math.exp(mkt.drift * mkt.horizon) * cap.dilution
    if terms.c == 0:
        return scale if terms.u0 == -math.inf else 0.0
    c = terms.c
    log_scale = math.log(scale)
    integral = integrate_logit(
        lambda u: np.exp(log_scale + c * u + log_logistic_weight(u)),
        terms.u0,
        math.inf,
        rule=rule,
        weighted=False,
    )
    return integral


def _stock_sensitivity(v_t, sigma, cap, mkt, rule):
    """(V_t / S_t) dS_t/dV_t with dS_t/dV_t = (1 - M df_w/dV_t) / N."""
    slope = 1.0 - cap.m_warrants * dfw_dv(v_t, sigma, cap, mkt, rule)
    return v_t * slope / (cap.n_shares * mkt.stock_price)


def implied_stock_vol(
    v_t: float,
    sigma: float,
    cap: FirmCapitalStructure,
    mkt: MarketObservables,
    rule: QuadratureRule = DEFAULT_RULE,
) -> float:
    """Stock volatility implied by firm volatility: sigma * elasticity."""
    return sigma * _stock_sensitivity(v_t, sigma, cap, mkt, rule)


def elasticity(
    v_t: float,
    sigma: float,
    cap: FirmCapitalStructure,
    mkt: MarketObservables,
    rule: QuadratureRule = DEFAULT_RULE,
) -> float:
    if not sigma > 0:
        raise DomainError(f"elasticity needs sigma > 0, got {sigma!r}")
    return _stock_sensitivity(v_t, sigma, cap, mkt, rule)


def solve_firm_value(
    sigma: float,
    cap: FirmCapitalStructure,
    mkt: MarketObservables,
    rule: QuadratureRule = DEFAULT_RULE,
    max_iter: int = 200,
) -> float:
    """Solve N S_t = V_t - M f_w(V_t, sigma) for V_t.

    Safeguarded Newton on a bracket that starts at ``V = N S_t``.  The value
    equation is increasing in V_t only while ``1 - M df_w/dV_t > 0``; if that
    fails the system has no solution at this sigma and
    :class:`InfeasibleError` is raised.
    """
    n_s = cap.n_shares * mkt.stock_price
    m = cap.m_warrants
    if m == 0:
        return n_s

    def g_and_slope(v):
        g = v - m * price_warrant(v, sigma, cap, mkt, rule) - n_s
        slope = 1.0 - m * dfw_dv(v, sigma, cap, mkt, rule)
        if not slope > 0:
            raise InfeasibleError(
                f"1 - M*df_w/dV_t = {slope:.6g} <= 0 at V_t = {v:.17g}, sigma = {sigma:.17g}: "
                "the value equation has no increasing branch",
                last={"sigma": sigma, "v": v, "slope": slope},
            )
        return g, slope

    lo = n_s
    g_lo, slope = g_and_slope(lo)
    if g_lo >= 0:
        return lo
    hi = None
    v, g = lo, g_lo
    for _ in range(max_iter):
        step = g / slope
        candidate = v - step
        if hi is not None and not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        elif hi is None and candidate <= lo:
            candidate = 2.0 * lo
        v = candidate
        g, slope = g_and_slope(v)
        if g < 0:
            lo = v
        else:
            hi = v
        if abs(g) <= 1e-14 * n_s or abs(step) <= 4 * np.finfo(float).eps * v:
            return v
    raise NonConvergenceError(
        f"value equation did not converge in {max_iter} iterations at sigma = {sigma:.17g}",
        last={"sigma": sigma, "v": v, "residual_value": g},
    )


def _vol_residual(sigma, cap, mkt, rule):
    v = solve_firm_value(sigma, cap, mkt, rule)
    return implied_stock_vol(v, sigma, cap, mkt, rule) - mkt.stock_vol, v


def _result(sigma, v, cap, mkt, rule, iterations, brackets):
    price = price_warrant(v, sigma, cap, mkt, rule)
    beta = elasticity(v, sigma, cap, mkt, rule)
    n_s = cap.n_shares * mkt.stock_price
    return CalibrationResult(
        sigma_star=sigma,
        v_star=v,
        price=price,
        beta=beta,
        residual_value=abs(v - cap.m_warrants * price - n_s),
        residual_vol=abs(sigma * beta - mkt.stock_vol),
        iterations=iterations,
        brackets=brackets,
    )


def _scan(cap, mkt, rule, opts):
    """Evaluate the volatility residual on a geometric sigma grid through sigma_s.

    Returns the sign-change brackets and the last feasible grid point; the
    scan stops at the divergence boundary or where the value equation loses
    its solution.
    """
    sigma_max = DIVERGENCE_THRESHOLD / (mkt.horizon * SQRT3_OVER_PI)
    sigma = mkt.stock_vol * opts.scan_ratio ** (-opts.scan_below)
    points = []
    boundary = None
    while sigma < sigma_max:
        try:
            h, v = _vol_residual(sigma, cap, mkt, rule)
        except InfeasibleError as exc:
            boundary = exc
            break
        points.append((sigma, h, v))
        sigma *= opts.scan_ratio
    brackets = [
        (a[0], b[0]) for a, b in zip(points, points[1:]) if (a[1] < 0) != (b[1] < 0) or a[1] == 0
    ]
    return points, brackets, boundary


def calibrate(
    cap: FirmCapitalStructure,
    mkt: MarketObservables,
    opts: Optional[SolverOptions] = None,
    rule: QuadratureRule = DEFAULT_RULE,
) -> CalibrationResult:
    """Recover (sigma*, V_t*) from the stock price and stock volatility.

    With no warrants the system decouples and the answer is exact:
    ``(sigma_s, N S_t)``.  Otherwise the volatility residual is scanned on a
    geometric grid to bracket its roots and the smallest root is refined by
    the Illinois variant of regula falsi; every evaluation solves the value
    equation for V_t first.  Several brackets trigger
    :class:`MultipleRootsWarning`.
    """
    opts = opts or SolverOptions()
    n_s = cap.n_shares * mkt.stock_price
    if cap.m_warrants == 0:
        # nothing dilutes: the stock is the firm. price is the notional warrant
        # value, infinite when its integral diverges.
        try:
            price = price_warrant(n_s, mkt.stock_vol, cap, mkt, rule)
        except DivergenceError:
            price = math.inf
        return CalibrationResult(mkt.stock_vol, n_s, price, 1.0, 0.0, 0.0, 0, [])

    points, brackets, boundary = _scan(cap, mkt, rule, opts)
    if not brackets:
        last = points[-1] if points else (math.nan, math.nan, math.nan)
        where = f"; scan stopped at the feasibility boundary: {boundary}" if boundary else ""
        raise InfeasibleError(
            f"no sign change of the volatility equation for sigma in (0, {last[0]:.6g}]{where}",
            last={"sigma": last[0], "v": last[2], "residual_vol": last[1]},
        )
    if len(brackets) > 1:
        warnings.warn(
            f"volatility equation has {len(brackets)} sign changes {brackets}; returning the smallest root",
            MultipleRootsWarning,
            stacklevel=2,
        )

    a, b = brackets[0]
    lookup = {p[0]: p for p in points}
    fa, va = lookup[a][1], lookup[a][2]
    fb, vb = lookup[b][1], lookup[b][2]
    tol_vol = opts.tol * mkt.stock_vol
    side = 0
    sigma, h, v = a, fa, va
    for iteration in range(1, opts.max_iter + 1):
        sigma = b - fb * (b - a) / (fb - fa)
        if not a < sigma < b:
            sigma = 0.5 * (a + b)
        h, v = _vol_residual(sigma, cap, mkt, rule)
        if abs(h) <= 1e-3 * tol_vol or (b - a) <= 4 * np.finfo(float).eps * b:
            return _result(sigma, v, cap, mkt, rule, iteration, brackets)
        if (h < 0) == (fb < 0):
            b, fb = sigma, h
            if side == -1:
                fa *= 0.5
            side = -1
        else:
            a, fa = sigma, h
            if side == 1:
                fb *= 0.5
            side = 1
    raise NonConvergenceError(
        f"calibration did not converge in {opts.max_iter} iterations",
        last={
            "sigma": sigma,
            "v": v,
            "residual_vol": abs(h),
            "residual_value": abs(v - cap.m_warrants * price_warrant(v, sigma, cap, mkt, rule) - n_s),
        },
    )
