"""Alpha-paths of uncertain differential equations.

For ``dX = f(t, X) dt + g(t, X) dC`` the alpha-path solves the ordinary
differential equation ``x' = f(t, x) + |g(t, x)| * inv_std_normal(alpha)``.
At a fixed time the alpha-paths, read across alpha, form the inverse
uncertainty distribution of ``X_t``; expectations of monotone functionals
are integrals of ``I(X_t^alpha)`` over alpha.

The geometric model ``dV = mu V dt + sigma V dC`` has the closed form
``V_t^alpha = V0 exp(mu t + sigma t inv_std_normal(alpha))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.special import logit

from .errors import DivergenceError, DomainError, IntegrationError
from .uncertainty import (
    DEFAULT_RULE,
    SQRT3_OVER_PI,
    QuadratureRule,
    QuantileFunction,
    _check_alpha,
    integrate_logit,
    inv_std_normal,
)

__all__ = [
    "GeometricLiuSpec",
    "UdeSpec",
    "AlphaPath",
    "DIVERGENCE_THRESHOLD",
    "DEFAULT_ALPHA_LEVELS",
    "gbm_alpha_path",
    "gbm_quantile",
    "solve_alpha_path",
    "alpha_path_family",
    "inverse_distribution_at",
    "expected_monotone_functional",
]

DIVERGENCE_THRESHOLD = 1.0 - 1e-9
DEFAULT_STEPS = 10_000
DEFAULT_ALPHA_LEVELS = np.arange(1, 1000) / 1000.0


@dataclass(frozen=True)
class GeometricLiuSpec:
    """Firm value following dV = mu V dt + sigma V dC."""

    v0: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.v0) and self.v0 > 0):
            raise DomainError(f"v0 must be finite and > 0, got {self.v0!r}")
        if not math.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu!r}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise DomainError(f"sigma must be finite and >= 0, got {self.sigma!r}")

    def c(self, t: float) -> float:
        """Tail exponent sigma t sqrt(3)/pi; E[V_t] is finite iff c < 1."""
        return self.sigma * t * SQRT3_OVER_PI

    def as_ude(self) -> "UdeSpec":
        mu, sigma = self.mu, self.sigma
        return UdeSpec(lambda t, x: mu * x, lambda t, x: sigma * x)


@dataclass(frozen=True)
class UdeSpec:
    drift: Callable
    diffusion: Callable


@dataclass
class AlphaPath:
    alpha: float
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise DomainError("times and values must be 1-D arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("path values must be finite")

    def at(self, t: float) -> float:
        idx = np.flatnonzero(np.abs(self.times - t) <= 1e-12 * max(1.0, abs(t)))
        if idx.size == 0:
            raise DomainError(f"t={t!r} is not on the path's time grid")
        return float(self.values[idx[0]])


def _check_time(t):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr) & (arr >= 0)):
        raise DomainError(f"t must be finite and >= 0, got {t!r}")
    return arr


def gbm_alpha_path(spec: GeometricLiuSpec, t, alpha):
    """Closed-form alpha-path of the geometric model at time ``t``.

    Broadcasts over array-valued ``t`` and ``alpha``.
    """
    t_arr = _check_time(t)
    a_arr = _check_alpha(alpha)
    out = spec.v0 * np.exp(spec.mu * t_arr + spec.sigma * t_arr * SQRT3_OVER_PI * logit(a_arr))
    return float(out) if out.ndim == 0 else out


def gbm_quantile(spec: GeometricLiuSpec, t: float) -> QuantileFunction:
    """The alpha-paths at time ``t`` as an inverse distribution of V_t.

    Carries the logit form ``V0 exp(mu t + c u)`` so integrators can reach
    levels too close to 1 to represent as floats.
    """
    _check_time(t)
    log_base, c = math.log(spec.v0) + spec.mu * t, spec.c(t)
    return QuantileFunction(
        lambda alpha: gbm_alpha_path(spec, t, alpha),
        logit_eval=lambda u: np.exp(log_base + c * np.asarray(u, dtype=float)),
    )


def _rk4_segment(ude, x, t0, t1, z, steps):
    """Advance ``x`` from t0 to t1 in ``steps`` classical RK4 steps."""
    h = (t1 - t0) / steps

    def rhs(t, y):
        return ude.drift(t, y) + np.abs(ude.diffusion(t, y)) * z

    t = t0
    for i in range(steps):
        k1 = rhs(t, x)
        k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + (i + 1) * h
        if not np.all(np.isfinite(x)):
            raise IntegrationError(f"alpha-path integration blew up at t={t!r}", time=t)
    return x


def solve_alpha_path(ude: UdeSpec, x0: float, t_end: float, alpha: float, steps: int = DEFAULT_STEPS) -> AlphaPath:
    """Integrate the alpha-path ODE on a uniform grid of ``steps`` RK4 steps."""
    _check_alpha(alpha)
    if not (math.isfinite(t_end) and t_end > 0):
        raise DomainError(f"t_end must be finite and > 0, got {t_end!r}")
    if int(steps) != steps or steps < 1:
        raise DomainError(f"steps must be a positive integer, got {steps!r}")
    steps = int(steps)
    z = float(inv_std_normal(alpha))
    times = np.linspace(0.0, t_end, steps + 1)
    values = np.empty(steps + 1)
    values[0] = x = float(x0)
    with np.errstate(all="ignore"):
        for i in range(steps):
            x = float(_rk4_segment(ude, x, times[i], times[i + 1], z, 1))
            values[i + 1] = x
    return AlphaPath(alpha, times, values)


def _ude_terminal(ude, x0, t_end, z, steps):
    """Vectorised RK4 alpha-path values at ``t_end`` for an array of z = inv_std_normal(alpha)."""
    x = np.full(np.shape(z), float(x0))
    if t_end == 0:
        return x
    with np.errstate(all="ignore"):
        return _rk4_segment(ude, x, 0.0, t_end, np.asarray(z, dtype=float), steps)


def alpha_path_family(
    model: Union[GeometricLiuSpec, UdeSpec],
    times: Sequence[float],
    alphas: Optional[Sequence[float]] = None,
    *,
    x0: Optional[float] = None,
    steps: int = DEFAULT_STEPS,
) -> list:
    """Alpha-paths for every level in ``alphas`` sampled at ``times``.

    ``times`` must start at 0.  Geometric models use the closed form; a
    generic :class:`UdeSpec` (which needs ``x0``) is integrated by RK4 for all
    levels at once, using about ``steps`` steps over the whole horizon, so
    drift and diffusion must accept numpy arrays.
    """
    times = _check_time(times).ravel()
    if times.size == 0 or times[0] != 0 or np.any(np.diff(times) <= 0):
        raise DomainError("times must start at 0 and be strictly increasing")
    alphas = DEFAULT_ALPHA_LEVELS if alphas is None else np.asarray(alphas, dtype=float).ravel()
    _check_alpha(alphas)
    if isinstance(model, GeometricLiuSpec):
        grid = gbm_alpha_path(model, times[None, :], alphas[:, None])
    else:
        if x0 is None:
            raise DomainError("x0 is required for a generic UdeSpec")
        z = inv_std_normal(alphas)
        grid = np.empty((alphas.size, times.size))
        grid[:, 0] = x = np.full(alphas.size, float(x0))
        t_end = times[-1]
        with np.errstate(all="ignore"):
            for j in range(1, times.size):
                n = max(1, math.ceil(steps * (times[j] - times[j - 1]) / t_end))
                x = _rk4_segment(model, x, times[j - 1], times[j], z, n)
                grid[:, j] = x
    return [AlphaPath(float(a), times.copy(), row) for a, row in zip(alphas, grid)]


def inverse_distribution_at(paths: Sequence[AlphaPath], alpha: float, t: Optional[float] = None) -> float:
    """Read the inverse uncertainty distribution of X_t off an alpha-path family.

    Between computed levels the value is interpolated linearly, which keeps
    it monotone in alpha.  ``t`` defaults to the last time of the paths.
    """
    if not paths:
        raise DomainError("paths must be a non-empty family")
    _check_alpha(alpha)
    if t is None:
        t = float(paths[0].times[-1])
    levels = np.array([p.alpha for p in paths])
    values = np.array([p.at(t) for p in paths])
    order = np.argsort(levels, kind="stable")
    levels, values = levels[order], values[order]
    if not levels[0] <= alpha <= levels[-1]:
        raise DomainError(f"alpha={alpha!r} lies outside the family's levels [{levels[0]}, {levels[-1]}]")
    return float(np.interp(alpha, levels, values))


def expected_monotone_functional(
    model: Union[GeometricLiuSpec, UdeSpec],
    t: float,
    func: Callable,
    rule: QuadratureRule = DEFAULT_RULE,
    *,
    x0: Optional[float] = None,
    steps: int = DEFAULT_STEPS,
) -> float:
    """E[I(X_t)] = int_0^1 I(X_t^alpha) d alpha for monotone ``func``.

    ``func`` must accept numpy arrays.  A non-converging integral is raised as
    :class:`DivergenceError`; for geometric models the error carries
    ``c = sigma t sqrt(3)/pi`` (identity-like functionals diverge for c >= 1).
    """
    _check_time(t)
    if isinstance(model, GeometricLiuSpec):
        c = model.c(t)
        log_base = math.log(model.v0) + model.mu * t

        def integrand(u):
            return func(np.exp(log_base + c * u))

    else:
        if x0 is None:
            raise DomainError("x0 is required for a generic UdeSpec")
        c = None

        def integrand(u):
            return func(_ude_terminal(model, x0, t, SQRT3_OVER_PI * np.asarray(u), steps))

    try:
        return integrate_logit(integrand, rule=rule)
    except IntegrationError as exc:
        detail = f" (c = {c:.17g})" if c is not None else ""
        raise DivergenceError(f"expectation did not converge{detail}: {exc}", c=c) from exc
