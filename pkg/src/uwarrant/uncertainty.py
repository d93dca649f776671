"""Normal uncertainty distributions and expected values as quantile integrals.

The expectation of an uncertain variable with a regular distribution is the
integral of its inverse distribution over (0, 1).  The inverse normal
uncertainty distribution has logarithmic singularities at both ends, so the
default integrator works in logit space: with ``alpha = 1/(1 + exp(-u))`` the
integral becomes

    int_{-inf}^{inf} q(expit(u)) * expit(u) * expit(-u) du

whose integrand is smooth and decays exponentially.  The real line is covered
by windows of doubling length, each integrated by adaptive Gauss-Legendre
panels, until a window contributes less than the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expit, logit

from .errors import DomainError, IntegrationError

__all__ = [
    "SQRT3_OVER_PI",
    "NormalUncertainVariable",
    "QuantileFunction",
    "QuadratureRule",
    "normal_distribution",
    "inv_std_normal",
    "inv_normal",
    "logistic_weight",
    "log_logistic_weight",
    "integrate_logit",
    "expected_value_from_quantile",
    "expected_value_from_distribution",
]

SQRT3_OVER_PI = math.sqrt(3.0) / math.pi

# expit(u) rounds to 1.0 beyond this, so alpha-space callables are only
# evaluated inside [-_ALPHA_SAFE_U, _ALPHA_SAFE_U].
_ALPHA_SAFE_U = 36.0
_TAIL_CUTOFF = 1e-12


@dataclass(frozen=True)
class NormalUncertainVariable:
    """Normal uncertain variable N(e, sigma)."""

    e: float
    sigma: float

    def __post_init__(self):
        if not math.isfinite(self.e):
            raise DomainError(f"e must be finite, got {self.e!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be finite and > 0, got {self.sigma!r}")

    def quantile(self) -> "QuantileFunction":
        e, scale = self.e, self.sigma * SQRT3_OVER_PI
        return QuantileFunction(
            lambda alpha: inv_normal(self, alpha),
            logit_eval=lambda u: e + scale * np.asarray(u, dtype=float),
        )


@dataclass(frozen=True)
class QuantileFunction:
    """A nondecreasing map from alpha in (0, 1) to the reals.

    ``logit_eval`` optionally gives the same function in terms of
    ``u = ln(alpha / (1 - alpha))``.  Supplying it lets the integrator reach
    far into the tails, where ``alpha`` itself is no longer representable.
    """

    eval: Callable
    logit_eval: Optional[Callable] = None

    def __call__(self, alpha):
        return self.eval(alpha)

    def at_logit(self, u):
        u = np.asarray(u, dtype=float)
        if self.logit_eval is not None:
            return _call_vectorized(self.logit_eval, u)
        return _call_vectorized(self.eval, expit(u))


@dataclass(frozen=True)
class QuadratureRule:
    """Settings for the quantile and tail integrators.

    ``method`` is ``"logistic"`` (adaptive, logit space) or ``"composite"``,
    a fixed Gauss-Legendre rule on ``[eps, 1 - eps]`` kept as a cross-check.
    """

    method: str = "logistic"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_nodes: int = 2**20
    order: int = 20
    panel_width: float = 1.0
    window: float = 16.0
    eps: float = 1e-9
    panels: int = 2048

    def __post_init__(self):
        if self.method not in ("logistic", "composite"):
            raise DomainError(f"unknown quadrature method {self.method!r}")
        for name in ("abs_tol", "rel_tol", "panel_width", "window"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and > 0, got {value!r}")
        if self.max_nodes < 1 or self.order < 2 or self.panels < 1:
            raise DomainError("max_nodes, order and panels must be positive (order >= 2)")
        if not 0 < self.eps < 0.5:
            raise DomainError(f"eps must lie in (0, 0.5), got {self.eps!r}")

    def tolerance(self, scale: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(scale))


DEFAULT_RULE = QuadratureRule()


def _call_vectorized(func, x):
    x = np.asarray(x, dtype=float)
    try:
        out = np.asarray(func(x), dtype=float)
    except (TypeError, ValueError):
        out = None
    if out is None or out.shape != x.shape:
        if out is not None and out.ndim == 0:
            return np.full(x.shape, float(out))
        out = np.array([float(func(float(xi))) for xi in x.ravel()]).reshape(x.shape)
    return out


def _as_output(result, scalar_input):
    return float(result) if scalar_input else result


def normal_distribution(v: NormalUncertainVariable, x):
    """Phi(x) = 1 / (1 + exp(pi (e - x) / (sqrt(3) sigma))).

    Accepts a scalar or an array of finite abscissae.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"x must be finite, got {x!r}")
    return _as_output(expit((arr - v.e) / (v.sigma * SQRT3_OVER_PI)), arr.ndim == 0)


def _check_alpha(alpha):
    arr = np.asarray(alpha, dtype=float)
    if not np.all((arr > 0) & (arr < 1)):
        raise DomainError(f"alpha must lie in the open interval (0, 1), got {alpha!r}")
    return arr


def inv_std_normal(alpha):
    """Inverse standard normal uncertainty distribution, (sqrt(3)/pi) ln(alpha/(1-alpha))."""
    arr = _check_alpha(alpha)
    return _as_output(SQRT3_OVER_PI * logit(arr), arr.ndim == 0)


def inv_normal(v: NormalUncertainVariable, alpha):
    arr = _check_alpha(alpha)
    return _as_output(v.e + v.sigma * SQRT3_OVER_PI * logit(arr), arr.ndim == 0)


def log_logistic_weight(u):
    """log(expit(u) * expit(-u)), computed without overflow."""
    a = np.abs(np.asarray(u, dtype=float))
    return -a - 2.0 * np.log1p(np.exp(-a))


def logistic_weight(u):
    """Jacobian d alpha / d u of the logistic substitution."""
    return np.exp(log_logistic_weight(u))


class _Budget:
    def __init__(self, max_nodes):
        self.max_nodes = max_nodes
        self.used = 0

    def spend(self, n):
        self.used += n
        if self.used > self.max_nodes:
            raise IntegrationError(
                f"quadrature exceeded {self.max_nodes} nodes without converging; "
                "the integral is likely divergent"
            )


_LEGGAUSS_CACHE: dict = {}


def _leggauss(order):
    if order not in _LEGGAUSS_CACHE:
        _LEGGAUSS_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _LEGGAUSS_CACHE[order]


def _panel_sums(f, a, b, order, budget):
    """Gauss-Legendre estimates on each panel [a_i, b_i]; returns (sum, sum of |f|)."""
    x, w = _leggauss(order)
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    budget.spend(nodes.size)
    with np.errstate(all="ignore"):
        vals = _call_vectorized(f, nodes)
    if not np.all(np.isfinite(vals)):
        bad = nodes[~np.isfinite(vals)][0]
        raise IntegrationError(f"integrand is not finite at {bad!r}")
    return half * (vals @ w), half * (np.abs(vals) @ w)


def _adaptive(f, a, b, rule, budget, scale=0.0):
    """Adaptive Gauss-Legendre on the finite interval [a, b].

    The interval starts as panels of width at most ``rule.panel_width`` (scaled
    for long intervals) and panels are bisected breadth-first until the
    two-level estimates agree.  Returns (integral, integral of |f|).
    """
    span = b - a
    if span <= 0:
        return 0.0, 0.0
    n0 = max(1, min(64, math.ceil(span / rule.panel_width)))
    edges = np.linspace(a, b, n0 + 1)
    lo, hi = edges[:-1], edges[1:]
    coarse, _ = _panel_sums(f, lo, hi, rule.order, budget)
    accepted, accepted_abs = [], []
    estimate = scale + float(np.sum(coarse))
    while lo.size:
        mid = 0.5 * (lo + hi)
        left, left_abs = _panel_sums(f, lo, mid, rule.order, budget)
        right, right_abs = _panel_sums(f, mid, hi, rule.order, budget)
        fine = left + right
        tol = rule.tolerance(estimate) * (hi - lo) / span
        roundoff = 64 * np.finfo(float).eps * (left_abs + right_abs)
        tiny = (hi - lo) <= 1e-13 * np.maximum(1.0, np.abs(lo))
        done = (np.abs(fine - coarse) <= np.maximum(tol, roundoff)) | tiny
        accepted.extend(fine[done].tolist())
        accepted_abs.extend((left_abs + right_abs)[done].tolist())
        keep = ~done
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
        estimate = scale + math.fsum(accepted) + float(np.sum(coarse))
    return math.fsum(accepted), math.fsum(accepted_abs)


def _tail(f, start, direction, rule, budget, total, width, stop=math.inf):
    """Integrate from ``start`` towards ``stop`` (default: infinity) in ``direction``.

    Windows double in length until one contributes less than the tolerance
    or the stop bound is reached.
    """
    pieces = []
    pos = start
    remaining = abs(stop - start)
    while remaining > 0:
        step = min(width, remaining)
        nxt = pos + direction * step
        a, b = (pos, nxt) if direction > 0 else (nxt, pos)
        value, mass = _adaptive(f, a, b, rule, budget, scale=total + math.fsum(pieces))
        pieces.append(value)
        if mass <= rule.tolerance(total + math.fsum(pieces)):
            break
        pos = nxt
        remaining -= step
        width *= 2.0
    return math.fsum(pieces)


def integrate_logit(f, lo=-math.inf, hi=math.inf, rule: QuadratureRule = DEFAULT_RULE, weighted=True):
    """Integrate ``f(u) * w(u)`` over ``[lo, hi]`` in logit space.

    ``w`` is the logistic Jacobian; pass ``weighted=False`` if ``f`` already
    includes it (e.g. when the caller combines exponents in log space to
    avoid overflow).  Either bound may be infinite.  Equals
    ``int_{expit(lo)}^{expit(hi)} q(alpha) d alpha`` when ``f = q o expit``.
    """
    if math.isnan(lo) or math.isnan(hi):
        raise DomainError("integration bounds must not be NaN")
    if lo >= hi:
        return 0.0
    g = (lambda u: f(u) * logistic_weight(u)) if weighted else f
    budget = _Budget(rule.max_nodes)
    # The logistic weight concentrates the mass around u = 0, so the tail
    # windows grow outward from a core window there, never from a far bound;
    # finite bounds only clip them.
    half = 0.5 * rule.window
    core_lo = min(max(lo, -half), hi)
    core_hi = max(min(hi, half), lo)
    pieces = [_adaptive(g, core_lo, core_hi, rule, budget)[0]]
    for a, b in ((lo, core_lo), (core_hi, hi)):
        if a >= b:
            continue
        total = math.fsum(pieces)
        if b == core_lo:
            pieces.append(_tail(g, b, -1, rule, budget, total, rule.window, stop=a))
        else:
            pieces.append(_tail(g, a, 1, rule, budget, total, rule.window, stop=b))
    return math.fsum(pieces)


def _as_quantile(q) -> QuantileFunction:
    return q if isinstance(q, QuantileFunction) else QuantileFunction(q)


def expected_value_from_quantile(q, rule: QuadratureRule = DEFAULT_RULE) -> float:
    """E[xi] = int_0^1 q(alpha) d alpha for the inverse distribution ``q``.

    ``q`` may be a plain callable of alpha or a :class:`QuantileFunction`.
    Raises :class:`IntegrationError` if the refinement diverges.
    """
    q = _as_quantile(q)
    if rule.method == "composite":
        return _composite_alpha(q, rule)
    if q.logit_eval is not None:
        return integrate_logit(q.at_logit, rule=rule)
    return integrate_logit(q.at_logit, -_ALPHA_SAFE_U, _ALPHA_SAFE_U, rule=rule)


def _composite_alpha(q, rule):
    x, w = _leggauss(rule.order)
    edges = np.linspace(rule.eps, 1.0 - rule.eps, rule.panels + 1)
    half = 0.5 * np.diff(edges)
    nodes = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * x[None, :]
    with np.errstate(all="ignore"):
        vals = _call_vectorized(q.eval, nodes)
    if not np.all(np.isfinite(vals)):
        raise IntegrationError("quantile function is not finite on the composite grid")
    return math.fsum((half * (vals @ w)).tolist())


def expected_value_from_distribution(dist: Callable, rule: QuadratureRule = DEFAULT_RULE, scale: float = 1.0) -> float:
    """E[xi] = int_0^inf (1 - Phi(x)) dx - int_{-inf}^0 Phi(x) dx.

    Both tails are integrated over windows that double from ``scale`` until
    the window contributes less than the tolerance and the tail value at the
    cutoff is below 1e-12.  Raises :class:`IntegrationError` when the node
    budget runs out first.
    """
    if not (math.isfinite(scale) and scale > 0):
        raise DomainError(f"scale must be finite and > 0, got {scale!r}")
    budget = _Budget(rule.max_nodes)
    upper = lambda x: 1.0 - _call_vectorized(dist, x)
    lower = lambda x: _call_vectorized(dist, x)
    return _thm1_side(upper, 1, rule, budget, scale) - _thm1_side(lower, -1, rule, budget, scale)


def _thm1_side(f, direction, rule, budget, width):
    pieces = []
    pos = 0.0
    while True:
        nxt = pos + direction * width
        a, b = (pos, nxt) if direction > 0 else (nxt, pos)
        value, mass = _adaptive(f, a, b, rule, budget, scale=math.fsum(pieces))
        pieces.append(value)
        edge = float(f(np.array([nxt]))[0])
        if not math.isfinite(edge):
            raise IntegrationError(f"distribution is not finite at {nxt!r}")
        if abs(edge) < _TAIL_CUTOFF and mass <= rule.tolerance(math.fsum(pieces)):
            return math.fsum(pieces)
        pos = nxt
        width *= 2.0
