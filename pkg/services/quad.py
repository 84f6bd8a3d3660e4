"""
Numerical engine: weakly singular quadrature and chart-based derivatives.

- jacobi_weighted_integral: int_0^1 u^beta (1 - u)^(mu - 1) h(u) du by a
  composite Gauss-Jacobi rule. The endpoint weights are absorbed into the
  end panels; panels are graded geometrically towards u = 0 so integrands
  that are only Holder continuous there (h(u) = f(u^(1/rho)), images of
  other fractional operators) still converge. Each refinement level adds
  graded panels and nodes; successive levels give the error estimate.
- adaptive_integral: plain adaptive quadrature (QUADPACK via scipy).
- nth_delta_derivative / nth_log_derivative / nth_derivative: central
  differences with Richardson extrapolation in a chart variable y where the
  operator becomes d/dy (x^(1-rho) d/dx = d/dy for y = (x^rho - 1)/rho,
  x d/dx = d/dy for y = log x).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.special import roots_jacobi

from config import default_diff_config, default_quadrature_config
from errors import DomainClippedError, IntegrandError, NoConvergenceError
from models import DiffConfig, EvalResult, QuadratureConfig

logger = logging.getLogger(__name__)

# Smallest finite-difference step (in y) before giving up on fitting the stencil
MIN_STEP = 1e-8

# Ridders: stop when a higher extrapolation order is worse by this factor
_SAFE = 2.0

ScalarOrResult = Union[float, EvalResult]


# ---------------------------------------------------------------------------
# Weighted quadrature
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _jacobi_nodes(n: int, alpha: float, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes/weights on [-1, 1] for (1 - t)^alpha (1 + t)^beta."""
    t, w = roots_jacobi(n, alpha, beta)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=256)
def _weighted_rule(mu: float, beta: float, level: int, base_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite rule for u^beta (1 - u)^(mu - 1) on [0, 1] at a refinement level.

    Panels: [0, 2^-m], [2^-m, 2^-m+1], ..., [1/4, 1/2], [1/2, 1] with
    m = 4 (level + 1); each panel carries base_nodes + 8 level nodes.
    """
    n = base_nodes + 8 * level
    m = 4 * (level + 1)
    breaks = [0.0] + [2.0 ** -k for k in range(m, 0, -1)] + [1.0]

    nodes = []
    weights = []
    for index, (lo, hi) in enumerate(zip(breaks[:-1], breaks[1:])):
        half = (hi - lo) / 2.0
        if index == 0:
            # u^beta absorbed into the rule
            t, w = _jacobi_nodes(n, 0.0, beta)
            u = lo + half * (1.0 + t)
            wu = w * half ** (beta + 1.0) * (1.0 - u) ** (mu - 1.0)
        elif hi == 1.0:
            # (1 - u)^(mu - 1) absorbed into the rule
            t, w = _jacobi_nodes(n, mu - 1.0, 0.0)
            u = lo + half * (1.0 + t)
            wu = w * half ** mu * u ** beta
        else:
            t, w = _jacobi_nodes(n, 0.0, 0.0)
            u = lo + half * (1.0 + t)
            wu = w * half * u ** beta * (1.0 - u) ** (mu - 1.0)
        nodes.append(u)
        weights.append(wu)

    u_all = np.concatenate(nodes)
    w_all = np.concatenate(weights)
    u_all.setflags(write=False)
    w_all.setflags(write=False)
    return u_all, w_all


def integrate_weighted(
    h: Callable[[np.ndarray], np.ndarray],
    mu: float,
    cfg: QuadratureConfig,
    beta: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Batched core of jacobi_weighted_integral.

    h maps the node vector (N,) to (N,) or to a batch (k, N); the result
    holds one value and one error estimate per batch row.

    Raises:
        IntegrandError: h is not finite at some node
        NoConvergenceError: tolerance not met after cfg.max_levels refinements
    """
    if not mu > 0.0:
        raise ValueError(f"Jacobi exponent mu must be > 0, got {mu}")
    if not beta > -1.0:
        raise ValueError(f"left weight exponent beta must be > -1, got {beta}")

    previous: Optional[np.ndarray] = None
    value = err = np.float64(0.0)
    for level in range(cfg.max_levels + 1):
        nodes, weights = _weighted_rule(float(mu), float(beta), level, cfg.base_nodes)
        vals = np.asarray(h(nodes), dtype=float)
        if vals.ndim == 0:
            vals = np.full(nodes.shape, float(vals))
        if not np.all(np.isfinite(vals)):
            raise IntegrandError("integrand is not finite on the integration range")
        value = vals @ weights
        if previous is not None:
            err = np.abs(value - previous)
            tol = np.maximum(cfg.rel_tol * np.abs(value), cfg.abs_tol)
            if np.all(err <= tol):
                logger.debug(f"weighted quadrature converged: mu={mu}, beta={beta}, levels={level}")
                return np.atleast_1d(value), np.atleast_1d(err), level
        previous = value

    worst = int(np.argmax(np.atleast_1d(err)))
    best = EvalResult(
        value=float(np.atleast_1d(value)[worst]),
        error_estimate=float(np.atleast_1d(err)[worst]),
        levels_used=cfg.max_levels,
    )
    raise NoConvergenceError(best)


def jacobi_weighted_integral(
    h: Callable[[np.ndarray], np.ndarray],
    mu: float,
    cfg: Optional[QuadratureConfig] = None,
    beta: float = 0.0,
) -> EvalResult:
    """
    Integrate int_0^1 u^beta (1 - u)^(mu - 1) h(u) du.

    Args:
        h: Function finite on [0, 1), vectorized over numpy arrays
        mu: Exponent of the singular weight at u = 1 (> 0)
        cfg: Tolerances and refinement budget (defaults from settings)
        beta: Exponent of the weight at u = 0 (> -1)

    Returns:
        EvalResult: Value, difference of the last two levels, levels used
    """
    cfg = cfg or default_quadrature_config()
    value, err, levels = integrate_weighted(h, mu, cfg, beta)
    return EvalResult(value=float(value[0]), error_estimate=float(err[0]), levels_used=levels)


def adaptive_integral(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    cfg: Optional[QuadratureConfig] = None,
) -> EvalResult:
    """
    Adaptive Gauss-Kronrod quadrature of f over [lo, hi] (QUADPACK qags).

    levels_used reports the number of subintervals QUADPACK created.

    Raises:
        NoConvergenceError: QUADPACK reported a failure; best estimate attached
    """
    cfg = cfg or default_quadrature_config()
    if not lo < hi:
        raise ValueError(f"adaptive_integral requires lo < hi, got ({lo}, {hi})")

    limit = cfg.max_levels * cfg.base_nodes
    out = integrate.quad(
        lambda t: float(f(t)),
        lo,
        hi,
        epsabs=cfg.abs_tol,
        epsrel=cfg.rel_tol,
        limit=limit,
        full_output=1,
    )
    value, abserr, info = out[0], out[1], out[2]
    result = EvalResult(value=float(value), error_estimate=float(abs(abserr)), levels_used=int(info.get("last", 0)))
    if len(out) > 3:
        # QUADPACK failure; out[3] holds its message
        raise NoConvergenceError(result, f"adaptive quadrature failed: {out[3]}")
    if not math.isfinite(result.value):
        raise IntegrandError("adaptive quadrature produced a non-finite value")
    return result


# ---------------------------------------------------------------------------
# Derivatives in a chart variable
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Chart:
    """Monotone change of variables y = forward(x), x = inverse(y)."""

    forward: Callable[[float], float]
    inverse: Callable[[float], float]


IDENTITY_CHART = Chart(forward=lambda x: x, inverse=lambda y: y)

LOG_CHART = Chart(
    forward=lambda x: math.log(x) if x > 0.0 else -math.inf,
    inverse=math.exp,
)


def delta_chart(rho: float) -> Chart:
    """
    Chart in which x^(1-rho) d/dx is d/dy: y = (x^rho - 1)/rho.

    The shift by 1/rho keeps y well conditioned as rho -> 0+ (y -> log x);
    rho = 1 is the identity so delta derivatives share the plain stencil.
    """
    if rho == 1.0:
        return IDENTITY_CHART

    def forward(x: float) -> float:
        if x <= 0.0:
            return -1.0 / rho
        return math.expm1(rho * math.log(x)) / rho

    def inverse(y: float) -> float:
        return math.exp(math.log1p(rho * y) / rho)

    return Chart(forward=forward, inverse=inverse)


def _unpack(r: ScalarOrResult) -> Tuple[float, float]:
    if isinstance(r, EvalResult):
        return r.value, r.error_estimate
    return float(r), 0.0


def _richardson_nth(
    G: Callable[[float], ScalarOrResult],
    y0: float,
    n: int,
    cfg: DiffConfig,
    y_lo: float,
    y_hi: float,
) -> EvalResult:
    """
    n-th derivative of G at y0: central differences with Ridders' polynomial
    extrapolation (step halved per row, h^2 error expansion).
    """
    step = cfg.initial_step
    while y0 - 0.5 * n * step <= y_lo or y0 + 0.5 * n * step >= y_hi:
        step /= 2.0
        if step < MIN_STEP:
            raise DomainClippedError(y0, step)
    if step != cfg.initial_step:
        logger.debug(f"difference step shrunk to {step:.3g} to fit ({y_lo}, {y_hi}) around y={y0}")

    coefficients = [(-1) ** k * math.comb(n, k) for k in range(n + 1)]
    propagated = 0.0

    def central(h: float) -> float:
        nonlocal propagated
        total = 0.0
        inner = 0.0
        for k, c in enumerate(coefficients):
            val, e = _unpack(G(y0 + (0.5 * n - k) * h))
            total += c * val
            inner += abs(c) * e
        propagated = max(propagated, inner / h ** n)
        return total / h ** n

    previous_row = [central(step)]
    best = previous_row[0]
    err = math.inf
    rows = 1
    for i in range(1, cfg.richardson_levels):
        h = step / 2.0 ** i
        row = [central(h)]
        fac = 4.0
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - previous_row[j - 1]) / (fac - 1.0))
            fac *= 4.0
            errt = max(abs(row[j] - row[j - 1]), abs(row[j] - previous_row[j - 1]))
            if errt <= err:
                err = errt
                best = row[j]
        rows += 1
        if abs(row[i] - previous_row[i - 1]) >= _SAFE * err:
            break
        previous_row = row

    if not math.isfinite(best):
        raise IntegrandError("finite difference produced a non-finite value")
    return EvalResult(value=best, error_estimate=err + propagated, levels_used=rows)


def nth_chart_derivative(
    g: Callable[[float], ScalarOrResult],
    chart: Chart,
    n: int,
    x: float,
    cfg: Optional[DiffConfig] = None,
    x_lo: float = -math.inf,
    x_hi: float = math.inf,
) -> EvalResult:
    """d^n/dy^n of y -> g(chart.inverse(y)) at y = chart.forward(x), stencil kept inside (x_lo, x_hi)."""
    cfg = cfg or default_diff_config()
    if n < 1:
        raise ValueError(f"derivative order must be >= 1, got {n}")
    y0 = chart.forward(x)
    y_lo = chart.forward(x_lo) if math.isfinite(x_lo) else -math.inf
    y_hi = chart.forward(x_hi) if math.isfinite(x_hi) else math.inf
    return _richardson_nth(lambda y: g(chart.inverse(y)), y0, n, cfg, y_lo, y_hi)


def nth_delta_derivative(
    g: Callable[[float], ScalarOrResult],
    rho: float,
    n: int,
    x: float,
    cfg: Optional[DiffConfig] = None,
    x_lo: float = 0.0,
    x_hi: float = math.inf,
) -> EvalResult:
    """
    (x^(1-rho) d/dx)^n g at x > 0, computed as d^n/dy^n in the delta chart.

    Raises:
        DomainClippedError: The stencil cannot be fitted inside (x_lo, x_hi)
            with a step of at least MIN_STEP
    """
    if not (x > 0.0 and rho > 0.0):
        raise ValueError(f"delta derivative requires x > 0 and rho > 0, got x={x}, rho={rho}")
    return nth_chart_derivative(g, delta_chart(rho), n, x, cfg, max(x_lo, 0.0), x_hi)


def nth_log_derivative(
    g: Callable[[float], ScalarOrResult],
    n: int,
    x: float,
    cfg: Optional[DiffConfig] = None,
    x_lo: float = 0.0,
    x_hi: float = math.inf,
) -> EvalResult:
    """(x d/dx)^n g at x > 0, computed as d^n/dy^n with y = log x."""
    if not x > 0.0:
        raise ValueError(f"log derivative requires x > 0, got {x}")
    return nth_chart_derivative(g, LOG_CHART, n, x, cfg, max(x_lo, 0.0), x_hi)


def nth_derivative(
    g: Callable[[float], ScalarOrResult],
    n: int,
    x: float,
    cfg: Optional[DiffConfig] = None,
    x_lo: float = -math.inf,
    x_hi: float = math.inf,
) -> EvalResult:
    """Plain (d/dx)^n g at x."""
    return nth_chart_derivative(g, IDENTITY_CHART, n, x, cfg, x_lo, x_hi)
