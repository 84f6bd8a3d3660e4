"""
Fractional operators evaluated numerically.

Every integral is reduced to a fixed Jacobi-weighted integral on [0, 1]:
for the generalized integral the substitution s = tau^rho,
s = A + (X - A) u with X = x^rho, A = a^rho gives

    (I^alpha f)(x) = ((X - A) / rho)^alpha / Gamma(alpha)
                     * int_0^1 (1 - u)^(alpha - 1) f((A + (X - A) u)^(1/rho)) du

and the right-sided integral mirrors it around b. Differences of powers are
evaluated as a^rho * expm1(rho * log(x / a)) so the operators stay accurate
as rho -> 0+, where they approach the Hadamard operators.

Derivatives apply (x^(1-rho) d/dx)^n (or its log / plain analogues) to the
integral of order n - alpha by finite differences in the chart variable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import default_diff_config, default_quadrature_config, get_settings
from errors import OperatorDomainError, UnsupportedFunctionError
from models import DiffConfig, EKParams, EvalResult, OperatorParams, QuadratureConfig, Side
from services.expr import FunctionSpec
from services.quad import adaptive_integral, integrate_weighted, nth_delta_derivative, nth_derivative, nth_log_derivative
from services.specfun import gamma

logger = logging.getLogger(__name__)

# Anything vectorized over numpy arrays: FunctionSpec, OperatorImage, lambdas
RealFunction = Callable[[np.ndarray], np.ndarray]

# Substitution for one batch of evaluation points: per-point scale and the node map u -> tau
_Substitution = Tuple[np.ndarray, Callable[[np.ndarray], np.ndarray]]


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------

def _as_side(side: Union[Side, str]) -> Side:
    try:
        return Side(side)
    except ValueError as e:
        raise OperatorDomainError(f"unknown side {side!r}; expected 'left' or 'right'") from e


def _check_order(alpha: float) -> None:
    cap = get_settings().max_order
    if alpha > cap:
        raise OperatorDomainError(f"order alpha={alpha} exceeds the supported maximum {cap}")


def _check_point(side: Side, a: float, b: float, x: float) -> None:
    if side is Side.LEFT:
        if not (a < x <= b):
            raise OperatorDomainError(f"left-sided operator needs a < x <= b, got a={a}, x={x}, b={b}")
    elif not (a <= x < b):
        raise OperatorDomainError(f"right-sided operator needs a <= x < b, got a={a}, x={x}, b={b}")


def _check_function_domain(f: RealFunction, lo: float, hi: float) -> None:
    domain_lo = getattr(f, "domain_lo", -math.inf)
    domain_hi = getattr(f, "domain_hi", math.inf)
    if lo < domain_lo or hi > domain_hi:
        raise OperatorDomainError(
            f"integration range [{lo}, {hi}] leaves the function domain [{domain_lo}, {domain_hi}]"
        )


def _points(side: Side, a: float, b: float, xs: Sequence[float]) -> np.ndarray:
    arr = np.asarray(xs, dtype=float).ravel()
    for x in arr:
        _check_point(side, a, b, float(x))
    return arr


def _finish(values: np.ndarray, errors: np.ndarray, levels: int) -> List[EvalResult]:
    return [
        EvalResult(value=float(v), error_estimate=float(e), levels_used=levels)
        for v, e in zip(values, errors)
    ]


# ---------------------------------------------------------------------------
# Substitutions
# ---------------------------------------------------------------------------

def _generalized_substitution(side: Side, rho: float, a: float, b: float, xs: np.ndarray) -> _Substitution:
    """(X - A)/rho (left) or (B - X)/rho (right) and the map u -> tau."""
    inv_rho = 1.0 / rho
    if side is Side.LEFT:
        if a == 0.0:
            scale = xs ** rho / rho
            return scale, lambda u: xs[:, None] * u[None, :] ** inv_rho
        # (X - A) / A
        ratio = np.expm1(rho * np.log(xs / a))
        scale = a ** rho * ratio / rho
        return scale, lambda u: a * np.exp(np.log1p(ratio[:, None] * u[None, :]) * inv_rho)

    with np.errstate(divide="ignore"):
        ratio = np.where(xs > 0.0, -np.expm1(rho * np.log(xs / b)), 1.0)
    scale = b ** rho * ratio / rho
    return scale, lambda u: b * np.exp(np.log1p(-ratio[:, None] * u[None, :]) * inv_rho)


def _hadamard_substitution(side: Side, a: float, b: float, xs: np.ndarray) -> _Substitution:
    if side is Side.LEFT:
        span = np.log(xs / a)
        return span, lambda u: a * np.exp(span[:, None] * u[None, :])
    span = np.log(b / xs)
    return span, lambda u: b * np.exp(-span[:, None] * u[None, :])


def _rl_substitution(side: Side, a: float, b: float, xs: np.ndarray) -> _Substitution:
    if side is Side.LEFT:
        span = xs - a
        return span, lambda u: a + span[:, None] * u[None, :]
    span = b - xs
    return span, lambda u: b - span[:, None] * u[None, :]


def _weighted(
    f: RealFunction,
    substitution: _Substitution,
    alpha: float,
    cfg: QuadratureConfig,
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """span^alpha / Gamma(alpha) * int (1 - u)^(alpha - 1) [weight(u)] f(tau(u)) du per point."""
    span, tau = substitution

    def h(u: np.ndarray) -> np.ndarray:
        values = np.asarray(f(tau(u)), dtype=float)
        if weight is not None:
            values = values * weight(u)
        return values

    integral, err, levels = integrate_weighted(h, alpha, cfg)
    factor = span ** alpha / gamma(alpha)
    return factor * integral, factor * err, levels


# ---------------------------------------------------------------------------
# Generalized operators
# ---------------------------------------------------------------------------

def _gfi_batch(
    params: OperatorParams,
    f: RealFunction,
    xs: np.ndarray,
    cfg: QuadratureConfig,
    alpha: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray, int]:
    order = params.alpha if alpha is None else alpha
    side = params.side

    if order == 0.0:
        return np.asarray(f(xs), dtype=float), np.zeros_like(xs), 0

    if side is Side.LEFT:
        _check_function_domain(f, params.a, float(np.max(xs)))
    else:
        _check_function_domain(f, float(np.min(xs)), params.b)

    power = f.power_form() if isinstance(f, FunctionSpec) else None
    if side is Side.LEFT and params.a == 0.0 and power is not None and power[1] / params.rho > -1.0:
        # f = c x^nu: f(x u^(1/rho)) = c x^nu u^(nu/rho); the power joins the weight
        c, nu = power
        integral, err, levels = integrate_weighted(lambda u: 1.0, order, cfg, beta=nu / params.rho)
        factor = (xs ** params.rho / params.rho) ** order / gamma(order) * c * xs ** nu
        return factor * integral[0], np.abs(factor) * err[0], levels

    substitution = _generalized_substitution(side, params.rho, params.a, params.b, xs)
    return _weighted(f, substitution, order, cfg)


def gfi(
    params: OperatorParams,
    f: RealFunction,
    x: float,
    cfg: Optional[QuadratureConfig] = None,
) -> EvalResult:
    """
    Generalized fractional integral of order params.alpha at x.

    Left: rho^(1-alpha)/Gamma(alpha) int_a^x tau^(rho-1) f(tau) (x^rho - tau^rho)^(alpha-1) dtau
    Right: the same over [x, b] with (tau^rho - x^rho)^(alpha-1).

    Raises:
        OperatorDomainError: x outside (a, b] (left) or [a, b) (right)
        NoConvergenceError: Quadrature tolerance not met
    """
    return gfi_many(params, f, [x], cfg)[0]


def gfi_many(
    params: OperatorParams,
    f: RealFunction,
    xs: Sequence[float],
    cfg: Optional[QuadratureConfig] = None,
) -> List[EvalResult]:
    """gfi at several points sharing one batched quadrature."""
    cfg = cfg or default_quadrature_config()
    _check_order(params.alpha)
    points = _points(params.side, params.a, params.b, xs)
    values, errors, levels = _gfi_batch(params, f, points, cfg)
    logger.debug(f"gfi alpha={params.alpha} rho={params.rho} side={params.side.value}: {len(points)} points, {levels} levels")
    return _finish(values, errors, levels)


@dataclass(frozen=True)
class OperatorImage:
    """
    The function t -> (I^alpha f)(t) of the generalized integral.

    Callable on floats and numpy arrays, so an image can be fed back into any
    operator (compositions such as D^alpha I^beta f).
    """

    params: OperatorParams
    f: RealFunction
    cfg: Optional[QuadratureConfig] = None

    @property
    def domain_lo(self) -> float:
        return self.params.a

    @property
    def domain_hi(self) -> float:
        return self.params.b

    def __call__(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        arr = np.asarray(t, dtype=float)
        flat = arr.ravel()
        values, _, _ = _gfi_batch(self.params, self.f, flat, self.cfg or default_quadrature_config())
        if arr.ndim == 0:
            return float(values[0])
        return values.reshape(arr.shape)


def gfi_image(params: OperatorParams, f: RealFunction, cfg: Optional[QuadratureConfig] = None) -> OperatorImage:
    _check_order(params.alpha)
    return OperatorImage(params=params, f=f, cfg=cfg)


def _inner_order(alpha: float) -> Tuple[int, float]:
    n = math.ceil(alpha)
    return n, n - alpha


def gfd(
    params: OperatorParams,
    f: RealFunction,
    x: float,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> EvalResult:
    """
    Generalized fractional derivative (+-x^(1-rho) d/dx)^n I^(n-alpha) f at x.

    For integer alpha the inner integral has order 0 and is the identity.

    Raises:
        OperatorDomainError: x outside the side-appropriate interval
        DomainClippedError: The difference stencil cannot fit inside (a, b)
        NoConvergenceError: Inner quadrature tolerance not met
    """
    qcfg = qcfg or default_quadrature_config()
    side = params.side
    _check_order(params.alpha)
    _check_point(side, params.a, params.b, x)
    if not x > 0.0:
        raise OperatorDomainError(f"generalized derivative needs x > 0, got x={x}")
    n, mu = _inner_order(params.alpha)

    def inner(t: float) -> EvalResult:
        values, errors, levels = _gfi_batch(params, f, np.array([t]), qcfg, alpha=mu)
        return EvalResult(value=float(values[0]), error_estimate=float(errors[0]), levels_used=levels)

    result = nth_delta_derivative(inner, params.rho, n, x, dcfg, x_lo=params.a, x_hi=params.b)
    return _signed(result, side, n)


def _signed(result: EvalResult, side: Side, n: int) -> EvalResult:
    if side is Side.RIGHT and n % 2 == 1:
        return result.model_copy(update={"value": -result.value})
    return result


# ---------------------------------------------------------------------------
# Riemann-Liouville operators (independent code path, rho = 1)
# ---------------------------------------------------------------------------

def _rl_batch(
    alpha: float, a: float, b: float, side: Side, f: RealFunction, xs: np.ndarray, cfg: QuadratureConfig
) -> Tuple[np.ndarray, np.ndarray, int]:
    if alpha == 0.0:
        return np.asarray(f(xs), dtype=float), np.zeros_like(xs), 0
    if side is Side.LEFT:
        _check_function_domain(f, a, float(np.max(xs)))
    else:
        _check_function_domain(f, float(np.min(xs)), b)
    return _weighted(f, _rl_substitution(side, a, b, xs), alpha, cfg)


def rl_integral(
    alpha: float,
    a: float,
    b: float,
    side: Union[Side, str],
    f: RealFunction,
    x: float,
    cfg: Optional[QuadratureConfig] = None,
) -> EvalResult:
    """Riemann-Liouville integral 1/Gamma(alpha) int (x - tau)^(alpha-1) f(tau) dtau (left) at x."""
    params = OperatorParams(alpha=alpha, rho=1.0, a=a, b=b, side=_as_side(side))
    cfg = cfg or default_quadrature_config()
    _check_order(alpha)
    _check_point(params.side, a, b, x)
    values, errors, levels = _rl_batch(alpha, a, b, params.side, f, np.array([x]), cfg)
    return _finish(values, errors, levels)[0]


def rl_derivative(
    alpha: float,
    a: float,
    b: float,
    side: Union[Side, str],
    f: RealFunction,
    x: float,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> EvalResult:
    """Riemann-Liouville derivative (+-d/dx)^n I^(n-alpha) f at x."""
    params = OperatorParams(alpha=alpha, rho=1.0, a=a, b=b, side=_as_side(side))
    qcfg = qcfg or default_quadrature_config()
    _check_order(alpha)
    _check_point(params.side, a, b, x)
    n, mu = _inner_order(alpha)

    def inner(t: float) -> EvalResult:
        values, errors, levels = _rl_batch(mu, a, b, params.side, f, np.array([t]), qcfg)
        return EvalResult(value=float(values[0]), error_estimate=float(errors[0]), levels_used=levels)

    result = nth_derivative(inner, n, x, dcfg, x_lo=a, x_hi=b)
    return _signed(result, params.side, n)


# ---------------------------------------------------------------------------
# Hadamard operators
# ---------------------------------------------------------------------------

def _hadamard_params(alpha: float, a: float, b: float, side: Union[Side, str]) -> OperatorParams:
    if not a > 0.0:
        raise OperatorDomainError(f"Hadamard operators need a > 0 (log kernel), got a={a}")
    return OperatorParams(alpha=alpha, rho=1.0, a=a, b=b, side=_as_side(side))


def _hadamard_batch(
    alpha: float, a: float, b: float, side: Side, f: RealFunction, xs: np.ndarray, cfg: QuadratureConfig
) -> Tuple[np.ndarray, np.ndarray, int]:
    if alpha == 0.0:
        return np.asarray(f(xs), dtype=float), np.zeros_like(xs), 0
    if side is Side.LEFT:
        _check_function_domain(f, a, float(np.max(xs)))
    else:
        _check_function_domain(f, float(np.min(xs)), b)
    return _weighted(f, _hadamard_substitution(side, a, b, xs), alpha, cfg)


def hadamard_integral(
    alpha: float,
    a: float,
    b: float,
    side: Union[Side, str],
    f: RealFunction,
    x: float,
    cfg: Optional[QuadratureConfig] = None,
) -> EvalResult:
    """
    Hadamard integral 1/Gamma(alpha) int_a^x (log(x/tau))^(alpha-1) f(tau) dtau/tau.

    Evaluated with tau = a (x/a)^u (left) or tau = b (x/b)^u (right).
    """
    params = _hadamard_params(alpha, a, b, side)
    cfg = cfg or default_quadrature_config()
    _check_order(alpha)
    _check_point(params.side, a, b, x)
    values, errors, levels = _hadamard_batch(alpha, a, b, params.side, f, np.array([x]), cfg)
    return _finish(values, errors, levels)[0]


def hadamard_derivative(
    alpha: float,
    a: float,
    b: float,
    side: Union[Side, str],
    f: RealFunction,
    x: float,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> EvalResult:
    """
    Hadamard derivative (+-x d/dx)^n of the Hadamard integral of order n - alpha.

    The inner kernel is (log(x/tau))^(n-alpha-1), the rho -> 0+ limit of the
    generalized derivative.
    """
    params = _hadamard_params(alpha, a, b, side)
    qcfg = qcfg or default_quadrature_config()
    _check_order(alpha)
    _check_point(params.side, a, b, x)
    n, mu = _inner_order(alpha)

    def inner(t: float) -> EvalResult:
        values, errors, levels = _hadamard_batch(mu, a, b, params.side, f, np.array([t]), qcfg)
        return EvalResult(value=float(values[0]), error_estimate=float(errors[0]), levels_used=levels)

    result = nth_log_derivative(inner, n, x, dcfg, x_lo=a, x_hi=b)
    return _signed(result, params.side, n)


# ---------------------------------------------------------------------------
# Erdelyi-Kober operators (left-sided)
# ---------------------------------------------------------------------------

def _check_ek(ek: EKParams) -> None:
    if ek.base.side is not Side.LEFT:
        raise OperatorDomainError("Erdelyi-Kober operators are implemented for the left side only")


def _ek_batch(
    rho: float, eta: float, a: float, alpha: float, f: RealFunction, xs: np.ndarray, cfg: QuadratureConfig
) -> Tuple[np.ndarray, np.ndarray, int]:
    if alpha == 0.0:
        return np.asarray(f(xs), dtype=float), np.zeros_like(xs), 0
    _check_function_domain(f, a, float(np.max(xs)))
    inv_rho = 1.0 / rho

    if a == 0.0:
        # s = X u: x^(-rho(alpha+eta)) X^(alpha+eta) = 1, the s^eta factor becomes u^eta
        if not eta > -1.0:
            raise OperatorDomainError(f"Erdelyi-Kober integral with a = 0 needs eta > -1, got {eta}")
        power = f.power_form() if isinstance(f, FunctionSpec) else None
        if power is not None and eta + power[1] / rho > -1.0:
            c, nu = power
            integral, err, levels = integrate_weighted(lambda u: 1.0, alpha, cfg, beta=eta + nu / rho)
            factor = c * xs ** nu / gamma(alpha)
            return factor * integral[0], np.abs(factor) * err[0], levels

        def h(u: np.ndarray) -> np.ndarray:
            return np.asarray(f(xs[:, None] * u[None, :] ** inv_rho), dtype=float)

        integral, err, levels = integrate_weighted(h, alpha, cfg, beta=eta)
        return integral / gamma(alpha), err / gamma(alpha), levels

    log_ratio = np.log(xs / a)
    # A / X and (X - A) / X
    base = np.exp(-rho * log_ratio)
    span = -np.expm1(-rho * log_ratio)
    growth = np.expm1(rho * log_ratio)

    def tau(u: np.ndarray) -> np.ndarray:
        return a * np.exp(np.log1p(growth[:, None] * u[None, :]) * inv_rho)

    def weight(u: np.ndarray) -> np.ndarray:
        return (base[:, None] + span[:, None] * u[None, :]) ** eta

    return _weighted(f, (span, tau), alpha, cfg, weight=weight)


def ek_integral(ek: EKParams, f: RealFunction, x: float, cfg: Optional[QuadratureConfig] = None) -> EvalResult:
    """
    Erdelyi-Kober integral
    rho x^(-rho(alpha+eta)) / Gamma(alpha) int_a^x tau^(rho eta + rho - 1) f(tau) (x^rho - tau^rho)^(alpha-1) dtau.
    """
    _check_ek(ek)
    p = ek.base
    cfg = cfg or default_quadrature_config()
    _check_order(p.alpha)
    _check_point(p.side, p.a, p.b, x)
    values, errors, levels = _ek_batch(p.rho, ek.eta, p.a, p.alpha, f, np.array([x]), cfg)
    return _finish(values, errors, levels)[0]


def ek_derivative(
    ek: EKParams,
    f: RealFunction,
    x: float,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> EvalResult:
    """
    Erdelyi-Kober derivative
    x^(-rho eta) (rho^-1 x^(1-rho) d/dx)^n [x^(rho(n+eta)) I^(n-alpha; eta+alpha) f].
    """
    _check_ek(ek)
    p = ek.base
    qcfg = qcfg or default_quadrature_config()
    _check_order(p.alpha)
    _check_point(p.side, p.a, p.b, x)
    n, mu = _inner_order(p.alpha)
    lift = p.rho * (n + ek.eta)

    def inner(t: float) -> EvalResult:
        values, errors, levels = _ek_batch(p.rho, ek.eta + p.alpha, p.a, mu, f, np.array([t]), qcfg)
        weight = t ** lift
        return EvalResult(value=weight * float(values[0]), error_estimate=weight * float(errors[0]), levels_used=levels)

    result = nth_delta_derivative(inner, p.rho, n, x, dcfg, x_lo=p.a, x_hi=p.b)
    scale = x ** (-p.rho * ek.eta) / p.rho ** n
    return EvalResult(
        value=scale * result.value,
        error_estimate=abs(scale) * result.error_estimate,
        levels_used=result.levels_used,
    )


# ---------------------------------------------------------------------------
# Caputo-type derivative
# ---------------------------------------------------------------------------

def caputo_gfd(
    params: OperatorParams,
    f: RealFunction,
    x: float,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> EvalResult:
    """
    Caputo generalized derivative: gfd of f minus its Taylor polynomial of
    degree n - 1 at a (left) or b (right).

    Raises:
        UnsupportedFunctionError: f has no symbolic form to differentiate
    """
    if not isinstance(f, FunctionSpec):
        raise UnsupportedFunctionError(
            f"Caputo derivative needs a symbolic function, got {type(f).__name__}"
        )
    _check_order(params.alpha)
    _check_point(params.side, params.a, params.b, x)
    n = params.n
    center = params.a if params.side is Side.LEFT else params.b
    residual = f.taylor_residual(center, n)
    return gfd(params, residual, x, qcfg, dcfg)


# ---------------------------------------------------------------------------
# Iterated integral oracle
# ---------------------------------------------------------------------------

NFOLD_MAX = 3


def nfold_oracle(
    n: int,
    rho: float,
    a: float,
    f: RealFunction,
    x: float,
    cfg: Optional[QuadratureConfig] = None,
    side: Union[Side, str] = Side.LEFT,
    b: Optional[float] = None,
) -> EvalResult:
    """
    n-fold integral int_a^x t1^(rho-1) dt1 int_a^t1 ... t_n^(rho-1) f(t_n) dt_n
    by nested adaptive quadrature (right side: int_x^b ... int_t1^b).

    The error estimate adds the outer QUADPACK estimate and the largest inner
    estimate times the weight mass of the outer range.
    """
    side = _as_side(side)
    if not 1 <= n <= NFOLD_MAX:
        raise OperatorDomainError(f"n-fold oracle supports 1 <= n <= {NFOLD_MAX}, got {n}")
    if not rho > 0.0:
        raise OperatorDomainError(f"rho must be > 0, got {rho}")
    if side is Side.LEFT and not a < x:
        raise OperatorDomainError(f"left n-fold integral needs a < x, got a={a}, x={x}")
    if side is Side.RIGHT and (b is None or not x < b):
        raise OperatorDomainError(f"right n-fold integral needs x < b, got x={x}, b={b}")
    cfg = cfg or default_quadrature_config()

    def weight_mass(lo: float, hi: float) -> float:
        return (hi ** rho - lo ** rho) / rho

    def nested(level: int, t: float) -> EvalResult:
        if level == 0:
            return EvalResult(value=float(f(t)), error_estimate=0.0)
        inner_err = 0.0

        def integrand(s: float) -> float:
            nonlocal inner_err
            r = nested(level - 1, s)
            inner_err = max(inner_err, r.error_estimate)
            return s ** (rho - 1.0) * r.value

        lo, hi = (a, t) if side is Side.LEFT else (t, b)
        outer = adaptive_integral(integrand, lo, hi, cfg)
        return EvalResult(
            value=outer.value,
            error_estimate=outer.error_estimate + inner_err * weight_mass(lo, hi),
            levels_used=outer.levels_used,
        )

    result = nested(n, x)
    logger.debug(f"n-fold oracle n={n} rho={rho} side={side.value} at x={x}: {result.value}")
    return result
