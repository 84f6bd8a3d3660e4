"""
Power rules: closed-form images of x^nu (base point a = 0).

    I^alpha_rho x^nu = rho^-alpha Gamma(1 + nu/rho) / Gamma(1 + nu/rho + alpha) x^(nu + alpha rho)
    D^alpha_rho x^nu = rho^alpha  Gamma(1 + nu/rho) / Gamma(1 + nu/rho - alpha) x^(nu - alpha rho)

The derivative prefactor is rho^alpha: it is the value the numeric
quadrature + finite-difference pipeline reproduces, and the only one for
which D^alpha I^alpha x^nu = x^nu. When the lower Gamma argument is a pole
the coefficient is 0 (reciprocal-Gamma continuation).
"""

from __future__ import annotations

import math

from errors import OperatorDomainError
from models import PowerTerm
from services.specfun import gamma, log_gamma, reciprocal_gamma


def _gamma_ratio(p: float, q: float) -> float:
    """Gamma(p) / Gamma(q) for p > 0, continued by 0 at the poles of Gamma(q)."""
    if q > 0.0:
        return math.exp(log_gamma(p) - log_gamma(q))
    return gamma(p) * reciprocal_gamma(q)


def _check_beta_domain(shifted: float, what: str) -> None:
    if not shifted > 0.0:
        raise OperatorDomainError(f"{what}: power rule needs 1 + nu/rho > 0, got {shifted}")


def gfi_power(alpha: float, rho: float, nu: float) -> PowerTerm:
    """Generalized integral of x^nu."""
    p = 1.0 + nu / rho
    _check_beta_domain(p, "gfi_power")
    coefficient = rho ** -alpha * _gamma_ratio(p, p + alpha)
    return PowerTerm(coefficient=coefficient, exponent=nu + alpha * rho)


def gfd_power(alpha: float, rho: float, nu: float) -> PowerTerm:
    """Generalized derivative of x^nu."""
    p = 1.0 + nu / rho
    _check_beta_domain(p, "gfd_power")
    coefficient = rho ** alpha * _gamma_ratio(p, p - alpha)
    return PowerTerm(coefficient=coefficient, exponent=nu - alpha * rho)


def rl_int_power(alpha: float, nu: float) -> PowerTerm:
    if not nu > -1.0:
        raise OperatorDomainError(f"rl_int_power needs nu > -1, got {nu}")
    return gfi_power(alpha, 1.0, nu)


def rl_der_power(alpha: float, nu: float) -> PowerTerm:
    """Riemann-Liouville derivative of x^nu: Gamma(1+nu)/Gamma(1+nu-alpha) x^(nu-alpha)."""
    if not nu > -1.0:
        raise OperatorDomainError(f"rl_der_power needs nu > -1, got {nu}")
    return gfd_power(alpha, 1.0, nu)


def ek_integral_power(alpha: float, rho: float, eta: float, nu: float) -> PowerTerm:
    """Erdelyi-Kober integral of x^nu; the exponent is unchanged."""
    p = 1.0 + eta + nu / rho
    if not p > 0.0:
        raise OperatorDomainError(f"ek_integral_power needs 1 + eta + nu/rho > 0, got {p}")
    return PowerTerm(coefficient=_gamma_ratio(p, p + alpha), exponent=nu)


def ek_derivative_power(alpha: float, rho: float, eta: float, nu: float) -> PowerTerm:
    """Erdelyi-Kober derivative of x^nu: Gamma(1+eta+alpha+nu/rho)/Gamma(1+eta+nu/rho) x^nu."""
    p = 1.0 + eta + alpha + nu / rho
    if not p > 0.0:
        raise OperatorDomainError(f"ek_derivative_power needs 1 + eta + alpha + nu/rho > 0, got {p}")
    return PowerTerm(coefficient=_gamma_ratio(p, p - alpha), exponent=nu)


def apply_gfi(term: PowerTerm, alpha: float, rho: float) -> PowerTerm:
    """gfi applied to c x^nu."""
    image = gfi_power(alpha, rho, term.exponent)
    return PowerTerm(coefficient=term.coefficient * image.coefficient, exponent=image.exponent)


def apply_gfd(term: PowerTerm, alpha: float, rho: float) -> PowerTerm:
    image = gfd_power(alpha, rho, term.exponent)
    return PowerTerm(coefficient=term.coefficient * image.coefficient, exponent=image.exponent)
