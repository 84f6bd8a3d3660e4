import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from errors import OperatorDomainError
from models import PowerTerm
from services.closedform import (
    apply_gfd,
    apply_gfi,
    ek_derivative_power,
    ek_integral_power,
    gfd_power,
    gfi_power,
    rl_der_power,
    rl_int_power,
)


def assert_term(term, coefficient, exponent, rel=1e-9):
    assert term.coefficient == pytest.approx(coefficient, rel=rel)
    assert term.exponent == pytest.approx(exponent, rel=1e-14)


@pytest.mark.parametrize(
    "alpha, rho, nu, coefficient, exponent",
    [(1.0, 1.0, 0.0, 1.0, 1.0), (0.5, 1.0, 1.0, 0.7522527781, 1.5), (0.5, 2.0, 2.0, 0.5319230405, 3.0)],
)
def test_gfi_power_examples(alpha, rho, nu, coefficient, exponent):
    assert_term(gfi_power(alpha, rho, nu), coefficient, exponent)


@pytest.mark.parametrize("nu", [0.5, 1.0, 2.0, 3.5])
def test_gfd_power_first_order_is_ordinary_derivative(nu):
    assert_term(gfd_power(1.0, 1.0, nu), nu, nu - 1.0, rel=1e-13)


@pytest.mark.parametrize(
    "alpha, rho, nu, coefficient, exponent",
    [(0.5, 1.0, 1.0, 1.1283791671, 0.5), (0.5, 2.0, 2.0, 1.5957691216, 1.0)],
)
def test_gfd_power_examples(alpha, rho, nu, coefficient, exponent):
    assert_term(gfd_power(alpha, rho, nu), coefficient, exponent)


@pytest.mark.parametrize(
    "alpha, nu, coefficient, exponent",
    [(0.5, 1.0, 1.1283791671, 0.5), (1.0, 3.0, 3.0, 2.0)],
)
def test_rl_der_power_examples(alpha, nu, coefficient, exponent):
    assert_term(rl_der_power(alpha, nu), coefficient, exponent)


def test_pole_gives_zero_coefficient():
    term = rl_der_power(0.5, -0.5)
    assert term.coefficient == 0.0
    assert term.exponent == -1.0
    assert term.evaluate(2.0) == 0.0


def test_integer_order_derivative_of_lower_power_vanishes():
    # d^2/dx^2 x = 0 through the pole at 1 + nu - alpha = 0
    assert gfd_power(2.0, 1.0, 1.0).coefficient == 0.0


def test_rl_rules_match_rho_one():
    assert rl_int_power(0.3, 1.7) == gfi_power(0.3, 1.0, 1.7)
    assert rl_der_power(0.3, 1.7) == gfd_power(0.3, 1.0, 1.7)


@pytest.mark.parametrize(
    "call",
    [
        lambda: gfi_power(0.5, 1.0, -1.0),
        lambda: gfd_power(0.5, 2.0, -2.5),
        lambda: rl_int_power(0.5, -1.0),
        lambda: rl_der_power(0.5, -1.5),
        lambda: ek_integral_power(0.5, 1.0, 0.0, -1.0),
    ],
)
def test_domain_errors(call):
    with pytest.raises(OperatorDomainError):
        call()


@given(
    st.floats(min_value=0.05, max_value=2.5),
    st.floats(min_value=0.1, max_value=3.0),
    st.floats(min_value=-0.9, max_value=4.0),
)
def test_derivative_inverts_integral(alpha, rho, fraction):
    nu = fraction * rho
    term = apply_gfd(gfi_power(alpha, rho, nu), alpha, rho)
    assert term.coefficient == pytest.approx(1.0, rel=1e-12)
    assert term.exponent == pytest.approx(nu, rel=1e-12, abs=1e-12)


@given(
    st.floats(min_value=0.05, max_value=0.45),
    st.floats(min_value=0.55, max_value=0.95),
    st.floats(min_value=0.2, max_value=3.0),
    st.floats(min_value=0.0, max_value=3.0),
)
def test_derivative_after_longer_integral(alpha, beta_, rho, nu):
    composed = apply_gfd(gfi_power(beta_, rho, nu), alpha, rho)
    direct = gfi_power(beta_ - alpha, rho, nu)
    assert composed.coefficient == pytest.approx(direct.coefficient, rel=1e-11)
    assert composed.exponent == pytest.approx(direct.exponent, rel=1e-12)


def test_integrals_compose_additively():
    twice = apply_gfi(gfi_power(0.3, 1.4, 1.0), 0.4, 1.4)
    assert_term(twice, gfi_power(0.7, 1.4, 1.0).coefficient, gfi_power(0.7, 1.4, 1.0).exponent, rel=1e-12)


def test_apply_scales_by_coefficient():
    term = apply_gfi(PowerTerm(coefficient=3.0, exponent=2.0), 0.5, 2.0)
    assert term.coefficient == pytest.approx(3.0 * 0.5319230405, rel=1e-9)


def test_large_arguments_stay_finite():
    term = gfi_power(2.0, 0.01, 5.0)
    assert math.isfinite(term.coefficient)
    assert term.coefficient > 0.0


class TestErdelyiKoberRules:
    def test_integral_of_constant(self):
        assert_term(ek_integral_power(1.0, 2.0, 0.0, 0.0), 1.0, 0.0)
        assert_term(ek_integral_power(1.0, 1.0, 1.0, 0.0), 0.5, 0.0)

    def test_derivative_of_linear_function(self):
        assert_term(ek_derivative_power(1.0, 1.0, 0.0, 1.0), 2.0, 1.0)

    @given(
        st.floats(min_value=0.1, max_value=2.0),
        st.floats(min_value=0.2, max_value=3.0),
        st.floats(min_value=0.0, max_value=2.0),
        st.floats(min_value=0.0, max_value=3.0),
    )
    def test_derivative_inverts_integral(self, alpha, rho, eta, nu):
        product = ek_derivative_power(alpha, rho, eta, nu).coefficient * ek_integral_power(alpha, rho, eta, nu).coefficient
        assert product == pytest.approx(1.0, rel=1e-12)

    def test_zero_shift_relates_to_generalized_integral(self):
        alpha, rho, nu = 0.5, 1.4, 2.0
        ek = ek_integral_power(alpha, rho, 0.0, nu).coefficient
        assert ek == pytest.approx(rho ** alpha * gfi_power(alpha, rho, nu).coefficient, rel=1e-13)
