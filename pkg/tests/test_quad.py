import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import DomainClippedError, IntegrandError, NoConvergenceError
from models import DiffConfig, QuadratureConfig
from services.quad import (
    LOG_CHART,
    adaptive_integral,
    delta_chart,
    integrate_weighted,
    jacobi_weighted_integral,
    nth_delta_derivative,
    nth_derivative,
    nth_log_derivative,
)
from services.specfun import beta


class TestJacobiWeightedIntegral:
    @pytest.mark.parametrize(
        "h, mu, expected",
        [
            (lambda u: np.ones_like(u), 0.5, 2.0),
            (lambda u: u, 0.5, 4.0 / 3.0),
            (lambda u: np.ones_like(u), 1.0, 1.0),
        ],
    )
    def test_examples(self, h, mu, expected, qcfg):
        result = jacobi_weighted_integral(h, mu, qcfg)
        assert result.value == pytest.approx(expected, rel=1e-12)
        assert result.error_estimate <= max(qcfg.rel_tol * abs(result.value), qcfg.abs_tol)

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 2.7])
    @pytest.mark.parametrize("mu", [0.1, 0.5, 1.0, 1.9])
    def test_matches_beta(self, s, mu, qcfg):
        result = jacobi_weighted_integral(lambda u: u ** s, mu, qcfg)
        assert result.value == pytest.approx(beta(s + 1.0, mu), rel=1e-8)

    def test_scalar_integrand_is_broadcast(self, qcfg):
        assert jacobi_weighted_integral(lambda u: 3.0, 1.0, qcfg).value == pytest.approx(3.0, rel=1e-14)

    @pytest.mark.parametrize("b", [-0.5, 0.0, 1.5])
    def test_left_weight(self, b, qcfg):
        result = jacobi_weighted_integral(lambda u: 1.0, 0.7, qcfg, beta=b)
        assert result.value == pytest.approx(beta(b + 1.0, 0.7), rel=1e-12)

    def test_holder_integrand_at_zero(self, qcfg):
        # u^(1/3) only Holder continuous at u = 0
        result = jacobi_weighted_integral(lambda u: np.cbrt(u), 0.6, qcfg)
        assert result.value == pytest.approx(beta(4.0 / 3.0, 0.6), rel=1e-9)

    def test_batched_rows(self, qcfg):
        powers = np.array([0.0, 1.0, 2.0])
        values, errors, _ = integrate_weighted(lambda u: u[None, :] ** powers[:, None], 0.5, qcfg)
        expected = [beta(p + 1.0, 0.5) for p in powers]
        np.testing.assert_allclose(values, expected, rtol=1e-10)
        assert errors.shape == (3,)

    def test_error_estimates_shrink_with_refinement(self):
        tight = dict(rel_tol=1e-300, abs_tol=1e-300, base_nodes=32)
        estimates = []
        for levels in (3, 4):
            with pytest.raises(NoConvergenceError) as exc:
                jacobi_weighted_integral(lambda u: u ** 0.25, 0.5, QuadratureConfig(max_levels=levels, **tight))
            estimates.append(exc.value.result.error_estimate)
        assert estimates[1] <= estimates[0]

    def test_no_convergence_carries_best_estimate(self):
        cfg = QuadratureConfig(rel_tol=1e-300, abs_tol=1e-300, max_levels=1, base_nodes=4)
        with pytest.raises(NoConvergenceError) as exc:
            jacobi_weighted_integral(lambda u: np.cbrt(u), 0.5, cfg)
        assert exc.value.result.value == pytest.approx(beta(4.0 / 3.0, 0.5), rel=1e-2)
        assert exc.value.result.levels_used == 1

    def test_non_finite_integrand(self, qcfg):
        with pytest.raises(IntegrandError):
            jacobi_weighted_integral(lambda u: np.full_like(u, np.nan), 0.5, qcfg)

    @pytest.mark.parametrize("mu", [0.0, -1.0])
    def test_rejects_nonpositive_mu(self, mu, qcfg):
        with pytest.raises(ValueError):
            jacobi_weighted_integral(lambda u: u, mu, qcfg)

    @given(st.floats(min_value=-3.0, max_value=3.0), st.floats(min_value=-3.0, max_value=3.0))
    @settings(max_examples=25, deadline=None)
    def test_linearity(self, c1, c2):
        cfg = QuadratureConfig()
        f = lambda u: np.exp(u)
        g = lambda u: np.cos(3.0 * u)
        combined = jacobi_weighted_integral(lambda u: c1 * f(u) + c2 * g(u), 0.4, cfg).value
        separate = c1 * jacobi_weighted_integral(f, 0.4, cfg).value + c2 * jacobi_weighted_integral(g, 0.4, cfg).value
        assert combined == pytest.approx(separate, rel=1e-9, abs=1e-9)


class TestAdaptiveIntegral:
    @pytest.mark.parametrize(
        "f, lo, hi, expected",
        [
            (lambda t: t * t, 0.0, 1.0, 1.0 / 3.0),
            (lambda t: 1.0 / t, 1.0, math.e, 1.0),
            (math.sin, 0.0, math.pi, 2.0),
        ],
    )
    def test_examples(self, f, lo, hi, expected, qcfg):
        result = adaptive_integral(f, lo, hi, qcfg)
        assert result.value == pytest.approx(expected, rel=1e-10)
        assert result.levels_used >= 1

    def test_endpoint_singularity(self):
        cfg = QuadratureConfig(rel_tol=1e-8, abs_tol=1e-10)
        assert adaptive_integral(lambda t: t ** -0.5, 0.0, 1.0, cfg).value == pytest.approx(2.0, rel=1e-7)

    def test_rejects_empty_interval(self, qcfg):
        with pytest.raises(ValueError):
            adaptive_integral(math.sin, 1.0, 1.0, qcfg)


class TestCharts:
    @pytest.mark.parametrize("rho", [0.001, 0.4, 2.0])
    @pytest.mark.parametrize("x", [0.3, 1.0, 2.5])
    def test_delta_chart_inverts(self, rho, x):
        chart = delta_chart(rho)
        assert chart.inverse(chart.forward(x)) == pytest.approx(x, rel=1e-13)

    def test_delta_chart_approaches_log(self):
        chart = delta_chart(1e-9)
        assert chart.forward(3.0) == pytest.approx(math.log(3.0), rel=1e-8)

    def test_log_chart_maps_zero_to_minus_infinity(self):
        assert LOG_CHART.forward(0.0) == -math.inf


class TestDeltaDerivative:
    def test_delta_of_chart_variable_is_one(self, dcfg):
        rho = 2.0
        result = nth_delta_derivative(lambda x: x ** rho / rho, rho, 1, 1.3, dcfg)
        assert result.value == pytest.approx(1.0, rel=1e-8)

    @pytest.mark.parametrize("n, expected", [(1, 4.0), (2, 8.0)])
    def test_power_of_rho(self, n, expected, dcfg):
        # delta_2 x^4 = 4 x^2, delta_2^2 x^4 = 8
        result = nth_delta_derivative(lambda x: x ** 4.0, 2.0, n, 1.0, dcfg)
        assert result.value == pytest.approx(expected, rel=1e-7)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_rho_one_shares_the_plain_stencil(self, n, dcfg):
        g = lambda x: math.exp(0.7 * x) * math.sin(x)
        assert nth_delta_derivative(g, 1.0, n, 0.9, dcfg) == nth_derivative(g, n, 0.9, dcfg)

    @pytest.mark.parametrize("n, expected", [(1, math.cos(1.2)), (2, -math.sin(1.2)), (3, -math.cos(1.2))])
    def test_plain_derivatives(self, n, expected, dcfg):
        result = nth_derivative(math.sin, n, 1.2, dcfg)
        assert result.value == pytest.approx(expected, rel=1e-6)
        assert result.error_estimate < 1e-5

    def test_log_derivative(self, dcfg):
        # (x d/dx) x^3 = 3 x^3
        result = nth_log_derivative(lambda x: x ** 3, 1, 1.5, dcfg)
        assert result.value == pytest.approx(3.0 * 1.5 ** 3, rel=1e-8)

    def test_stencil_shrinks_near_domain_edge(self, dcfg):
        result = nth_derivative(math.sqrt, 1, 1.001, dcfg, x_lo=1.0)
        assert result.value == pytest.approx(0.5 / math.sqrt(1.001), rel=1e-6)

    def test_stencil_that_cannot_fit_is_reported(self, dcfg):
        with pytest.raises(DomainClippedError):
            nth_derivative(math.sqrt, 1, 1.0, dcfg, x_lo=1.0)

    def test_inner_error_is_propagated(self, dcfg):
        from models import EvalResult

        exact = nth_derivative(math.exp, 1, 0.5, dcfg)
        noisy = nth_derivative(lambda x: EvalResult(value=math.exp(x), error_estimate=1e-9), 1, 0.5, dcfg)
        assert noisy.value == exact.value
        assert noisy.error_estimate > exact.error_estimate

    def test_requires_positive_point(self, dcfg):
        with pytest.raises(ValueError):
            nth_delta_derivative(lambda x: x, 0.5, 1, 0.0, dcfg)

    def test_uses_default_config(self):
        assert nth_derivative(lambda x: x * x, 1, 3.0).value == pytest.approx(6.0, rel=1e-9)

    def test_config_rejects_single_tableau_row(self):
        with pytest.raises(ValueError):
            DiffConfig(richardson_levels=1)
