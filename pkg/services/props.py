"""
Verification harness: operator identities as residual reports, and the
weighted X^p_c norm.

Each verify_* function evaluates one identity on a grid of points and
returns Report objects. Evaluation failures never escape: the affected
residuals become inf and the report carries a diagnostic.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import get_settings
from errors import FractionalCalculusError
from models import DiffConfig, OperatorParams, QuadratureConfig, Report, VerifyConfig
from services.expr import FunctionSpec
from services.operators import (
    RealFunction,
    gfd,
    gfi,
    gfi_image,
    hadamard_derivative,
    hadamard_integral,
    nfold_oracle,
    rl_derivative,
    rl_integral,
)
from services import specfun
from services.quad import adaptive_integral, jacobi_weighted_integral

logger = logging.getLogger(__name__)

DEFAULT_GRID_COUNT = 8
DEFAULT_RHO_SEQUENCE = (0.1, 0.01, 0.001)
HADAMARD_TOLERANCE = 1e-2

# Dense sampling for the sup norm
SUP_SAMPLES = 1024


def chebyshev_grid(lo: float, hi: float, count: int = DEFAULT_GRID_COUNT) -> List[float]:
    """count Chebyshev points of [lo + 0.1 (hi - lo), hi - 0.1 (hi - lo)], ascending."""
    if not lo < hi:
        raise ValueError(f"grid requires lo < hi, got ({lo}, {hi})")
    if count < 1:
        raise ValueError(f"grid needs at least one point, got {count}")
    inner_lo = lo + 0.1 * (hi - lo)
    inner_hi = hi - 0.1 * (hi - lo)
    mid = 0.5 * (inner_lo + inner_hi)
    half = 0.5 * (inner_hi - inner_lo)
    k = np.arange(count)
    nodes = mid + half * np.cos((2 * k + 1) * np.pi / (2 * count))
    return sorted(float(t) for t in nodes)


def _grid_and_b(a: float, grid: Optional[Sequence[float]], b: Optional[float]) -> Tuple[List[float], float]:
    """The evaluation grid and a right endpoint strictly beyond it."""
    if grid is None:
        hi = b if b is not None else max(2.0, a + 1.0)
        return chebyshev_grid(a, hi), hi
    points = [float(t) for t in grid]
    if b is None:
        top = max(points)
        b = top + 0.1 * max(top - a, 1.0)
    return points, b


def _evaluate(residual: Callable[[float], float], grid: Sequence[float]) -> Tuple[List[float], Optional[str]]:
    """Residual per grid point; failures become inf plus a diagnostic."""

    def one(x: float) -> Tuple[float, Optional[str]]:
        try:
            value = float(residual(x))
        except (FractionalCalculusError, ValueError) as e:
            logger.warning(f"evaluation failed at x={x}: {type(e).__name__}: {e}")
            return math.inf, f"x={x}: {type(e).__name__}: {e}"
        if not math.isfinite(value):
            return math.inf, f"x={x}: non-finite residual"
        return value, None

    workers = get_settings().workers
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, grid))
    else:
        outcomes = [one(x) for x in grid]

    residuals = [r for r, _ in outcomes]
    messages = [m for _, m in outcomes if m is not None]
    return residuals, ("; ".join(messages) if messages else None)


def _failed(name: str, grid: Sequence[float], tol: float, echo: Dict[str, object], reason: str) -> Report:
    logger.warning(f"{name}: {reason}")
    return Report(
        identity_name=name,
        grid=list(grid),
        residuals=[math.inf] * len(grid),
        tolerance=tol,
        params_echo=echo,
        diagnostic=reason,
    )


def _log_report(report: Report) -> Report:
    status = "pass" if report.passed else "FAIL"
    logger.info(f"{report.identity_name}: {status} (max residual {report.max_residual:.3g}, tol {report.tolerance:g})")
    return report


def verify_inverse(
    f: RealFunction,
    alpha: float,
    rho: float,
    a: float,
    grid: Optional[Sequence[float]] = None,
    tol: float = 1e-5,
    b: Optional[float] = None,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> Report:
    """Residuals |D^alpha I^alpha f (x) - f(x)| of the left-inverse identity."""
    points, b = _grid_and_b(a, grid, b)
    name = "inverse"
    echo: Dict[str, object] = {"f": str(f), "alpha": alpha, "rho": rho, "a": a, "b": b}
    if not a > 0.0:
        return _failed(name, points, tol, echo, f"unsupported: the inverse identity needs a > 0, got a={a}")
    if not 0.0 < alpha < 1.0:
        return _failed(name, points, tol, echo, f"unsupported: alpha must lie in (0, 1), got {alpha}")

    params = OperatorParams(alpha=alpha, rho=rho, a=a, b=b)
    image = gfi_image(params, f, qcfg)

    def residual(x: float) -> float:
        return abs(gfd(params, image, x, qcfg, dcfg).value - float(f(x)))

    residuals, diagnostic = _evaluate(residual, points)
    return _log_report(Report(
        identity_name=name, grid=points, residuals=residuals, tolerance=tol, params_echo=echo, diagnostic=diagnostic
    ))


def verify_composition(
    f: RealFunction,
    alpha: float,
    beta: float,
    rho: float,
    a: float,
    grid: Optional[Sequence[float]] = None,
    tol: float = 1e-5,
    b: Optional[float] = None,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> Report:
    """Residuals |D^alpha I^beta f - I^(beta-alpha) f| for 0 < alpha < beta < 1."""
    points, b = _grid_and_b(a, grid, b)
    name = "composition"
    echo: Dict[str, object] = {"f": str(f), "alpha": alpha, "beta": beta, "rho": rho, "a": a, "b": b}
    if not 0.0 < alpha < beta < 1.0:
        return _failed(name, points, tol, echo, f"unsupported: needs 0 < alpha < beta < 1, got alpha={alpha}, beta={beta}")
    if not a > 0.0:
        return _failed(name, points, tol, echo, f"unsupported: the composition identity needs a > 0, got a={a}")

    outer = OperatorParams(alpha=alpha, rho=rho, a=a, b=b)
    image = gfi_image(OperatorParams(alpha=beta, rho=rho, a=a, b=b), f, qcfg)
    reduced = OperatorParams(alpha=beta - alpha, rho=rho, a=a, b=b)

    def residual(x: float) -> float:
        return abs(gfd(outer, image, x, qcfg, dcfg).value - gfi(reduced, f, x, qcfg).value)

    residuals, diagnostic = _evaluate(residual, points)
    return _log_report(Report(
        identity_name=name, grid=points, residuals=residuals, tolerance=tol, params_echo=echo, diagnostic=diagnostic
    ))


def verify_rl_limit(
    f: RealFunction,
    alpha: float,
    a: float,
    grid: Optional[Sequence[float]] = None,
    tol_integral: float = 1e-8,
    tol_derivative: float = 1e-5,
    b: Optional[float] = None,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> List[Report]:
    """
    The generalized operators at rho = 1 against the independent
    Riemann-Liouville implementations: one report for the integral, one for
    the derivative.
    """
    points, b = _grid_and_b(a, grid, b)
    params = OperatorParams(alpha=alpha, rho=1.0, a=a, b=b)
    echo: Dict[str, object] = {"f": str(f), "alpha": alpha, "rho": 1.0, "a": a, "b": b}

    def integral_residual(x: float) -> float:
        return abs(gfi(params, f, x, qcfg).value - rl_integral(alpha, a, b, "left", f, x, qcfg).value)

    def derivative_residual(x: float) -> float:
        return abs(gfd(params, f, x, qcfg, dcfg).value - rl_derivative(alpha, a, b, "left", f, x, qcfg, dcfg).value)

    reports = []
    for name, residual, tol in (
        ("rl_limit_integral", integral_residual, tol_integral),
        ("rl_limit_derivative", derivative_residual, tol_derivative),
    ):
        residuals, diagnostic = _evaluate(residual, points)
        reports.append(_log_report(Report(
            identity_name=name, grid=points, residuals=residuals, tolerance=tol, params_echo=echo, diagnostic=diagnostic
        )))
    return reports


def verify_hadamard_limit(
    f: RealFunction,
    alpha: float,
    a: float,
    grid: Optional[Sequence[float]] = None,
    rho_sequence: Sequence[float] = DEFAULT_RHO_SEQUENCE,
    tol: float = HADAMARD_TOLERANCE,
    b: Optional[float] = None,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> List[Report]:
    """
    Distance between the generalized and Hadamard operators along a
    decreasing rho sequence. The report grid is the rho sequence; each
    residual is the maximum over the x grid. Passing requires strictly
    decreasing residuals ending within tol.
    """
    points, b = _grid_and_b(a, grid, b)
    rhos = sorted((float(r) for r in rho_sequence), reverse=True)
    echo: Dict[str, object] = {"f": str(f), "alpha": alpha, "a": a, "b": b, "x_grid": points}
    names = ("hadamard_limit_integral", "hadamard_limit_derivative")
    if not a > 0.0:
        reason = f"unsupported: Hadamard operators need a > 0, got a={a}"
        return [_failed(name, rhos, tol, echo, reason) for name in names]

    def integral_gap(rho: float) -> float:
        params = OperatorParams(alpha=alpha, rho=rho, a=a, b=b)
        return max(
            abs(gfi(params, f, x, qcfg).value - hadamard_integral(alpha, a, b, "left", f, x, qcfg).value)
            for x in points
        )

    def derivative_gap(rho: float) -> float:
        params = OperatorParams(alpha=alpha, rho=rho, a=a, b=b)
        return max(
            abs(gfd(params, f, x, qcfg, dcfg).value - hadamard_derivative(alpha, a, b, "left", f, x, qcfg, dcfg).value)
            for x in points
        )

    reports = []
    for name, gap in zip(names, (integral_gap, derivative_gap)):
        residuals, diagnostic = _evaluate(gap, rhos)
        reports.append(_log_report(Report(
            identity_name=name,
            grid=rhos,
            residuals=residuals,
            tolerance=tol,
            params_echo=echo,
            criterion="monotone",
            diagnostic=diagnostic,
        )))
    return reports


def verify_nfold(
    f: RealFunction,
    n: int,
    rho: float,
    a: float,
    grid: Optional[Sequence[float]] = None,
    tol: float = 1e-7,
    b: Optional[float] = None,
    qcfg: Optional[QuadratureConfig] = None,
) -> Report:
    """Residuals |I^n f - (n-fold iterated integral of f)| for integer order n."""
    points, b = _grid_and_b(a, grid, b)
    echo: Dict[str, object] = {"f": str(f), "n": n, "rho": rho, "a": a, "b": b}
    params = OperatorParams(alpha=float(n), rho=rho, a=a, b=b)

    def residual(x: float) -> float:
        return abs(gfi(params, f, x, qcfg).value - nfold_oracle(n, rho, a, f, x, qcfg).value)

    residuals, diagnostic = _evaluate(residual, points)
    return _log_report(Report(
        identity_name="nfold", grid=points, residuals=residuals, tolerance=tol, params_echo=echo, diagnostic=diagnostic
    ))


def xpc_norm(
    f: RealFunction,
    p: float,
    c: float,
    a: float,
    b: float,
    cfg: Optional[QuadratureConfig] = None,
) -> float:
    """
    Norm of f in X^p_c(a, b): (int_a^b |t^c f(t)|^p dt/t)^(1/p), or the
    supremum of |t^c f(t)| for p = inf.

    The supremum is taken over SUP_SAMPLES points plus one refinement pass
    around the largest sample.
    """
    if not (0.0 < a < b):
        raise ValueError(f"X^p_c norm needs 0 < a < b, got a={a}, b={b}")
    if not p >= 1.0:
        raise ValueError(f"X^p_c norm needs p >= 1, got {p}")

    def weighted(t: np.ndarray) -> np.ndarray:
        return np.abs(t ** c * np.asarray(f(t), dtype=float))

    if math.isinf(p):
        t = np.linspace(a, b, SUP_SAMPLES)
        values = weighted(t)
        i = int(np.argmax(values))
        lo = t[max(i - 1, 0)]
        hi = t[min(i + 1, SUP_SAMPLES - 1)]
        refined = weighted(np.linspace(lo, hi, SUP_SAMPLES))
        return float(max(values[i], refined.max()))

    result = adaptive_integral(lambda t: float(weighted(np.asarray(t))) ** p / t, a, b, cfg)
    return result.value ** (1.0 / p)


# ---------------------------------------------------------------------------
# Built-in suites
# ---------------------------------------------------------------------------

SUITES = ("inverse", "composition", "limits", "nfold", "all")


def builtin_corpus() -> Dict[str, FunctionSpec]:
    """Test functions: powers, a constant, exp and log (all defined on x > 0)."""
    sources = ("x^0.5", "x", "x^2", "1", "exp(x)", "log(x)")
    return {src: FunctionSpec.parse(src) for src in sources}


INVERSE_ALPHAS = (0.3, 0.5, 0.8)
INVERSE_RHOS = (0.7, 1.0, 1.7)
COMPOSITION_ORDERS = ((0.3, 0.7), (0.25, 0.75))
COMPOSITION_RHOS = (1.0, 2.0)


def _suite_inverse(cfg: VerifyConfig, qcfg: Optional[QuadratureConfig], dcfg: Optional[DiffConfig]) -> List[Report]:
    tol = cfg.tol if cfg.tol is not None else cfg.tol_derivative
    return [
        verify_inverse(f, alpha, rho, cfg.a, _grid(cfg), tol, cfg.b, qcfg, dcfg)
        for f in builtin_corpus().values()
        for alpha in INVERSE_ALPHAS
        for rho in INVERSE_RHOS
    ]


def _suite_composition(cfg: VerifyConfig, qcfg: Optional[QuadratureConfig], dcfg: Optional[DiffConfig]) -> List[Report]:
    tol = cfg.tol if cfg.tol is not None else cfg.tol_derivative
    functions = (FunctionSpec.parse("x"), FunctionSpec.parse("sin(x)"))
    return [
        verify_composition(f, alpha, beta, rho, cfg.a, _grid(cfg), tol, cfg.b, qcfg, dcfg)
        for f in functions
        for alpha, beta in COMPOSITION_ORDERS
        for rho in COMPOSITION_RHOS
    ]


def _suite_limits(cfg: VerifyConfig, qcfg: Optional[QuadratureConfig], dcfg: Optional[DiffConfig]) -> List[Report]:
    corpus = builtin_corpus()
    tol_integral = cfg.tol if cfg.tol is not None else cfg.tol_integral
    tol_derivative = cfg.tol if cfg.tol is not None else cfg.tol_derivative
    tol_hadamard = cfg.tol if cfg.tol is not None else HADAMARD_TOLERANCE
    reports: List[Report] = []
    for f in corpus.values():
        reports.extend(verify_rl_limit(f, 0.5, cfg.a, _grid(cfg), tol_integral, tol_derivative, cfg.b, qcfg, dcfg))
    for src in ("1", "x", "log(x)"):
        reports.extend(
            verify_hadamard_limit(corpus[src], 0.5, cfg.a, _grid(cfg), cfg.rho_sequence, tol_hadamard, cfg.b, qcfg, dcfg)
        )
    return reports


def _suite_nfold(cfg: VerifyConfig, qcfg: Optional[QuadratureConfig], dcfg: Optional[DiffConfig]) -> List[Report]:
    tol = cfg.tol if cfg.tol is not None else 1e-7
    functions = (FunctionSpec.parse("1"), FunctionSpec.parse("x"))
    return [
        verify_nfold(f, n, rho, cfg.a, _grid(cfg), tol, cfg.b, qcfg)
        for f in functions
        for n in (1, 2)
        for rho in (1.0, 2.0)
    ]


def _grid(cfg: VerifyConfig) -> List[float]:
    if cfg.grid is not None:
        return list(cfg.grid)
    return chebyshev_grid(cfg.a, cfg.b, cfg.grid_count)


_SUITE_RUNNERS = {
    "inverse": _suite_inverse,
    "composition": _suite_composition,
    "limits": _suite_limits,
    "nfold": _suite_nfold,
}


def run_suite(
    suite: str,
    cfg: Optional[VerifyConfig] = None,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> List[Report]:
    """Run one named suite (or all of them) over the built-in corpus."""
    cfg = cfg or VerifyConfig()
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    names = list(_SUITE_RUNNERS) if suite == "all" else [suite]
    reports: List[Report] = []
    for name in names:
        logger.info(f"running verification suite {name}")
        reports.extend(_SUITE_RUNNERS[name](cfg, qcfg, dcfg))
    return reports


# ---------------------------------------------------------------------------
# Self test of the numerical building blocks
# ---------------------------------------------------------------------------

def selftest_reports(cfg: Optional[QuadratureConfig] = None) -> List[Report]:
    """Special functions against the math module and quadrature against Beta values."""
    gamma_grid = [0.1, 0.5, 1.0, 1.5, 2.5, 4.2, 10.0, 33.3, -0.5, -2.7]
    gamma_residuals = [abs(specfun.gamma(z) - math.gamma(z)) / abs(math.gamma(z)) for z in gamma_grid]

    lgamma_grid = [0.1, 0.5, 1.0, 2.0, 7.5, 25.0, 150.0, 1000.0]
    lgamma_residuals = [
        abs(specfun.log_gamma(z) - math.lgamma(z)) / max(1.0, abs(math.lgamma(z))) for z in lgamma_grid
    ]

    beta_pairs = [(0.5, 1.5), (2.0, 3.0), (0.3, 7.1), (10.0, 0.25)]
    beta_residuals = [abs(specfun.beta(p, q) - specfun.beta(q, p)) / specfun.beta(p, q) for p, q in beta_pairs]

    jacobi_grid = [0.0, 0.5, 1.0, 2.7]
    jacobi_residuals = []
    for s in jacobi_grid:
        exact = specfun.beta(s + 1.0, 0.5)
        value = jacobi_weighted_integral(lambda u, s=s: u ** s, 0.5, cfg).value
        jacobi_residuals.append(abs(value - exact) / exact)

    adaptive_cases = [
        (lambda t: t * t, 0.0, 1.0, 1.0 / 3.0),
        (lambda t: 1.0 / t, 1.0, math.e, 1.0),
        (math.sin, 0.0, math.pi, 2.0),
    ]
    adaptive_residuals = [abs(adaptive_integral(g, lo, hi, cfg).value - exact) for g, lo, hi, exact in adaptive_cases]

    reports = [
        Report(identity_name="gamma_vs_math", grid=gamma_grid, residuals=gamma_residuals, tolerance=1e-12),
        Report(identity_name="log_gamma_vs_math", grid=lgamma_grid, residuals=lgamma_residuals, tolerance=1e-12),
        Report(
            identity_name="beta_symmetry",
            grid=[float(p) for p, _ in beta_pairs],
            residuals=beta_residuals,
            tolerance=1e-14,
            params_echo={"q": [float(q) for _, q in beta_pairs]},
        ),
        Report(
            identity_name="jacobi_vs_beta",
            grid=jacobi_grid,
            residuals=jacobi_residuals,
            tolerance=1e-8,
            params_echo={"mu": 0.5},
        ),
        Report(identity_name="adaptive_integral", grid=[0.0, 1.0, 2.0], residuals=adaptive_residuals, tolerance=1e-8),
    ]
    return [_log_report(r) for r in reports]
