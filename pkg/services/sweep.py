"""
Parameter sweeps over power functions, written as CSV.

Every combination (alpha, rho, nu, x) of a SweepSpec is evaluated for
f = x^nu. Rows come out alpha-major, then rho, then nu, then x, each
ascending, whatever the evaluation order. A point that fails is kept with an
empty value and ERR:<exception name> in the error column.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, TextIO

import numpy as np

from config import get_settings
from errors import FractionalCalculusError
from models import DiffConfig, EKParams, EvalResult, OperatorParams, QuadratureConfig, Side, SweepOperator, SweepSpec
from services.expr import FunctionSpec
from services.operators import caputo_gfd, ek_derivative, gfd, gfi, hadamard_derivative, rl_derivative

logger = logging.getLogger(__name__)

CSV_HEADER = ("x", "alpha", "rho", "nu", "value", "error_estimate")


@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    rho: float
    nu: float
    x: float


@dataclass(frozen=True)
class SweepRow:
    point: SweepPoint
    value: Optional[float]
    error: str

    def cells(self) -> List[str]:
        p = self.point
        value = "" if self.value is None else _fmt(self.value)
        return [_fmt(p.x), _fmt(p.alpha), _fmt(p.rho), _fmt(p.nu), value, self.error]


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def sweep_points(spec: SweepSpec) -> List[SweepPoint]:
    xs = np.linspace(spec.x_grid.lo, spec.x_grid.hi, spec.x_grid.count)
    return [
        SweepPoint(alpha=alpha, rho=rho, nu=nu, x=float(x))
        for alpha in sorted(spec.alphas)
        for rho in sorted(spec.rhos)
        for nu in sorted(spec.nus)
        for x in xs
    ]


def right_endpoint(spec: SweepSpec) -> float:
    """b of the sweep: given, or a little beyond the x grid so derivative stencils fit."""
    if spec.b is not None:
        return spec.b
    grid = spec.x_grid
    return grid.hi + 0.1 * (grid.hi - grid.lo)


def evaluate_point(
    spec: SweepSpec,
    point: SweepPoint,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> EvalResult:
    """The sweep operator applied to x^nu at one point."""
    b = right_endpoint(spec)
    f = FunctionSpec.power(point.nu)
    params = OperatorParams(alpha=point.alpha, rho=point.rho, a=spec.a, b=b)
    op = spec.operator
    if op is SweepOperator.GFD:
        return gfd(params, f, point.x, qcfg, dcfg)
    if op is SweepOperator.GFI:
        return gfi(params, f, point.x, qcfg)
    if op is SweepOperator.RL:
        return rl_derivative(point.alpha, spec.a, b, Side.LEFT, f, point.x, qcfg, dcfg)
    if op is SweepOperator.HADAMARD:
        return hadamard_derivative(point.alpha, spec.a, b, Side.LEFT, f, point.x, qcfg, dcfg)
    if op is SweepOperator.EK:
        return ek_derivative(EKParams(base=params, eta=spec.eta), f, point.x, qcfg, dcfg)
    return caputo_gfd(params, f, point.x, qcfg, dcfg)


def run_sweep(
    spec: SweepSpec,
    qcfg: Optional[QuadratureConfig] = None,
    dcfg: Optional[DiffConfig] = None,
) -> List[SweepRow]:
    points = sweep_points(spec)

    def one(point: SweepPoint) -> SweepRow:
        try:
            result = evaluate_point(spec, point, qcfg, dcfg)
        except (FractionalCalculusError, ValueError) as e:
            logger.warning(f"sweep point {point} failed: {type(e).__name__}: {e}")
            return SweepRow(point=point, value=None, error=f"ERR:{type(e).__name__}")
        return SweepRow(point=point, value=result.value, error=_fmt(result.error_estimate))

    workers = get_settings().workers
    logger.info(f"sweeping {spec.operator.value} over {len(points)} points with {workers} worker(s)")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, points))
    return [one(p) for p in points]


def write_csv(rows: List[SweepRow], stream: TextIO, rel_tol: float) -> None:
    """Write the rows with a '# rel_tol=...' provenance line and the fixed header."""
    stream.write(f"# rel_tol={rel_tol!r}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.cells())
