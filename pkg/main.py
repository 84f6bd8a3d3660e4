"""
gfrac - Command Line Entry Point

Evaluates generalized fractional integrals and derivatives of expressions,
sweeps parameter grids into CSV, and runs the verification suites.

Subcommands: eval, sweep, verify, selftest.
Exit codes: 0 ok, 1 verification failure, 2 input error,
3 numerical non-convergence, 4 I/O error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from config import default_quadrature_config, get_settings
from errors import (
    DomainClippedError,
    ExprDomainError,
    ExprSyntaxError,
    FractionalCalculusError,
    NoConvergenceError,
    OperatorDomainError,
    QuadratureError,
    SpecFunDomainError,
    UnknownFunctionError,
    UnsupportedFunctionError,
)
from models import EKParams, EvalResult, OperatorParams, Side, SweepSpec, VerifyConfig
from services.expr import FunctionSpec
from services.operators import (
    caputo_gfd,
    ek_derivative,
    ek_integral,
    gfd,
    gfi,
    hadamard_derivative,
    hadamard_integral,
    nfold_oracle,
    rl_derivative,
    rl_integral,
)
from services.props import SUITES, run_suite, selftest_reports
from services.sweep import run_sweep, write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3
EXIT_IO = 4

OPERATORS = ("gfi", "gfd", "rl-int", "rl", "hadamard-int", "hadamard", "ek-int", "ek", "caputo", "nfold")

_INPUT_ERRORS = (
    ExprSyntaxError,
    UnknownFunctionError,
    ExprDomainError,
    OperatorDomainError,
    SpecFunDomainError,
    UnsupportedFunctionError,
    DomainClippedError,
    ValidationError,
)


def configure_logging(level: Optional[str] = None) -> None:
    """Log to stderr; stdout carries results only."""
    logging.basicConfig(
        level=(level or get_settings().log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _default_b(x: float) -> float:
    return x + max(1.0, abs(x))


def evaluate_operator(args: argparse.Namespace) -> EvalResult:
    """Dispatch one eval request to the operator it names."""
    f = FunctionSpec.parse(args.f)
    x = args.x
    b = args.b if args.b is not None else _default_b(x)
    side = Side(args.side)
    op = args.op

    if op == "nfold":
        if not float(args.alpha).is_integer():
            raise OperatorDomainError(f"nfold needs an integer order, got alpha={args.alpha}")
        return nfold_oracle(int(args.alpha), args.rho, args.a, f, x, side=side, b=b)
    if op == "rl-int":
        return rl_integral(args.alpha, args.a, b, side, f, x)
    if op == "rl":
        return rl_derivative(args.alpha, args.a, b, side, f, x)
    if op == "hadamard-int":
        return hadamard_integral(args.alpha, args.a, b, side, f, x)
    if op == "hadamard":
        return hadamard_derivative(args.alpha, args.a, b, side, f, x)

    params = OperatorParams(alpha=args.alpha, rho=args.rho, a=args.a, b=b, side=side)
    if op == "gfi":
        return gfi(params, f, x)
    if op == "gfd":
        return gfd(params, f, x)
    if op == "caputo":
        return caputo_gfd(params, f, x)
    ek = EKParams(base=params, eta=args.eta)
    if op == "ek-int":
        return ek_integral(ek, f, x)
    return ek_derivative(ek, f, x)


def format_result(result: EvalResult) -> str:
    return f"{round(result.value, 10)!r} ±{result.error_estimate:.3g}"


def cmd_eval(args: argparse.Namespace) -> int:
    logger.info(f"eval {args.op}: alpha={args.alpha} rho={args.rho} a={args.a} side={args.side} f={args.f!r} x={args.x}")
    try:
        result = evaluate_operator(args)
    except _INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except NoConvergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        print(f"best estimate: {format_result(e.result)}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except QuadratureError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    print(format_result(result))
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep / verify config handling
# ---------------------------------------------------------------------------

def load_json_config(path: Optional[str]) -> Dict[str, Any]:
    """
    Read a JSON config file.

    Raises:
        OSError: The file cannot be read
        ValueError: The file is not a JSON object
    """
    if path is None:
        return {}
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    return data


def merge_flags(config: Dict[str, Any], flags: Dict[str, Any]) -> Dict[str, Any]:
    """Flags that were given override file values; nested dicts merge key by key."""
    merged = dict(config)
    for key, value in flags.items():
        if value is None:
            continue
        if isinstance(value, dict):
            nested = dict(merged.get(key) or {})
            nested.update({k: v for k, v in value.items() if v is not None})
            merged[key] = nested
        else:
            merged[key] = value
    return merged


def build_sweep_spec(args: argparse.Namespace) -> SweepSpec:
    flags = {
        "alphas": args.alphas,
        "rhos": args.rhos,
        "nus": args.nus,
        "x_grid": {"lo": args.x_lo, "hi": args.x_hi, "count": args.x_count},
        "operator": args.operator,
        "a": args.a,
        "b": args.b,
        "eta": args.eta,
    }
    return SweepSpec.model_validate(merge_flags(load_json_config(args.config), flags))


def build_verify_config(args: argparse.Namespace) -> VerifyConfig:
    flags = {"a": args.a, "b": args.b, "tol": args.tol, "grid_count": args.grid_count}
    return VerifyConfig.model_validate(merge_flags(load_json_config(args.config), flags))


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        spec = build_sweep_spec(args)
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: invalid sweep specification: {e}", file=sys.stderr)
        return EXIT_INPUT

    rows = run_sweep(spec)
    rel_tol = default_quadrature_config().rel_tol
    try:
        if args.out == "-":
            write_csv(rows, sys.stdout, rel_tol)
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as stream:
                write_csv(rows, stream, rel_tol)
    except OSError as e:
        print(f"error: cannot write {args.out}: {e}", file=sys.stderr)
        return EXIT_IO
    failed = sum(1 for row in rows if row.value is None)
    logger.info(f"sweep written to {args.out}: {len(rows)} rows, {failed} failed")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        cfg = build_verify_config(args)
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: invalid verify configuration: {e}", file=sys.stderr)
        return EXIT_INPUT

    reports = run_suite(args.suite, cfg)
    for report in reports:
        print(report.to_json())
    failed = [r.identity_name for r in reports if not r.passed]
    if failed:
        logger.warning(f"{len(failed)} of {len(reports)} reports failed: {', '.join(failed)}")
        return EXIT_VERIFY_FAILED
    logger.info(f"all {len(reports)} reports passed")
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    reports = selftest_reports()
    for report in reports:
        print(report.to_json())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="Generalized fractional integrals and derivatives",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    parser.add_argument("--log-level", default=None, help="override GFRAC_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate one operator at one point")
    p_eval.add_argument("--op", choices=OPERATORS, required=True)
    p_eval.add_argument("--alpha", type=float, required=True)
    p_eval.add_argument("--rho", type=float, default=1.0)
    p_eval.add_argument("--a", type=float, default=0.0)
    p_eval.add_argument("--b", type=float, default=None, help="right endpoint (default: beyond x)")
    p_eval.add_argument("--side", choices=[s.value for s in Side], default=Side.LEFT.value)
    p_eval.add_argument("--eta", type=float, default=0.0, help="Erdelyi-Kober shift")
    p_eval.add_argument("--f", required=True, help="expression in x, e.g. 'x^2*exp(x)'")
    p_eval.add_argument("--x", type=float, required=True)
    p_eval.set_defaults(handler=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="evaluate x^nu over a parameter grid, write CSV")
    p_sweep.add_argument("--config", default=None, help="JSON file with SweepSpec fields")
    p_sweep.add_argument("--alphas", type=float, nargs="+", default=None)
    p_sweep.add_argument("--rhos", type=float, nargs="+", default=None)
    p_sweep.add_argument("--nus", type=float, nargs="+", default=None)
    p_sweep.add_argument("--x-lo", type=float, default=None)
    p_sweep.add_argument("--x-hi", type=float, default=None)
    p_sweep.add_argument("--x-count", type=int, default=None)
    p_sweep.add_argument("--operator", choices=["gfd", "gfi", "rl", "hadamard", "ek", "caputo"], default=None)
    p_sweep.add_argument("--a", type=float, default=None)
    p_sweep.add_argument("--b", type=float, default=None)
    p_sweep.add_argument("--eta", type=float, default=None)
    p_sweep.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    p_sweep.set_defaults(handler=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run verification suites, print JSON reports")
    p_verify.add_argument("suite", nargs="?", choices=SUITES, default="all")
    p_verify.add_argument("--config", default=None, help="JSON file with VerifyConfig fields")
    p_verify.add_argument("--tol", type=float, default=None, help="tolerance for every report")
    p_verify.add_argument("--a", type=float, default=None)
    p_verify.add_argument("--b", type=float, default=None)
    p_verify.add_argument("--grid-count", type=_positive_int, default=None)
    p_verify.set_defaults(handler=cmd_verify)

    p_self = sub.add_parser("selftest", help="check special functions and quadrature against oracles")
    p_self.set_defaults(handler=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        parser = build_parser()
    except ValidationError as e:
        print(f"error: invalid GFRAC_ environment settings: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help/--version
        return int(e.code or 0)

    configure_logging(args.log_level)
    settings = get_settings()
    logger.info(f"{settings.app_name} v{settings.app_version}: {args.command}")
    try:
        return args.handler(args)
    except FractionalCalculusError as e:
        logger.error(f"unhandled library error: {e}", exc_info=True)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
