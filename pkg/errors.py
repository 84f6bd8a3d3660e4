"""
Exception hierarchy for gfrac.

Every error raised by the library derives from FractionalCalculusError so
callers (the CLI in particular) can map failures to exit codes without
catching unrelated exceptions.
"""

from __future__ import annotations

from enum import Enum
from typing import TYPE_CHECKING, Any, FrozenSet, Optional

if TYPE_CHECKING:
    from models import EvalResult


class FractionalCalculusError(Exception):
    """Base class for all gfrac errors."""


class SpecFunKind(str, Enum):
    NON_POSITIVE_GAMMA_POLE = "NonPositiveGammaPole"
    OVERFLOW = "Overflow"
    NON_POSITIVE_ARGUMENT = "NonPositiveArgument"


class SpecFunDomainError(FractionalCalculusError):
    """Raised when a special function is asked for a pole or an unrepresentable value."""

    def __init__(self, kind: SpecFunKind, argument: float, message: Optional[str] = None):
        self.kind = kind
        self.argument = argument
        super().__init__(message or f"{kind.value} at argument {argument!r}")


class ExprSyntaxError(FractionalCalculusError):
    """
    Malformed expression source.

    Attributes:
        offset: Byte offset (UTF-8) of the offending token
        expected: Set of token descriptions that would have been accepted
    """

    def __init__(self, offset: int, expected: FrozenSet[str], found: str = ""):
        self.offset = offset
        self.expected = frozenset(expected)
        self.found = found
        wanted = ", ".join(sorted(self.expected))
        got = f" but found {found!r}" if found else ""
        super().__init__(f"syntax error at offset {offset}: expected one of {{{wanted}}}{got}")


class UnknownFunctionError(FractionalCalculusError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown function {name!r} at offset {offset}")


class ExprDomainError(FractionalCalculusError):
    """Evaluation left the real domain of a sub-expression (log of a nonpositive, ...)."""

    def __init__(self, node: Any, reason: str):
        self.node = node
        self.reason = reason
        super().__init__(f"{reason} in sub-expression {node}")


class QuadratureError(FractionalCalculusError):
    pass


class NoConvergenceError(QuadratureError):
    """
    Refinement budget exhausted before the tolerance was met.

    The best available estimate is kept on the exception.
    """

    def __init__(self, result: "EvalResult", message: Optional[str] = None):
        self.result = result
        super().__init__(
            message
            or (
                f"no convergence after {result.levels_used} levels: "
                f"value={result.value!r}, error_estimate={result.error_estimate!r}"
            )
        )


class IntegrandError(QuadratureError):
    """The integrand produced a non-finite value inside the integration range."""


class DomainClippedError(FractionalCalculusError):
    """A finite-difference stencil could not be fitted inside the function's domain."""

    def __init__(self, point: float, step: float):
        self.point = point
        self.step = step
        super().__init__(
            f"difference stencil around {point!r} does not fit the domain "
            f"(step shrunk to {step:.3g})"
        )


class OperatorDomainError(FractionalCalculusError):
    """Operator parameters or evaluation point outside the supported region."""


class UnsupportedFunctionError(FractionalCalculusError):
    """The operator needs a symbolic representation the given function does not have."""
