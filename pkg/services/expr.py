"""
Expression language for user-supplied test functions f(x).

Grammar (whitespace-insensitive):

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" "-"? number)?
    atom   := number | "x" | "pi" | "e" | ident "(" expr ")" | "(" expr ")"
    ident  := "exp" | "log" | "sin" | "cos" | "sqrt"

Binary operators are parsed with a binding-power (Pratt) loop; exponents are
literal numbers so the derivative of x^nu stays nu * x^(nu - 1).
ASTs are frozen dataclasses and evaluate element-wise on numpy arrays.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, List, Optional, Tuple, Union

import numpy as np

from errors import ExprDomainError, ExprSyntaxError, UnknownFunctionError

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")
NAMED_CONSTANTS = {"pi": math.pi, "e": math.e}

RealFunction = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Constant:
    value: float


@dataclass(frozen=True, slots=True)
class Variable:
    pass


@dataclass(frozen=True, slots=True)
class Add:
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True, slots=True)
class Sub:
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True, slots=True)
class Mul:
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True, slots=True)
class Div:
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True, slots=True)
class Neg:
    operand: "ExprAst"


@dataclass(frozen=True, slots=True)
class Pow:
    base: "ExprAst"
    exponent: float


@dataclass(frozen=True, slots=True)
class Call:
    name: str
    arg: "ExprAst"


ExprAst = Union[Constant, Variable, Add, Sub, Mul, Div, Neg, Pow, Call]

_BINARY = {Add: "+", Sub: "-", Mul: "*", Div: "/"}


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)

_ATOM_START = frozenset({"number", "x", "pi", "e", "(", "-"} | set(FUNCTIONS))
_AFTER_OPERAND = frozenset({"+", "-", "*", "/", "^", "end"})
# A power takes one literal exponent, so "^" cannot follow it
_AFTER_POWER = _AFTER_OPERAND - {"^"}


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # "number", "ident", "op" or "end"
    text: str
    offset: int  # byte offset into the UTF-8 source


def _ends_power(tokens: List[_Token]) -> bool:
    """True when the tokens end in a complete "^ [-] number" exponent."""
    if not tokens or tokens[-1].kind != "number":
        return False
    texts = [t.text for t in tokens[-3:-1]]
    return texts[-1:] == ["^"] or texts == ["^", "-"]


def _expected_after(tokens: List[_Token]) -> FrozenSet[str]:
    if not tokens or tokens[-1].text in "+-*/^(":
        return _ATOM_START
    return _AFTER_POWER if _ends_power(tokens) else _AFTER_OPERAND


def _tokenize(src: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    byte_pos = 0

    def advance_bytes(start: int, stop: int) -> int:
        return byte_pos + len(src[start:stop].encode("utf-8"))

    while True:
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == m.start() or m.lastgroup is None:
            # Only whitespace (or nothing) left, or an unknown character
            rest = src[pos:]
            stripped = len(rest) - len(rest.lstrip())
            byte_pos = advance_bytes(pos, pos + stripped)
            pos += stripped
            if pos >= len(src):
                tokens.append(_Token("end", "", byte_pos))
                return tokens
            expected = _expected_after(tokens)
            raise ExprSyntaxError(byte_pos, expected, src[pos])
        start = m.start(m.lastgroup)
        byte_start = advance_bytes(pos, start)
        tokens.append(_Token(m.lastgroup, m.group(m.lastgroup), byte_start))
        byte_pos = advance_bytes(pos, m.end())
        pos = m.end()


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_LEFT_BINDING = {"+": 10, "-": 10, "*": 20, "/": 20}
_NODE_FOR = {"+": Add, "-": Sub, "*": Mul, "/": Div}


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.index = 0
        self.closed_power = False

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def fail(self, expected: FrozenSet[str]) -> ExprSyntaxError:
        tok = self.peek()
        return ExprSyntaxError(tok.offset, expected, tok.text or "end of input")

    def continuations(self) -> FrozenSet[str]:
        return _AFTER_POWER if self.closed_power else _AFTER_OPERAND

    def parse(self) -> ExprAst:
        tree = self.expression(0)
        if self.peek().kind != "end":
            raise self.fail(self.continuations())
        return tree

    def expression(self, rbp: int) -> ExprAst:
        left = self.factor()
        while True:
            tok = self.peek()
            lbp = _LEFT_BINDING.get(tok.text, 0) if tok.kind == "op" else 0
            if rbp >= lbp:
                return left
            self.advance()
            right = self.expression(lbp)  # same lbp -> left associative
            left = _NODE_FOR[tok.text](left, right)

    def factor(self) -> ExprAst:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            operand = self.factor()
            if type(operand) is Constant:
                return Constant(-operand.value)
            return Neg(operand)
        return self.power()

    def power(self) -> ExprAst:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            sign = 1.0
            if self.peek().kind == "op" and self.peek().text == "-":
                self.advance()
                sign = -1.0
            num = self.peek()
            if num.kind != "number":
                raise self.fail(frozenset({"number", "-"}) if sign > 0 else frozenset({"number"}))
            self.advance()
            self.closed_power = True
            return Pow(base, sign * float(num.text))
        self.closed_power = False
        return base

    def atom(self) -> ExprAst:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Constant(float(tok.text))
        if tok.kind == "ident":
            if tok.text == "x":
                self.advance()
                return Variable()
            if tok.text in NAMED_CONSTANTS:
                self.advance()
                return Constant(NAMED_CONSTANTS[tok.text])
            nxt = self.tokens[self.index + 1]
            if nxt.kind == "op" and nxt.text == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownFunctionError(tok.text, tok.offset)
                self.advance()
                self.advance()
                arg = self.expression(0)
                self.expect(")")
                return Call(tok.text, arg)
            raise self.fail(_ATOM_START)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.expression(0)
            self.expect(")")
            return inner
        raise self.fail(_ATOM_START)

    def expect(self, text: str) -> None:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            raise self.fail(frozenset({text}) | (self.continuations() - {"end"}))
        self.advance()


def parse(src: str) -> ExprAst:
    """
    Parse expression source into an AST.

    Raises:
        ExprSyntaxError: Malformed input (carries byte offset and expected tokens)
        UnknownFunctionError: Call of a function outside exp/log/sin/cos/sqrt
    """
    return _Parser(src).parse()


def to_source(ast: ExprAst) -> str:
    """Print an AST with canonical parentheses; parse(to_source(t)) == t."""
    if isinstance(ast, Constant):
        if ast.value < 0:
            return f"(-{(-ast.value)!r})"
        return repr(ast.value)
    if isinstance(ast, Variable):
        return "x"
    if isinstance(ast, Neg):
        return f"(-{to_source(ast.operand)})"
    if isinstance(ast, Pow):
        return f"({to_source(ast.base)}^{ast.exponent!r})"
    if isinstance(ast, Call):
        return f"{ast.name}({to_source(ast.arg)})"
    op = _BINARY[type(ast)]
    return f"({to_source(ast.left)} {op} {to_source(ast.right)})"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _checked(node: ExprAst, value: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(value)):
        raise ExprDomainError(to_source(node), "non-finite result")
    return value


def _eval(node: ExprAst, x: np.ndarray) -> np.ndarray:
    if isinstance(node, Constant):
        return np.float64(node.value)
    if isinstance(node, Variable):
        return x
    if isinstance(node, Add):
        return _checked(node, _eval(node.left, x) + _eval(node.right, x))
    if isinstance(node, Sub):
        return _checked(node, _eval(node.left, x) - _eval(node.right, x))
    if isinstance(node, Mul):
        return _checked(node, _eval(node.left, x) * _eval(node.right, x))
    if isinstance(node, Div):
        num = _eval(node.left, x)
        den = _eval(node.right, x)
        if np.any(den == 0.0):
            raise ExprDomainError(to_source(node), "division by zero")
        return _checked(node, num / den)
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    if isinstance(node, Pow):
        base = _eval(node.base, x)
        e = node.exponent
        if not float(e).is_integer() and np.any(base < 0.0):
            raise ExprDomainError(to_source(node), "negative base with non-integer exponent")
        if e < 0 and np.any(base == 0.0):
            raise ExprDomainError(to_source(node), "zero raised to a negative power")
        return _checked(node, np.power(base, e))
    if isinstance(node, Call):
        arg = _eval(node.arg, x)
        if node.name == "exp":
            return _checked(node, np.exp(arg))
        if node.name == "log":
            if np.any(arg <= 0.0):
                raise ExprDomainError(to_source(node), "log of a nonpositive value")
            return np.log(arg)
        if node.name == "sqrt":
            if np.any(arg < 0.0):
                raise ExprDomainError(to_source(node), "sqrt of a negative value")
            return np.sqrt(arg)
        if node.name == "sin":
            return np.sin(arg)
        if node.name == "cos":
            return np.cos(arg)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(ast: ExprAst, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Evaluate an AST at x (a float or an array, element-wise).

    Raises:
        ExprDomainError: A sub-expression left the real domain
    """
    xv = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(ast, xv)
    if xv.ndim == 0:
        return float(out)
    return np.array(np.broadcast_to(out, xv.shape), dtype=float)


# ---------------------------------------------------------------------------
# Symbolic differentiation
# ---------------------------------------------------------------------------

def _is_const(node: ExprAst, value: Optional[float] = None) -> bool:
    return isinstance(node, Constant) and (value is None or node.value == value)


def _add(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return Constant(a.value + b.value)
    return Add(a, b)


def _neg(a: ExprAst) -> ExprAst:
    if _is_const(a):
        return Constant(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _sub(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    if _is_const(a) and _is_const(b):
        return Constant(a.value - b.value)
    return Sub(a, b)


def _mul(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Constant(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return Constant(a.value * b.value)
    return Mul(a, b)


def _div(a: ExprAst, b: ExprAst) -> ExprAst:
    if _is_const(a, 0.0):
        return Constant(0.0)
    if _is_const(b, 1.0):
        return a
    return Div(a, b)


def _pow(base: ExprAst, exponent: float) -> ExprAst:
    if exponent == 0.0:
        return Constant(1.0)
    if exponent == 1.0:
        return base
    return Pow(base, exponent)


def _derivative(node: ExprAst) -> ExprAst:
    if isinstance(node, Constant):
        return Constant(0.0)
    if isinstance(node, Variable):
        return Constant(1.0)
    if isinstance(node, Add):
        return _add(_derivative(node.left), _derivative(node.right))
    if isinstance(node, Sub):
        return _sub(_derivative(node.left), _derivative(node.right))
    if isinstance(node, Mul):
        return _add(
            _mul(_derivative(node.left), node.right),
            _mul(node.left, _derivative(node.right)),
        )
    if isinstance(node, Div):
        numerator = _sub(
            _mul(_derivative(node.left), node.right),
            _mul(node.left, _derivative(node.right)),
        )
        return _div(numerator, _pow(node.right, 2.0))
    if isinstance(node, Neg):
        return _neg(_derivative(node.operand))
    if isinstance(node, Pow):
        outer = _mul(Constant(node.exponent), _pow(node.base, node.exponent - 1.0))
        return _mul(outer, _derivative(node.base))
    if isinstance(node, Call):
        u = node.arg
        du = _derivative(u)
        if node.name == "exp":
            return _mul(node, du)
        if node.name == "log":
            return _div(du, u)
        if node.name == "sin":
            return _mul(Call("cos", u), du)
        if node.name == "cos":
            return _neg(_mul(Call("sin", u), du))
        if node.name == "sqrt":
            return _div(du, _mul(Constant(2.0), node))
    raise TypeError(f"not an expression node: {node!r}")


def differentiate(ast: ExprAst, k: int = 1) -> ExprAst:
    """k-th symbolic derivative with respect to x; k = 0 returns ast itself."""
    if k < 0:
        raise ValueError(f"derivative order must be >= 0, got {k}")
    for _ in range(k):
        ast = _derivative(ast)
    return ast


# ---------------------------------------------------------------------------
# Function specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class BuiltinPower:
    nu: float


@dataclass(frozen=True, slots=True)
class BuiltinConstant:
    c: float


def _power_form(node: ExprAst) -> Optional[Tuple[float, float]]:
    if isinstance(node, Constant):
        return node.value, 0.0
    if isinstance(node, Variable):
        return 1.0, 1.0
    if isinstance(node, Pow) and isinstance(node.base, Variable):
        return 1.0, node.exponent
    if isinstance(node, Neg):
        inner = _power_form(node.operand)
        return None if inner is None else (-inner[0], inner[1])
    if isinstance(node, Mul):
        for const, other in ((node.left, node.right), (node.right, node.left)):
            if isinstance(const, Constant):
                inner = _power_form(other)
                if inner is not None:
                    return const.value * inner[0], inner[1]
    return None


@dataclass(frozen=True)
class FunctionSpec:
    """
    A real function on (domain_lo, domain_hi]: a parsed expression, a power
    x^nu, or a constant. Instances are callable on floats and numpy arrays.
    """

    source: Union[ExprAst, BuiltinPower, BuiltinConstant]
    domain_lo: float = 0.0
    domain_hi: float = math.inf
    _ast: ExprAst = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.domain_lo < self.domain_hi:
            raise ValueError(f"function domain requires lo < hi, got ({self.domain_lo}, {self.domain_hi})")
        if isinstance(self.source, BuiltinPower):
            tree: ExprAst = Pow(Variable(), float(self.source.nu))
        elif isinstance(self.source, BuiltinConstant):
            tree = Constant(float(self.source.c))
        else:
            tree = self.source
        object.__setattr__(self, "_ast", tree)

    @classmethod
    def parse(cls, src: str, domain_lo: float = 0.0, domain_hi: float = math.inf) -> "FunctionSpec":
        return cls(parse(src), domain_lo, domain_hi)

    @classmethod
    def power(cls, nu: float, domain_lo: float = 0.0, domain_hi: float = math.inf) -> "FunctionSpec":
        return cls(BuiltinPower(nu), domain_lo, domain_hi)

    @classmethod
    def constant(cls, c: float, domain_lo: float = 0.0, domain_hi: float = math.inf) -> "FunctionSpec":
        return cls(BuiltinConstant(c), domain_lo, domain_hi)

    @property
    def ast(self) -> ExprAst:
        return self._ast

    def __call__(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return evaluate(self._ast, x)

    def derivative(self, k: int = 1) -> "FunctionSpec":
        return FunctionSpec(differentiate(self._ast, k), self.domain_lo, self.domain_hi)

    def taylor_residual(self, center: float, order: int) -> "FunctionSpec":
        """
        t -> f(t) - sum_{k < order} f^(k)(center) (t - center)^k / k!

        Raises:
            ExprDomainError: A derivative of f is undefined at center
        """
        poly: ExprAst = Constant(0.0)
        shift = _sub(Variable(), Constant(float(center)))
        for k in range(order):
            coefficient = evaluate(differentiate(self._ast, k), center) / math.factorial(k)
            poly = _add(poly, _mul(Constant(coefficient), _pow(shift, float(k))))
        return FunctionSpec(_sub(self._ast, poly), self.domain_lo, self.domain_hi)

    def power_form(self) -> Optional[Tuple[float, float]]:
        """(c, nu) when the function is exactly c * x^nu, else None."""
        return _power_form(self._ast)

    def __str__(self) -> str:
        return to_source(self._ast)
