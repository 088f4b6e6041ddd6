"""Small expression language for coefficients, initial data and sources.

Expressions are immutable trees over real literals, the variables
``x1..xn``, ``y1..ym`` and ``t``, the binary operators ``+ - * /``, unary
minus, integer powers (``e^3`` or ``pow(e, 3)``) and the functions
``sqrt``, ``exp``, ``sin``, ``cos``.  Differentiation is symbolic, so
derivatives used as oracles never depend on finite differences.

Precedence (high to low): ``^``, unary ``-``, ``* /``, ``+ -``.  Binary
operators are left-associative.

>>> e = parse("x1*(1 - x1)", n=1)
>>> evaluate(e, {"x1": 0.25})
0.1875
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Pow", "Func",
    "ExprError", "ExprSyntaxError", "UnknownIdentifier", "VariableOutOfRange",
    "EvaluationError",
    "parse", "evaluate", "differentiate", "to_string", "variables",
    "is_constant", "constant_value", "substitute", "degree",
]

FUNCTIONS = ("sqrt", "exp", "sin", "cos")


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifier(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} (at offset {offset})")
        self.name = name
        self.offset = offset


class VariableOutOfRange(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"variable {name!r} out of range (at offset {offset})")
        self.name = name
        self.offset = offset


class EvaluationError(ExprError, ArithmeticError):
    pass


# --------------------------------------------------------------------------
# tree
# --------------------------------------------------------------------------

class Expr:
    """Base class of expression nodes."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k: int):
        return power(self, k)

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True, eq=True, repr=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True, repr=True)
class Var(Expr):
    name: str  # "x1", "y2", "t"


@dataclass(frozen=True, eq=True, repr=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True, repr=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True, repr=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, eq=True, repr=True)
class Func(Expr):
    name: str
    arg: Expr


Number = Union[int, float]
ZERO = Num(0.0)
ONE = Num(1.0)


def _lift(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, float, np.floating, np.integer)):
        return Num(float(v))
    raise TypeError(f"cannot use {type(v).__name__} in an expression")


# Smart constructors.  They fold literals and drop neutral elements so that
# repeated differentiation does not blow the tree up; no further
# simplification is attempted.

def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if b == ZERO:
        return a
    if a == ZERO:
        return neg(b)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    if a == ZERO and not (isinstance(b, Num) and b.value == 0.0):
        return ZERO
    if b == ONE:
        return a
    return BinOp("/", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: Expr, k: int) -> Expr:
    if int(k) != k or k < 0:
        raise ExprError(f"exponent must be a nonnegative integer, got {k}")
    k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return a
    if isinstance(a, Num):
        return Num(a.value ** k)
    return Pow(a, k)


def func(name: str, a: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function {name!r}")
    return Func(name, a)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        mo = _TOKEN.match(text, pos)
        if mo is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = mo.lastgroup
        if kind != "ws":
            value = mo.group()
            if kind == "op" and value == "**":
                value = "^"
            tokens.append((kind, value, pos))
        pos = mo.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n: int, m: int, allow_t: bool):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n, self.m, self.allow_t = n, m, allow_t

    @property
    def tok(self):
        return self.tokens[self.i]

    def accept(self, value: str) -> bool:
        if self.tok[0] == "op" and self.tok[1] == value:
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.accept(value):
            kind, got, pos = self.tok
            raise ExprSyntaxError(f"expected {value!r}, got {got or 'end of input'!r}", pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, got, pos = self.tok
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {got!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.tok[1]
            self.i += 1
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.i += 1
            return Pow(base, self.integer_exponent())
        return base

    def integer_exponent(self) -> int:
        kind, value, pos = self.tok
        wrapped = False
        if kind == "op" and value == "(":
            wrapped = True
            self.i += 1
            kind, value, pos = self.tok
        if kind != "num":
            raise ExprSyntaxError("exponent must be a nonnegative integer literal", pos)
        v = float(value)
        if v != int(v):
            raise ExprSyntaxError("exponent must be a nonnegative integer literal", pos)
        self.i += 1
        if wrapped:
            self.expect(")")
        return int(v)

    def atom(self) -> Expr:
        kind, value, pos = self.tok
        if kind == "num":
            self.i += 1
            return Num(float(value))
        if kind == "ident":
            self.i += 1
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(value, arg)
            if value == "pow":
                self.expect("(")
                base = self.expr()
                self.expect(",")
                k = self.integer_exponent()
                self.expect(")")
                return Pow(base, k)
            return self.variable(value, pos)
        if kind == "op" and value == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        raise ExprSyntaxError(f"unexpected token {value or 'end of input'!r}", pos)

    def variable(self, name: str, pos: int) -> Var:
        if name == "t":
            if not self.allow_t:
                raise UnknownIdentifier(name, pos)
            return Var("t")
        mo = re.fullmatch(r"([xy])([1-9]\d*)", name)
        if mo is None:
            raise UnknownIdentifier(name, pos)
        idx = int(mo.group(2))
        limit = self.n if mo.group(1) == "x" else self.m
        if idx > limit:
            raise VariableOutOfRange(name, pos)
        return Var(name)


def parse(text: str, n: int = 3, m: int = 3, allow_t: bool = True) -> Expr:
    """Parse ``text`` into an expression over ``x1..xn``, ``y1..ym`` (and ``t``)."""
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, n, m, allow_t).parse()


# --------------------------------------------------------------------------
# printing
# --------------------------------------------------------------------------

def to_string(e: Expr) -> str:
    """Fully parenthesised text form; ``parse(to_string(e)) == e``."""
    if isinstance(e, Num):
        if e.value < 0 or math.copysign(1.0, e.value) < 0:
            return f"(-{repr(-e.value)})"
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_string(e.arg)})"
    if isinstance(e, BinOp):
        return f"({to_string(e.left)} {e.op} {to_string(e.right)})"
    if isinstance(e, Pow):
        return f"({to_string(e.base)}^{e.exponent})"
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    raise TypeError(e)


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def evaluate(e: Expr, env: Mapping[str, object]):
    """Evaluate ``e`` with variable values from ``env`` (scalars or arrays).

    Raises :class:`EvaluationError` on division by zero or the square root
    of a negative number anywhere in the evaluation domain.
    """
    with np.errstate(all="ignore"):
        out = _eval(e, env)
    if np.ndim(out) == 0:
        return float(out)
    return out


def _eval(e: Expr, env):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvaluationError(f"no value supplied for {e.name}") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, BinOp):
        a = _eval(e.left, env)
        b = _eval(e.right, env)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if np.any(np.asarray(b) == 0):
            raise EvaluationError("division by zero")
        return np.true_divide(a, b) if np.ndim(b) or np.ndim(a) else a / b
    if isinstance(e, Pow):
        a = _eval(e.base, env)
        return a ** e.exponent
    if isinstance(e, Func):
        a = _eval(e.arg, env)
        if e.name == "sqrt":
            if np.any(np.asarray(a) < 0):
                raise EvaluationError("square root of a negative value")
            return np.sqrt(a)
        if e.name == "exp":
            return np.exp(a)
        if e.name == "sin":
            return np.sin(a)
        return np.cos(a)
    raise TypeError(e)


# --------------------------------------------------------------------------
# calculus and inspection
# --------------------------------------------------------------------------

def differentiate(e: Expr, v: str) -> Expr:
    """Exact derivative of ``e`` with respect to the variable named ``v``."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == v else ZERO
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, v))
    if isinstance(e, BinOp):
        a, b = e.left, e.right
        da, db = differentiate(a, v), differentiate(b, v)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, b), mul(a, db))
        # quotient rule
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    if isinstance(e, Pow):
        k = e.exponent
        return mul(mul(Num(float(k)), power(e.base, k - 1)), differentiate(e.base, v))
    if isinstance(e, Func):
        du = differentiate(e.arg, v)
        if du == ZERO:
            return ZERO
        if e.name == "sqrt":
            return div(du, mul(Num(2.0), e))
        if e.name == "exp":
            return mul(e, du)
        if e.name == "sin":
            return mul(Func("cos", e.arg), du)
        return neg(mul(Func("sin", e.arg), du))
    raise TypeError(e)


def variables(e: Expr) -> set[str]:
    if isinstance(e, Num):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Neg, Func)):
        return variables(e.arg)
    if isinstance(e, Pow):
        return variables(e.base)
    return variables(e.left) | variables(e.right)


def is_constant(e: Expr) -> bool:
    return not variables(e)


def constant_value(e: Expr) -> float:
    if not is_constant(e):
        raise ExprError(f"expression {to_string(e)} is not constant")
    return float(evaluate(e, {}))


def substitute(e: Expr, values: Mapping[str, float]) -> Expr:
    """Replace the named variables by literals (no other rewriting)."""
    if isinstance(e, Num):
        return e
    if isinstance(e, Var):
        return Num(float(values[e.name])) if e.name in values else e
    if isinstance(e, Neg):
        return neg(substitute(e.arg, values))
    if isinstance(e, BinOp):
        a, b = substitute(e.left, values), substitute(e.right, values)
        return {"+": add, "-": sub, "*": mul, "/": div}[e.op](a, b)
    if isinstance(e, Pow):
        return power(substitute(e.base, values), e.exponent)
    if isinstance(e, Func):
        a = substitute(e.arg, values)
        if isinstance(a, Num):
            return Num(float(evaluate(Func(e.name, a), {})))
        return Func(e.name, a)
    raise TypeError(e)


def degree(e: Expr, names=None) -> int | None:
    """Total polynomial degree in ``names`` (all variables by default).

    Returns None when ``e`` is not a polynomial in those variables.
    """
    if names is not None and not (variables(e) & set(names)):
        return 0
    if isinstance(e, Num):
        return 0
    if isinstance(e, Var):
        return 1 if names is None or e.name in names else 0
    if isinstance(e, Neg):
        return degree(e.arg, names)
    if isinstance(e, Pow):
        d = degree(e.base, names)
        return None if d is None else d * e.exponent
    if isinstance(e, BinOp):
        da, db = degree(e.left, names), degree(e.right, names)
        if da is None or db is None:
            return None
        if e.op in "+-":
            return max(da, db)
        if e.op == "*":
            return da + db
        return da if db == 0 else None
    return None
