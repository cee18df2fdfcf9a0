"""A small real-valued expression language for curves and densities.

Grammar (highest binding first)::

    primary  := number | name | func '(' sum ')' | '(' sum ')'
    power    := primary ('^' unary)?          right associative
    unary    := '-' unary | power
    product  := unary (('*' | '/') unary)*
    sum      := product (('+' | '-') product)*

So ``-2^2`` is ``-(2^2)`` and ``2^-1`` is accepted. Functions are ln, exp,
sqrt, sin, cos and abs; the constants pi and e are predefined. Expressions
have a single free variable whose name is chosen at parse time (``y`` for
curves, ``t`` for rate functions).

Evaluation comes in two flavours. Python floats go through a compiled
closure built on :mod:`math`, which is fast enough for use inside scalar
optimizers. Arrays go through numpy; with ``strict=False`` points outside the
real domain become NaN instead of raising.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, ExprSyntaxError

FUNCTIONS = ("abs", "cos", "exp", "ln", "sin", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}


class Expr:
    """Base node. Subclasses are frozen dataclasses."""

    __slots__ = ()
    prec = 5

    def __str__(self) -> str:
        return to_text(self)

    def eval(self, y, *, strict: bool = True):
        return evaluate(self, y, strict=strict)

    def __call__(self, y, *, strict: bool = True):
        return evaluate(self, y, strict=strict)


@dataclass(frozen=True)
class Num(Expr):
    value: float

    @property
    def prec(self):  # a negative literal prints like a negation
        return 3 if math.copysign(1.0, self.value) < 0 else 5


@dataclass(frozen=True)
class Const(Expr):
    name: str


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr
    prec = 3


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr
    prec = 1
    op = "+"


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr
    prec = 1
    op = "-"


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr
    prec = 2
    op = "*"


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr
    prec = 2
    op = "/"


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr
    prec = 4


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div}


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)

_PRIMARY_START = ("'('", "'-'", "constant", "function", "number", "variable")


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    pos: int  # character index


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[i]!r}", _byte_offset(text, i), _PRIMARY_START)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), i))
        i = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, variables: tuple[str, ...]):
        self.text = text
        self.variables = variables
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message: str, expected) -> ExprSyntaxError:
        return ExprSyntaxError(message, _byte_offset(self.text, self.tok.pos), tuple(sorted(expected)))

    def describe(self, tok: _Tok) -> str:
        return "end of input" if tok.kind == "end" else repr(tok.text)

    def expect(self, text: str) -> None:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return
        raise self.fail(f"unexpected {self.describe(self.tok)}", (repr(text),))

    def parse(self) -> Expr:
        node = self.sum()
        if self.tok.kind != "end":
            exp = ["'*'", "'+'", "'-'", "'/'", "'^'", "end of input"]
            raise self.fail(f"unexpected {self.describe(self.tok)}", exp)
        return node

    def sum(self) -> Expr:
        node = self.product()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = _BINARY[op](node, self.product())
        return node

    def product(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = _BINARY[op](node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            return Pow(base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.sum()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in self.variables:
                return Var(tok.text)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            self.i -= 1
            names = list(FUNCTIONS) + list(CONSTANTS) + list(self.variables)
            raise self.fail(f"unknown name {tok.text!r}", [repr(n) for n in names])
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            node = self.sum()
            self.expect(")")
            return node
        raise self.fail(f"unexpected {self.describe(tok)}", _PRIMARY_START)


def parse(text: str, variables: tuple[str, ...] | str = ("y",)) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ExprSyntaxError` carrying the byte offset of the first
    offending token and the set of tokens that would have been accepted.
    """
    if isinstance(variables, str):
        variables = (variables,)
    return _Parser(text, tuple(variables)).parse()


# ------------------------------------------------------------------ printing

def _fmt_num(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot print non-finite literal {x!r}")
    return repr(float(x))


def to_text(node: Expr) -> str:
    """Render ``node`` with the minimum parentheses; ``parse`` inverts it."""

    def wrap(child: Expr, min_prec: int) -> str:
        s = to_text(child)
        return f"({s})" if child.prec < min_prec else s

    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return "-" + wrap(node.arg, 3)
    if isinstance(node, (Add, Sub)):
        return f"{wrap(node.left, 1)} {node.op} {wrap(node.right, 2)}"
    if isinstance(node, (Mul, Div)):
        return f"{wrap(node.left, 2)}{node.op}{wrap(node.right, 3)}"
    if isinstance(node, Pow):
        return f"{wrap(node.base, 5)}^{wrap(node.exponent, 3)}"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def free_variables(node: Expr) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    out: set[str] = set()
    for child in _children(node):
        out |= free_variables(child)
    return out


def _children(node: Expr) -> tuple[Expr, ...]:
    if isinstance(node, (Add, Sub, Mul, Div)):
        return (node.left, node.right)
    if isinstance(node, Pow):
        return (node.base, node.exponent)
    if isinstance(node, (Neg, Call)):
        return (node.arg,)
    return ()


# ---------------------------------------------------------- scalar evaluation

def _s_ln(x):
    if not x > 0:
        raise DomainError(f"ln of non-positive value {x!r}")
    return math.log(x)


def _s_sqrt(x):
    if x < 0:
        raise DomainError(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


def _s_exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _s_trig(f):
    def g(x):
        if math.isinf(x):
            raise DomainError(f"{f.__name__} of infinite value")
        return f(x)

    return g


_SCALAR_FUNCS = {
    "ln": _s_ln,
    "exp": _s_exp,
    "sqrt": _s_sqrt,
    "sin": _s_trig(math.sin),
    "cos": _s_trig(math.cos),
    "abs": abs,
}


def _s_div(a, b):
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def _s_pow(a, b):
    if a == 0 and b < 0:
        raise DomainError("zero raised to a negative power")
    if a < 0 and not float(b).is_integer():
        raise DomainError(f"negative base {a!r} with non-integer exponent {b!r}")
    try:
        return math.pow(a, b)
    except OverflowError:
        odd = a < 0 and float(b).is_integer() and int(b) % 2 == 1
        return -math.inf if odd else math.inf


def _s_nan_check(f):
    def g(y):
        out = f(y)
        if out != out and y == y:
            raise DomainError("expression undefined at this point")
        return out

    return g


def compile_scalar(node: Expr) -> Callable[[float], float]:
    """Return a closure evaluating ``node`` on a Python float."""
    if isinstance(node, Num):
        v = float(node.value)
        return lambda y: v
    if isinstance(node, Const):
        v = CONSTANTS[node.name]
        return lambda y: v
    if isinstance(node, Var):
        return lambda y: y
    if isinstance(node, Neg):
        f = compile_scalar(node.arg)
        return lambda y: -f(y)
    if isinstance(node, Call):
        f = compile_scalar(node.arg)
        g = _SCALAR_FUNCS[node.func]
        return lambda y: g(f(y))
    if isinstance(node, (Add, Sub, Mul, Div, Pow)):
        l, r = (compile_scalar(c) for c in _children(node))
        if isinstance(node, Add):
            return _s_nan_check(lambda y: l(y) + r(y))
        if isinstance(node, Sub):
            return _s_nan_check(lambda y: l(y) - r(y))
        if isinstance(node, Mul):
            return _s_nan_check(lambda y: l(y) * r(y))
        if isinstance(node, Div):
            return _s_nan_check(lambda y: _s_div(l(y), r(y)))
        return lambda y: _s_pow(l(y), r(y))
    raise TypeError(f"not an expression node: {node!r}")


_COMPILED: dict[Expr, Callable[[float], float]] = {}


def _compiled(node: Expr) -> Callable[[float], float]:
    f = _COMPILED.get(node)
    if f is None:
        f = compile_scalar(node)
        if len(_COMPILED) < 4096:
            _COMPILED[node] = f
    return f


# ----------------------------------------------------------- array evaluation

def _bad(mask, strict: bool, message: str):
    if strict and np.any(mask):
        raise DomainError(message)


def _arr(node: Expr, y: np.ndarray, strict: bool) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(y.shape, float(node.value))
    if isinstance(node, Const):
        return np.full(y.shape, CONSTANTS[node.name])
    if isinstance(node, Var):
        return y
    if isinstance(node, Neg):
        return -_arr(node.arg, y, strict)
    if isinstance(node, Call):
        x = _arr(node.arg, y, strict)
        if node.func == "ln":
            bad = x <= 0
            _bad(bad, strict, "ln of non-positive value")
            return np.where(bad, np.nan, np.log(np.where(bad, 1.0, x)))
        if node.func == "sqrt":
            bad = x < 0
            _bad(bad, strict, "sqrt of negative value")
            return np.where(bad, np.nan, np.sqrt(np.where(bad, 0.0, x)))
        if node.func in ("sin", "cos"):
            bad = np.isinf(x)
            _bad(bad, strict, f"{node.func} of infinite value")
            return getattr(np, node.func)(np.where(bad, np.nan, x))
        return np.exp(x) if node.func == "exp" else np.abs(x)
    a = _arr(_children(node)[0], y, strict)
    b = _arr(_children(node)[1], y, strict)
    if isinstance(node, Add):
        return a + b
    if isinstance(node, Sub):
        return a - b
    if isinstance(node, Mul):
        return a * b
    if isinstance(node, Div):
        bad = b == 0
        _bad(bad, strict, "division by zero")
        return np.where(bad, np.nan, a / np.where(bad, 1.0, b))
    # Pow
    integral = np.isfinite(b) & (np.floor(b) == b)
    bad = ((a == 0) & (b < 0)) | ((a < 0) & ~integral)
    _bad(bad, strict, "power outside the real domain")
    return np.where(bad, np.nan, np.power(np.where(bad, 1.0, a), np.where(bad, 1.0, b)))


def evaluate(node: Expr, y, *, strict: bool = True):
    """Evaluate ``node`` at ``y`` (float or array-like).

    With ``strict=True`` any point outside the real domain raises
    :class:`DomainError`. With ``strict=False`` such points yield NaN and
    only array inputs are accepted.
    """
    if isinstance(y, (float, int)) and not isinstance(y, bool):
        if strict:
            try:
                return float(_compiled(node)(float(y)))
            except (ValueError, ZeroDivisionError) as exc:  # math domain fallbacks
                if isinstance(exc, DomainError):
                    raise
                raise DomainError(str(exc)) from None
        y = np.asarray(float(y))
    arr = np.asarray(y, dtype=float)
    with np.errstate(all="ignore"):
        out = _arr(node, arr, strict)
        out = np.broadcast_to(out, arr.shape).astype(float, copy=True)
    if strict:
        fresh = np.isnan(out) & ~np.isnan(arr)
        if np.any(fresh):
            raise DomainError("expression undefined at some points")
    if out.ndim == 0:
        return float(out)
    return out
