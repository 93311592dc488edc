"""Parser and evaluator for closed-form complex seed functions.

The grammar is deliberately tiny: complex literals (``2``, ``0.5i``, the
imaginary-unit keyword ``i``), the variable ``z``, binary ``+ - * /``,
unary ``-``, integer powers ``^``, the calls ``exp`` and ``conj``, and
parentheses.  Precedence is ``^`` over unary ``-`` over ``* /`` over
``+ -``; binary operators associate to the left and ``^`` takes a single
integer exponent.

``conj`` lets non-holomorphic references be written down; seed functions fed
to the transform pipeline are expected to be holomorphic, which is checked
numerically downstream, not here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SeedExpr",
    "ExprSyntaxError",
    "ExprEvalError",
    "parse",
    "evaluate",
    "to_str",
]


class ExprSyntaxError(ValueError):
    """Lexical or grammatical error, carrying the character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


class ExprEvalError(ArithmeticError):
    """Runtime evaluation failure, e.g. division by zero."""


class SeedExpr:
    """Base class for expression-tree nodes; nodes are immutable."""

    __slots__ = ()

    def __call__(self, z):
        return evaluate(self, z)


@dataclass(frozen=True)
class Lit(SeedExpr):
    value: complex


@dataclass(frozen=True)
class Var(SeedExpr):
    pass


@dataclass(frozen=True)
class Add(SeedExpr):
    left: SeedExpr
    right: SeedExpr


@dataclass(frozen=True)
class Sub(SeedExpr):
    left: SeedExpr
    right: SeedExpr


@dataclass(frozen=True)
class Mul(SeedExpr):
    left: SeedExpr
    right: SeedExpr


@dataclass(frozen=True)
class Div(SeedExpr):
    # division nodes are the only source of runtime zero-checks
    left: SeedExpr
    right: SeedExpr


@dataclass(frozen=True)
class Neg(SeedExpr):
    operand: SeedExpr


@dataclass(frozen=True)
class Pow(SeedExpr):
    base: SeedExpr
    power: int


@dataclass(frozen=True)
class Call(SeedExpr):
    name: str
    arg: SeedExpr


_FUNCTIONS = ("exp", "conj")

_NUM_RE = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def _tokenize(src: str):
    tokens = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            m = _NUM_RE.match(src, i)
            value = float(m.group())
            j = m.end()
            is_imag = (
                j < n
                and src[j] == "i"
                and (j + 1 >= n or not (src[j + 1].isalnum() or src[j + 1] == "_"))
            )
            if is_imag:
                tokens.append(("imag", value, i))
                i = j + 1
            else:
                tokens.append(("num", value, i))
                i = j
            continue
        if c.isalpha() or c == "_":
            m = _NAME_RE.match(src, i)
            tokens.append(("name", m.group(), i))
            i = m.end()
            continue
        if c in "+-*/^()":
            tokens.append(("op", c, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("end", None, n))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def _is_op(self, chars) -> bool:
        kind, value, _ = self.peek()
        return kind == "op" and value in chars

    def expression(self) -> SeedExpr:
        node = self.term()
        while self._is_op("+-"):
            _, op, _ = self.take()
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> SeedExpr:
        node = self.unary()
        while self._is_op("*/"):
            _, op, _ = self.take()
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> SeedExpr:
        if self._is_op("-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> SeedExpr:
        base = self.atom()
        if not self._is_op("^"):
            return base
        self.take()
        sign = 1
        if self._is_op("+-"):
            _, op, _ = self.take()
            sign = -1 if op == "-" else 1
        kind, value, pos = self.take()
        if kind != "num" or value != int(value):
            raise ExprSyntaxError("exponent must be an integer literal", pos)
        return Pow(base, sign * int(value))

    def atom(self) -> SeedExpr:
        kind, value, pos = self.take()
        if kind == "num":
            return Lit(complex(value, 0.0))
        if kind == "imag":
            return Lit(complex(0.0, value))
        if kind == "name":
            if value == "z":
                return Var()
            if value == "i":
                return Lit(1j)
            if value in _FUNCTIONS:
                if not self._is_op("("):
                    raise ExprSyntaxError(f"expected '(' after {value!r}", self.peek()[2])
                self.take()
                arg = self.expression()
                if not self._is_op(")"):
                    raise ExprSyntaxError("unbalanced parentheses", self.peek()[2])
                self.take()
                return Call(value, arg)
            raise ExprSyntaxError(f"unknown identifier {value!r}", pos)
        if kind == "op" and value == "(":
            node = self.expression()
            if not self._is_op(")"):
                raise ExprSyntaxError("unbalanced parentheses", self.peek()[2])
            self.take()
            return node
        raise ExprSyntaxError("expected a value", pos)


def parse(src: str) -> SeedExpr:
    """Parse an expression string into a :class:`SeedExpr` tree."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(_tokenize(src))
    node = parser.expression()
    kind, value, pos = parser.peek()
    if kind != "end":
        if kind == "op" and value == ")":
            raise ExprSyntaxError("unbalanced parentheses", pos)
        raise ExprSyntaxError("unexpected trailing input", pos)
    return node


def _has_zero(value) -> bool:
    return bool(np.any(np.asarray(value) == 0))


def evaluate(e: SeedExpr, z):
    """Evaluate a tree at ``z``; ``z`` may be a complex scalar or an ndarray."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        return z
    if isinstance(e, Add):
        return evaluate(e.left, z) + evaluate(e.right, z)
    if isinstance(e, Sub):
        return evaluate(e.left, z) - evaluate(e.right, z)
    if isinstance(e, Mul):
        return evaluate(e.left, z) * evaluate(e.right, z)
    if isinstance(e, Div):
        num = evaluate(e.left, z)
        den = evaluate(e.right, z)
        if _has_zero(den):
            raise ExprEvalError("division by zero")
        return num / den
    if isinstance(e, Neg):
        return -evaluate(e.operand, z)
    if isinstance(e, Pow):
        base = evaluate(e.base, z)
        if e.power < 0 and _has_zero(base):
            raise ExprEvalError("division by zero (negative power of zero)")
        return base ** e.power
    if isinstance(e, Call):
        arg = evaluate(e.arg, z)
        if e.name == "exp":
            return np.exp(arg)
        return np.conjugate(arg)
    raise TypeError(f"not an expression node: {e!r}")


_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt_num(x: float) -> str:
    return repr(float(x))


def _fmt_lit(value: complex) -> str:
    if value.imag == 0:
        return _fmt_num(value.real)
    if value.real == 0:
        if value.imag == 1:
            return "i"
        return _fmt_num(value.imag) + "i"
    # mixed literals never come out of the parser; render as a sum
    return f"({_fmt_num(value.real)}+{_fmt_num(value.imag)}i)"


def _fmt(e: SeedExpr, ctx: int) -> tuple[str, int]:
    if isinstance(e, Lit):
        s, prec = _fmt_lit(e.value), _PREC_ATOM
    elif isinstance(e, Var):
        s, prec = "z", _PREC_ATOM
    elif isinstance(e, Add):
        s = f"{_wrap(e.left, _PREC_ADD)} + {_wrap(e.right, _PREC_ADD + 1)}"
        prec = _PREC_ADD
    elif isinstance(e, Sub):
        s = f"{_wrap(e.left, _PREC_ADD)} - {_wrap(e.right, _PREC_ADD + 1)}"
        prec = _PREC_ADD
    elif isinstance(e, Mul):
        s = f"{_wrap(e.left, _PREC_MUL)}*{_wrap(e.right, _PREC_MUL + 1)}"
        prec = _PREC_MUL
    elif isinstance(e, Div):
        s = f"{_wrap(e.left, _PREC_MUL)}/{_wrap(e.right, _PREC_MUL + 1)}"
        prec = _PREC_MUL
    elif isinstance(e, Neg):
        s = "-" + _wrap(e.operand, _PREC_UNARY)
        prec = _PREC_UNARY
    elif isinstance(e, Pow):
        s = f"{_wrap(e.base, _PREC_ATOM)}^{e.power}"
        prec = _PREC_POW
    elif isinstance(e, Call):
        s = f"{e.name}({to_str(e.arg)})"
        prec = _PREC_ATOM
    else:
        raise TypeError(f"not an expression node: {e!r}")
    return s, prec


def _wrap(e: SeedExpr, ctx: int) -> str:
    s, prec = _fmt(e, ctx)
    if prec < ctx:
        return f"({s})"
    return s


def to_str(e: SeedExpr) -> str:
    """Canonical printed form; re-parsing it reproduces the tree."""
    return _fmt(e, 0)[0]
