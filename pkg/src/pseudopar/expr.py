"""Scalar arithmetic expressions in ``x`` and ``y``.

Grammar (highest binding last)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

``-x^2`` parses as ``-(x^2)``. Recognised functions are ``sin``, ``cos``,
``exp``, ``sqrt``, ``abs`` and ``step`` (0 for a negative argument, 1
otherwise). ``pi`` is the only named constant.

Nodes evaluate on floats or on numpy arrays of matching shape, so the same
tree samples a coefficient over a whole grid in one call.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExprSyntaxError",
    "ExprDomainError",
    "parse",
    "evaluate",
    "FUNCTIONS",
]


class ExprSyntaxError(ValueError):
    """Malformed expression text. ``offset`` is the 0-based character index."""

    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at offset {offset} in {text!r}")
        self.text = text
        self.offset = offset


class ExprDomainError(ArithmeticError):
    """Evaluation left the domain of an operation (division by zero, sqrt < 0)."""

    def __init__(self, message: str, subexpr: "Expr"):
        super().__init__(f"{message} in subexpression {subexpr}")
        self.subexpr = subexpr


def _step(v):
    return np.where(np.asarray(v) >= 0, 1.0, 0.0) if np.ndim(v) else (1.0 if v >= 0 else 0.0)


FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "step": _step,
}

CONSTANTS = {"pi": math.pi}
VARIABLES = ("x", "y")


class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    def __call__(self, x=0.0, y=0.0):
        return self.evaluate(x, y)

    def evaluate(self, x, y):
        raise NotImplementedError

    def variables(self) -> frozenset[str]:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def evaluate(self, x, y):
        if np.ndim(x) or np.ndim(y):
            return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, self.value)
        return self.value

    def variables(self):
        return frozenset()

    def __str__(self):
        return repr(float(self.value)) if self.value >= 0 else f"({self.value!r})"


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def evaluate(self, x, y):
        v = x if self.name == "x" else y
        if np.ndim(x) or np.ndim(y):
            return np.broadcast_to(np.asarray(v, dtype=float), np.broadcast(np.asarray(x), np.asarray(y)).shape).copy()
        return float(v)

    def variables(self):
        return frozenset([self.name])

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr

    def evaluate(self, x, y):
        return -self.operand.evaluate(x, y)

    def variables(self):
        return self.operand.variables()

    def __str__(self):
        return f"(-{self.operand})"


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, x, y):
        a = self.left.evaluate(x, y)
        b = self.right.evaluate(x, y)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if np.any(np.asarray(b) == 0):
                raise ExprDomainError("division by zero", self)
            return a / b
        # '^'
        if isinstance(self.right, Num):
            b = self.right.value
        a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        if np.any((a_arr == 0) & (b_arr < 0)):
            raise ExprDomainError("division by zero (zero to a negative power)", self)
        if np.any((a_arr < 0) & (b_arr != np.round(b_arr))):
            raise ExprDomainError("negative base with non-integer exponent", self)
        if b_arr.ndim == 0 and float(b_arr).is_integer() and abs(b_arr) <= 64:
            # repeated squaring: same rounding for scalar and array operands
            k = int(abs(b_arr))
            out, base = np.ones_like(a_arr), a_arr
            while k:
                if k & 1:
                    out = out * base
                base = base * base
                k >>= 1
            if b_arr < 0:
                out = 1.0 / out
        else:
            out = np.power(a_arr, b_arr)
        return out if np.ndim(out) else float(out)

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def evaluate(self, x, y):
        v = self.arg.evaluate(x, y)
        if self.func == "sqrt" and np.any(np.asarray(v) < 0):
            raise ExprDomainError("sqrt of negative value", self)
        out = FUNCTIONS[self.func](v)
        return out if np.ndim(out) else float(out)

    def variables(self):
        return self.arg.variables()

    def __str__(self):
        return f"{self.func}({self.arg})"


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    # Unicode minus and multiplication signs show up in pasted formulas.
    text = text.replace("−", "-").replace("×", "*").replace("·", "*")
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", text, start)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, val, off = self.tok
        if val != value or kind != "op":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", self.text, off)
        self.advance()

    def error_here(self, what: str):
        kind, val, off = self.tok
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"expected {what}, found {found}", self.text, off)

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok[0] != "end":
            self.error_here("operator or end of input")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        if self.tok[0] == "op" and self.tok[1] == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, val, off = self.tok
        if kind == "num":
            self.advance()
            return Num(float(val))
        if kind == "name":
            self.advance()
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in VARIABLES:
                return Var(val)
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            raise ExprSyntaxError(f"unknown identifier {val!r}", self.text, off)
        if kind == "op" and val == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.error_here("number, variable, function or '('")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises:
        ExprSyntaxError: malformed input or unknown identifier, with the
            character offset of the problem.
    """
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", str(text), 0)
    return _Parser(text).parse()


def evaluate(e: Expr | str, x=0.0, y=0.0):
    """Evaluate ``e`` (tree or text) at ``(x, y)``; arrays broadcast."""
    if isinstance(e, str):
        e = parse(e)
    return e.evaluate(x, y)
