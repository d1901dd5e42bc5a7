"""Tiny expression language for entering test functions on [0,1].

Grammar (recursive descent, '^' right-associative, unary minus binds
tighter than a '^' base)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' factor)?
    unary  := '-'? atom
    atom   := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
    func   := sin | cos | exp | log | sqrt | abs

Construction validates that the expression evaluates to finite real values
on a probe grid over [0,1]; failures carry the source offset of the
offending operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationDomainError, ParseError

__all__ = ["FunctionExpr", "parse_expr"]

_FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")
_CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float
    pos: int


@dataclass(frozen=True)
class Var:
    pos: int


@dataclass(frozen=True)
class Const:
    name: str
    pos: int


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object
    pos: int


@dataclass(frozen=True)
class Neg:
    operand: object
    pos: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int


class _Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.source) and self.source[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.source[self.pos] if self.pos < len(self.source) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch


class _Parser:
    def __init__(self, source: str):
        self.tk = _Tokenizer(source)
        self.source = source

    def parse(self):
        node = self.expr()
        self.tk.skip_ws()
        if self.tk.pos != len(self.source):
            raise ParseError(
                f"unexpected character {self.source[self.tk.pos]!r}", self.tk.pos
            )
        return node

    def expr(self):
        node = self.term()
        while self.tk.peek() in "+-":
            pos = self.tk.pos
            op = self.tk.take()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self):
        node = self.factor()
        while self.tk.peek() in "*/":
            pos = self.tk.pos
            op = self.tk.take()
            node = BinOp(op, node, self.factor(), pos)
        return node

    def factor(self):
        node = self.unary()
        if self.tk.peek() == "^":
            pos = self.tk.pos
            self.tk.take()
            node = BinOp("^", node, self.factor(), pos)  # right associative
        return node

    def unary(self):
        if self.tk.peek() == "-":
            pos = self.tk.pos
            self.tk.take()
            return Neg(self.atom(), pos)
        return self.atom()

    def atom(self):
        ch = self.tk.peek()
        pos = self.tk.pos
        if ch == "":
            raise ParseError("unexpected end of input", pos)
        if ch == "(":
            self.tk.take()
            node = self.expr()
            if self.tk.peek() != ")":
                raise ParseError("expected ')'", self.tk.pos)
            self.tk.take()
            return node
        if ch.isdigit() or ch == ".":
            return self.number()
        if ch.isalpha():
            return self.identifier()
        raise ParseError(f"unexpected character {ch!r}", pos)

    def number(self):
        src = self.source
        start = self.tk.pos
        i = start
        while i < len(src) and (src[i].isdigit() or src[i] == "."):
            i += 1
        if i < len(src) and src[i] in "eE":
            j = i + 1
            if j < len(src) and src[j] in "+-":
                j += 1
            if j < len(src) and src[j].isdigit():
                while j < len(src) and src[j].isdigit():
                    j += 1
                i = j
        text = src[start:i]
        try:
            value = float(text)
        except ValueError:
            raise ParseError(f"bad number {text!r}", start) from None
        self.tk.pos = i
        return Num(value, start)

    def identifier(self):
        src = self.source
        start = self.tk.pos
        i = start
        while i < len(src) and (src[i].isalnum() or src[i] == "_"):
            i += 1
        name = src[start:i]
        self.tk.pos = i
        if name == "x":
            return Var(start)
        if name in _CONSTANTS:
            return Const(name, start)
        if name in _FUNCTIONS:
            if self.tk.peek() != "(":
                raise ParseError(
                    f"function {name!r} needs a parenthesised argument", start
                )
            self.tk.take()
            arg = self.expr()
            if self.tk.peek() == ",":
                raise ParseError(
                    f"function {name!r} takes exactly one argument", self.tk.pos
                )
            if self.tk.peek() != ")":
                raise ParseError("expected ')'", self.tk.pos)
            self.tk.take()
            return Call(name, arg, start)
        raise ParseError(f"unknown identifier {name!r}", start)


def _evaluate(node, x):
    if isinstance(node, Num):
        return np.full_like(x, node.value) if np.ndim(x) else node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        c = _CONSTANTS[node.name]
        return np.full_like(x, c) if np.ndim(x) else c
    if isinstance(node, Neg):
        return -_evaluate(node.operand, x)
    if isinstance(node, Call):
        arg = _evaluate(node.arg, x)
        if node.fn == "log":
            if np.any(np.asarray(arg) <= 0.0):
                raise EvaluationDomainError(
                    "log of non-positive value", offset=node.pos
                )
            return np.log(arg)
        if node.fn == "sqrt":
            if np.any(np.asarray(arg) < 0.0):
                raise EvaluationDomainError(
                    "sqrt of negative value", offset=node.pos
                )
            return np.sqrt(arg)
        return getattr(np, node.fn)(arg)
    if isinstance(node, BinOp):
        left = _evaluate(node.left, x)
        right = _evaluate(node.right, x)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if np.any(np.asarray(right) == 0.0):
                raise EvaluationDomainError("division by zero", offset=node.pos)
            return left / right
        with np.errstate(invalid="raise", over="raise"):
            try:
                return left**right
            except FloatingPointError:
                raise EvaluationDomainError(
                    "power left the real domain", offset=node.pos
                ) from None
    raise TypeError(f"unknown node {node!r}")


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _pretty(node, parent_prec=0, right_side=False):
    if isinstance(node, Num):
        return repr(node.value) if node.value != int(node.value) else str(int(node.value))
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({_pretty(node.arg)})"
    if isinstance(node, Neg):
        inner = _pretty(node.operand, parent_prec=4)
        text = f"-{inner}"
        # unary minus binds tighter than a '^' base but looser than nothing
        return f"({text})" if parent_prec > 3 else text
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        left = _pretty(node.left, prec, right_side=False)
        # '-' and '/' are left-associative; '^' is right-associative
        rprec = prec if node.op == "^" else prec + (node.op in "-/")
        right = _pretty(node.right, rprec, right_side=True)
        if node.op == "^" and isinstance(node.left, (BinOp, Neg)):
            left = f"({left})"
        text = f"{left}{node.op}{right}"
        needs = prec < parent_prec or (prec == parent_prec and right_side)
        return f"({text})" if needs else text
    raise TypeError(f"unknown node {node!r}")


@dataclass(frozen=True)
class FunctionExpr:
    """Parsed expression, callable on scalars and arrays."""

    source: str
    ast: object

    def __call__(self, x):
        return _evaluate(self.ast, x)

    def pretty(self) -> str:
        """Canonical rendering; parsing it back yields the same tree."""
        return _pretty(self.ast)


def parse_expr(source: str) -> FunctionExpr:
    """Parse and validate an expression of ``x`` over [0,1].

    The expression must evaluate to finite real values on [0,1]; a probe
    over 257 points raises a position-annotated error otherwise (sampling
    re-checks the exact nodes later).
    """
    ast = _Parser(source).parse()
    expr = FunctionExpr(source=source, ast=ast)
    probe = np.linspace(0.0, 1.0, 257)
    values = np.asarray(expr(probe), dtype=float)
    if not np.all(np.isfinite(values)):
        j = int(np.flatnonzero(~np.isfinite(values))[0])
        raise EvaluationDomainError(
            f"expression is non-finite at x={probe[j]}", offset=0
        )
    return expr
