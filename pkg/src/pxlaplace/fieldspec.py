"""Tiny arithmetic expression language for exponent and weight fields.

Expressions are functions of the spatial coordinates ``x`` and ``y``::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative
    atom   := number | 'x' | 'y' | func '(' expr [',' expr] ')' | '(' expr ')'

Supported functions are ``exp, log, abs, sqrt, sin, cos`` (unary) and
``min, max`` (binary).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

__all__ = [
    "FieldSpecError",
    "FieldSyntaxError",
    "UnknownIdentifierError",
    "ArityError",
    "FieldDomainError",
    "Num",
    "Coord",
    "Neg",
    "BinOp",
    "Call",
    "FieldExpr",
    "parse",
    "evaluate",
    "constant",
]

COORDINATES = {"x": 0, "y": 1}
UNARY_FUNCTIONS = ("exp", "log", "abs", "sqrt", "sin", "cos")
BINARY_FUNCTIONS = ("min", "max")


class FieldSpecError(ValueError):
    """Base class for expression errors."""


class FieldSyntaxError(FieldSpecError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(FieldSpecError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class ArityError(FieldSpecError):
    def __init__(self, name: str, expected: int, got: int, offset: int):
        super().__init__(
            f"{name}() takes {expected} argument(s), got {got} at offset {offset}"
        )
        self.name = name
        self.offset = offset


class FieldDomainError(FieldSpecError, ArithmeticError):
    """Raised when a sub-expression is undefined at the evaluation point."""

    def __init__(self, message: str, node: "Node", point=None):
        where = "" if point is None else f" at point {tuple(point)}"
        super().__init__(f"{message} in {node.to_text()!s}{where}")
        self.node = node
        self.point = point


# ---------------------------------------------------------------------------
# Tree nodes


@dataclass(frozen=True)
class Num:
    value: float

    def to_text(self) -> str:
        text = repr(float(self.value))
        return f"({text})" if self.value < 0 else text


@dataclass(frozen=True)
class Coord:
    name: str

    @property
    def axis(self) -> int:
        return COORDINATES[self.name]

    def to_text(self) -> str:
        return self.name


@dataclass(frozen=True)
class Neg:
    operand: "Node"

    def to_text(self) -> str:
        return f"(-{self.operand.to_text()})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def to_text(self) -> str:
        return f"({self.left.to_text()} {self.op} {self.right.to_text()})"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple

    def to_text(self) -> str:
        return f"{self.name}({', '.join(a.to_text() for a in self.args)})"


Node = Union[Num, Coord, Neg, BinOp, Call]


# ---------------------------------------------------------------------------
# Tokenizer and parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num', 'name', 'op', 'end'
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise FieldSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind != "op":
            what = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise FieldSyntaxError(f"expected {text!r}, found {what}", self.tok.offset)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise FieldSyntaxError(f"unexpected token {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in COORDINATES:
                return Coord(t.text)
            if t.text in UNARY_FUNCTIONS or t.text in BINARY_FUNCTIONS:
                return self.call(t)
            raise UnknownIdentifierError(t.text, t.offset)
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if t.kind == "end" else f"token {t.text!r}"
        raise FieldSyntaxError(f"unexpected {what}", t.offset)

    def call(self, name_tok: _Token) -> Node:
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        expected = 2 if name_tok.text in BINARY_FUNCTIONS else 1
        if len(args) != expected:
            raise ArityError(name_tok.text, expected, len(args), name_tok.offset)
        return Call(name_tok.text, tuple(args))


# ---------------------------------------------------------------------------
# Scalar evaluation


def _eval_node(node: Node, point: Sequence[float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Coord):
        return float(point[node.axis])
    if isinstance(node, Neg):
        return -_eval_node(node.operand, point)
    if isinstance(node, BinOp):
        a = _eval_node(node.left, point)
        b = _eval_node(node.right, point)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise FieldDomainError("division by zero", node, point)
            return a / b
        if a == 0.0 and b < 0.0:
            raise FieldDomainError("zero to a negative power", node, point)
        if a < 0.0 and b != math.floor(b):
            raise FieldDomainError("negative base with non-integer exponent", node, point)
        try:
            return math.pow(a, b)
        except OverflowError:
            raise FieldDomainError("overflow", node, point) from None
    # Call
    args = [_eval_node(a, point) for a in node.args]
    name = node.name
    if name == "min":
        return min(args[0], args[1])
    if name == "max":
        return max(args[0], args[1])
    v = args[0]
    if name == "abs":
        return abs(v)
    if name == "log":
        if v <= 0.0:
            raise FieldDomainError("log of non-positive value", node, point)
        return math.log(v)
    if name == "sqrt":
        if v < 0.0:
            raise FieldDomainError("sqrt of negative value", node, point)
        return math.sqrt(v)
    if name == "exp":
        try:
            return math.exp(v)
        except OverflowError:
            raise FieldDomainError("overflow", node, point) from None
    if name == "sin":
        return math.sin(v)
    return math.cos(v)


# ---------------------------------------------------------------------------
# Vectorized evaluation over many points


def _first_bad(mask, coords):
    idx = int(np.flatnonzero(mask)[0])
    return tuple(float(c[idx]) for c in coords)


def _eval_array(node: Node, coords: tuple) -> np.ndarray:
    shape = coords[0].shape
    if isinstance(node, Num):
        return np.full(shape, node.value)
    if isinstance(node, Coord):
        return np.asarray(coords[node.axis], dtype=float)
    if isinstance(node, Neg):
        return -_eval_array(node.operand, coords)
    if isinstance(node, BinOp):
        a = _eval_array(node.left, coords)
        b = _eval_array(node.right, coords)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            bad = b == 0.0
            if bad.any():
                raise FieldDomainError("division by zero", node, _first_bad(bad, coords))
            return a / b
        bad = (a == 0.0) & (b < 0.0)
        if bad.any():
            raise FieldDomainError("zero to a negative power", node, _first_bad(bad, coords))
        bad = (a < 0.0) & (b != np.floor(b))
        if bad.any():
            raise FieldDomainError(
                "negative base with non-integer exponent", node, _first_bad(bad, coords)
            )
        with np.errstate(over="ignore"):
            out = np.power(a, b)
        return _check_finite(out, node, coords)
    args = [_eval_array(a, coords) for a in node.args]
    name = node.name
    if name == "min":
        return np.minimum(args[0], args[1])
    if name == "max":
        return np.maximum(args[0], args[1])
    v = args[0]
    if name == "abs":
        return np.abs(v)
    if name == "log":
        bad = v <= 0.0
        if bad.any():
            raise FieldDomainError("log of non-positive value", node, _first_bad(bad, coords))
        return np.log(v)
    if name == "sqrt":
        bad = v < 0.0
        if bad.any():
            raise FieldDomainError("sqrt of negative value", node, _first_bad(bad, coords))
        return np.sqrt(v)
    if name == "exp":
        with np.errstate(over="ignore"):
            return _check_finite(np.exp(v), node, coords)
    if name == "sin":
        return np.sin(v)
    return np.cos(v)


def _check_finite(out, node, coords):
    bad = ~np.isfinite(out)
    if bad.any():
        raise FieldDomainError("overflow", node, _first_bad(bad, coords))
    return out


def _required_dim(node: Node) -> int:
    if isinstance(node, Coord):
        return node.axis + 1
    if isinstance(node, Num):
        return 0
    if isinstance(node, Neg):
        return _required_dim(node.operand)
    if isinstance(node, BinOp):
        return max(_required_dim(node.left), _required_dim(node.right))
    return max(_required_dim(a) for a in node.args)


@dataclass(frozen=True)
class FieldExpr:
    """A parsed field expression; immutable and safe to share between threads."""

    root: Node
    source: str = ""

    @property
    def required_dim(self) -> int:
        """Smallest spatial dimension the expression can be evaluated in."""
        return _required_dim(self.root)

    def __call__(self, *point: float) -> float:
        return evaluate(self, point)

    def to_text(self) -> str:
        return self.root.to_text()

    def __str__(self) -> str:
        return self.source or self.to_text()

    def on_points(self, coords) -> np.ndarray:
        """Evaluate at many points; ``coords`` is a sequence of per-axis arrays."""
        coords = tuple(np.asarray(c, dtype=float) for c in coords)
        if len(coords) < self.required_dim:
            raise FieldSpecError(
                f"expression {self} needs {self.required_dim} coordinates, got {len(coords)}"
            )
        return _eval_array(self.root, coords)


def parse(text: str) -> FieldExpr:
    """Parse ``text`` into a :class:`FieldExpr`.

    >>> parse("2^x")(3.0)
    8.0
    """
    if not text or not text.strip():
        raise FieldSyntaxError("empty expression", 0)
    return FieldExpr(_Parser(text).parse(), text)


def evaluate(expr: FieldExpr, point: Sequence[float]) -> float:
    point = tuple(float(c) for c in point)
    if len(point) < expr.required_dim:
        raise FieldSpecError(
            f"expression {expr} needs {expr.required_dim} coordinates, got {len(point)}"
        )
    return _eval_node(expr.root, point)


def constant(value: float) -> FieldExpr:
    return FieldExpr(Num(float(value)), repr(float(value)))
