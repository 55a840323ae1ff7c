"""
Scalar expressions in one variable `t`.

These hold the coefficient functions a(t), b(t), c(t) of the third-order equation and the
test solutions used to check it. The grammar is deliberately small:

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := primary ('^' unary)?          # right associative, binds tighter than unary minus
    primary  := NUMBER | 't' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'
    FUNC     := sin | cos | tan | exp | log | sqrt | abs

Parsed expressions are immutable and can be evaluated from many threads at once.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, List, Optional, Union

import numpy as np

from app.core.domain.errors import (
    ExpressionDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}
TAN_POLE_BAND = 1e-12

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


# ============================================================
# AST
# ============================================================

@dataclass(frozen=True)
class Const:
    value: float
    name: Optional[str] = None


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class _Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int


def _tokenize(source: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(source, pos)
        if match is None or match.end() == pos:
            raise ExpressionSyntaxError(
                f"unexpected character {source[pos:].lstrip()[:1]!r}",
                _byte_offset(source, len(source) - len(source[pos:].lstrip())),
            )
        kind = match.lastgroup or "op"
        start = match.start(kind)
        tokens.append(_Token(kind, match.group(kind), _byte_offset(source, start)))
        pos = match.end()
    tokens.append(_Token("end", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> None:
        if self.current.text != text or self.current.kind != "op":
            raise ExpressionSyntaxError(f"expected '{text}'", self.current.offset)
        self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {self.current.text!r}", self.current.offset)
        return node

    def expr(self) -> Node:
        left = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.advance().text
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Node:
        left = self.unary()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.advance().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Node:
        if self.current.kind == "op" and self.current.text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        token = self.current
        if token.kind == "number":
            self.advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError("numeric literal out of range", token.offset)
            return Const(value)
        if token.kind == "ident":
            self.advance()
            if token.text == "t":
                return Var()
            if token.text in CONSTANTS:
                return Const(CONSTANTS[token.text], token.text)
            if token.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(token.text, arg)
            raise UnknownIdentifierError(token.text, token.offset)
        if token.kind == "op" and token.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if token.kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", token.offset)
        raise ExpressionSyntaxError(f"expected operand, found {token.text!r}", token.offset)


# ============================================================
# Printing
# ============================================================

def to_text(node: Node) -> str:
    """Fully parenthesized rendering; parsing it back yields an equal AST."""
    if isinstance(node, Const):
        return node.name if node.name else repr(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.func}({to_text(node.arg)})"


# ============================================================
# Scalar evaluation (compiled to closures once per expression)
# ============================================================

Scalar = Callable[[float], float]


def _near_tan_pole(x: float) -> bool:
    shifted = x - math.pi / 2
    return abs(shifted - math.pi * round(shifted / math.pi)) < TAN_POLE_BAND


def _scalar_call(name: str, x: float, t: float) -> float:
    if name == "log":
        if x <= 0.0:
            raise ExpressionDomainError(f"log of non-positive value {x!r}", t)
        return math.log(x)
    if name == "sqrt":
        if x < 0.0:
            raise ExpressionDomainError(f"sqrt of negative value {x!r}", t)
        return math.sqrt(x)
    if name == "tan":
        if _near_tan_pole(x):
            raise ExpressionDomainError(f"tan evaluated at a pole ({x!r})", t)
        return math.tan(x)
    if name == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            raise ExpressionDomainError(f"exp overflow ({x!r})", t) from None
    if name == "abs":
        return abs(x)
    return math.sin(x) if name == "sin" else math.cos(x)


def _scalar_binop(op: str, left: float, right: float, t: float) -> float:
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if right == 0.0:
            raise ExpressionDomainError("division by zero", t)
        return left / right
    if left == 0.0 and right < 0.0:
        raise ExpressionDomainError("division by zero (zero to a negative power)", t)
    if left < 0.0 and not float(right).is_integer():
        raise ExpressionDomainError(f"negative base {left!r} to non-integer power {right!r}", t)
    try:
        return math.pow(left, right)
    except OverflowError:
        raise ExpressionDomainError("power overflow", t) from None


def _compile(node: Node) -> Scalar:
    if isinstance(node, Const):
        value = node.value
        return lambda t: value
    if isinstance(node, Var):
        return lambda t: t
    if isinstance(node, Neg):
        inner = _compile(node.operand)
        return lambda t: -inner(t)
    if isinstance(node, BinOp):
        left, right, op = _compile(node.left), _compile(node.right), node.op
        return lambda t: _scalar_binop(op, left(t), right(t), t)
    arg, name = _compile(node.arg), node.func
    return lambda t: _scalar_call(name, arg(t), t)


# ============================================================
# Vectorized evaluation (numpy), same domain rules
# ============================================================

def _first_bad(ts: np.ndarray, mask: np.ndarray) -> float:
    return float(np.broadcast_to(ts, mask.shape)[mask][0])


def _eval_array(node: Node, ts: np.ndarray) -> np.ndarray:
    if isinstance(node, Const):
        return np.full_like(ts, node.value)
    if isinstance(node, Var):
        return ts
    if isinstance(node, Neg):
        return -_eval_array(node.operand, ts)
    if isinstance(node, BinOp):
        left = _eval_array(node.left, ts)
        right = _eval_array(node.right, ts)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            zero = right == 0.0
            if zero.any():
                raise ExpressionDomainError("division by zero", _first_bad(ts, zero))
            return left / right
        bad = (left == 0.0) & (right < 0.0)
        if bad.any():
            raise ExpressionDomainError("division by zero (zero to a negative power)", _first_bad(ts, bad))
        bad = (left < 0.0) & (np.floor(right) != right)
        if bad.any():
            raise ExpressionDomainError("negative base to non-integer power", _first_bad(ts, bad))
        with np.errstate(over="ignore"):
            return np.power(left, right)
    x = _eval_array(node.arg, ts)
    if node.func == "log":
        bad = x <= 0.0
        if bad.any():
            raise ExpressionDomainError("log of non-positive value", _first_bad(ts, bad))
        return np.log(x)
    if node.func == "sqrt":
        bad = x < 0.0
        if bad.any():
            raise ExpressionDomainError("sqrt of negative value", _first_bad(ts, bad))
        return np.sqrt(x)
    if node.func == "tan":
        shifted = x - np.pi / 2
        bad = np.abs(shifted - np.pi * np.round(shifted / np.pi)) < TAN_POLE_BAND
        if bad.any():
            raise ExpressionDomainError("tan evaluated at a pole", _first_bad(ts, bad))
        return np.tan(x)
    if node.func == "exp":
        with np.errstate(over="ignore"):
            return np.exp(x)
    return {"sin": np.sin, "cos": np.cos, "abs": np.abs}[node.func](x)


# ============================================================
# Public API
# ============================================================

class Expression:
    """A parsed, immutable scalar expression of `t`."""

    __slots__ = ("ast", "source", "_fn")

    def __init__(self, ast: Node, source: str = ""):
        object.__setattr__(self, "ast", ast)
        object.__setattr__(self, "source", source or to_text(ast))
        object.__setattr__(self, "_fn", _compile(ast))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("Expression is immutable")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Expression) and self.ast == other.ast

    def __hash__(self) -> int:
        return hash(self.ast)

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"

    def __call__(self, t: float) -> float:
        return evaluate(self, t)

    def __getstate__(self) -> dict:
        return {"ast": self.ast, "source": self.source}

    def __setstate__(self, state: dict) -> None:
        object.__setattr__(self, "ast", state["ast"])
        object.__setattr__(self, "source", state["source"])
        object.__setattr__(self, "_fn", _compile(state["ast"]))

    def to_text(self) -> str:
        return to_text(self.ast)

    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = np.asarray(_eval_array(self.ast, ts), dtype=float)
        out = np.broadcast_to(out, ts.shape).copy()
        bad = ~np.isfinite(out)
        if bad.any():
            raise ExpressionDomainError("non-finite result", _first_bad(ts, bad))
        return out


def parse(source: str) -> Expression:
    """Parse `source` into an Expression, raising ExpressionSyntaxError or UnknownIdentifierError."""
    if not source or not source.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return Expression(_Parser(source).parse(), source)


def evaluate(expression: Expression, t: float) -> float:
    """IEEE double evaluation at a finite `t`; domain violations raise instead of returning NaN."""
    if not math.isfinite(t):
        raise ExpressionDomainError("non-finite evaluation point", t)
    value = expression._fn(t)
    if not math.isfinite(value):
        raise ExpressionDomainError("non-finite result", t)
    return value
