"""Recursive-descent parser for residual expressions G(x, y, dy).

Grammar (EBNF)::

    expr    = term   { ("+" | "-") term } ;
    term    = unary  { ("*" | "/") unary } ;
    unary   = "-" unary | "+" unary | power ;
    power   = primary [ "^" unary ] ;
    primary = number | variable | func "(" expr ")" | "(" expr ")" ;
    variable = "x" | "y" | "dy" ;
    func    = "exp" | "ln" | "sin" | "cos" | "sqrt" | "abs" ;
    number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
            | "." digits [ exponent ] ;

``^`` is right-associative and binds tighter than unary minus, so
``-x^2`` is ``-(x^2)`` and ``2^3^2`` is ``2^9``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

from .errors import EvaluationError, ExprSyntaxError, UnknownIdentifier

VARIABLES = ("x", "y", "dy")


def _ln(v: float) -> float:
    if v <= 0.0:
        raise ValueError("ln of non-positive value")
    return math.log(v)


def _sqrt(v: float) -> float:
    if v < 0.0:
        raise ValueError("sqrt of negative value")
    return math.sqrt(v)


FUNCTIONS: dict[str, Callable[[float], float]] = {
    "exp": math.exp,
    "ln": _ln,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": _sqrt,
    "abs": abs,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: Expr


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call:
    func: str
    arg: Expr


Expr = Union[Num, Var, Neg, BinOp, Call]


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "name" | "op" | "eof"
    text: str
    offset: int


def tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(_Token("eof", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.end = self.tokens[-1].offset

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "eof":
            raise ExprSyntaxError(f"unexpected {self.tok.text!r}", self.tok.offset)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.at("-"):
            self.advance()
            return Neg(self.unary())
        if self.at("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.at("^"):
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                if not self.at("("):
                    raise ExprSyntaxError(f"expected '(' after {tok.text!r}", self.tok.offset)
                return Call(tok.text, self.parenthesized())
            raise UnknownIdentifier(tok.text, tok.offset)
        if self.at("("):
            return self.parenthesized()
        if tok.kind == "eof":
            raise ExprSyntaxError("unexpected end of input", tok.offset)
        raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)

    def parenthesized(self) -> Expr:
        open_tok = self.advance()
        try:
            node = self.expr()
        except ExprSyntaxError as exc:
            if exc.offset == self.end and not isinstance(exc, UnknownIdentifier):
                raise ExprSyntaxError("unbalanced parenthesis", open_tok.offset) from None
            raise
        if not self.at(")"):
            if self.tok.kind == "eof":
                raise ExprSyntaxError("unbalanced parenthesis", open_tok.offset)
            raise ExprSyntaxError(f"expected ')' but found {self.tok.text!r}", self.tok.offset)
        self.advance()
        return node


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises:
        ExprSyntaxError: malformed input, with the byte offset of the fault.
        UnknownIdentifier: a name other than x, y, dy or a known function.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text).parse()


def render(expr: Expr) -> str:
    """Fully parenthesized, unambiguous text form that :func:`parse` accepts."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return f"(-{render(expr.operand)})"
    if isinstance(expr, BinOp):
        return f"({render(expr.left)} {expr.op} {render(expr.right)})"
    if isinstance(expr, Call):
        return f"{expr.func}({render(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


def _checked(value: float, node: Expr) -> float:
    if not math.isfinite(value):
        raise EvaluationError(f"non-finite value {value!r}", render(node))
    return value


def evaluate(expr: Expr, x: float = 0.0, y: float = 0.0, dy: float = 0.0) -> float:
    """Evaluate ``expr`` with the given bindings.

    Raises:
        EvaluationError: a non-finite intermediate, division by zero, or a
            domain violation (ln/sqrt); carries the offending subexpression.
    """
    env = {"x": x, "y": y, "dy": dy}

    def ev(node: Expr) -> float:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Var):
            return env[node.name]
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, Call):
            arg = ev(node.arg)
            try:
                return _checked(FUNCTIONS[node.func](arg), node)
            except (ValueError, OverflowError) as exc:
                raise EvaluationError(str(exc), render(node)) from None
        left, right = ev(node.left), ev(node.right)
        try:
            if node.op == "+":
                out = left + right
            elif node.op == "-":
                out = left - right
            elif node.op == "*":
                out = left * right
            elif node.op == "/":
                out = left / right
            else:
                out = left**right
                if isinstance(out, complex):
                    raise ValueError("negative base with fractional exponent")
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise EvaluationError(str(exc), render(node)) from None
        return _checked(out, node)

    return float(ev(expr))


def variables(expr: Expr) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Num):
        return set()
    if isinstance(expr, (Neg, Call)):
        return variables(expr.operand if isinstance(expr, Neg) else expr.arg)
    return variables(expr.left) | variables(expr.right)


def compile_residual(text: str) -> Callable[[float, float, float], float]:
    """Parse ``text`` and return ``G(x, y, s)`` with ``s`` bound to ``dy``."""
    tree = parse(text)

    def residual(x: float, y: float, s: float) -> float:
        return evaluate(tree, x=x, y=y, dy=s)

    residual.expr = tree  # type: ignore[attr-defined]
    residual.source = text  # type: ignore[attr-defined]
    return residual
