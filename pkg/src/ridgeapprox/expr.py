"""Small arithmetic expression language for problem definitions.

Functions and weights are written as plain text in named variables
(``x1..xn`` or ``y1..yn``) and parsed into an immutable tree.  Grammar,
with conventional precedence and a right-associative ``^`` that binds
tighter than unary minus:

    sum    := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" sum ")" | "(" sum ")"

NUMBER is a decimal literal with optional fraction and exponent part;
NAME matches ``[a-z][a-z0-9_]*``.  Known functions: abs, cos, exp, log,
sin, sqrt.  Trees are frozen dataclasses and evaluation is pure, so
expressions may be shared freely across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union


class ExprError(ValueError):
    """Base class for expression parsing and evaluation failures."""


class ExprSyntaxError(ExprError):
    """Malformed source text; carries the byte offset of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class ExprEvalError(ExprError):
    """Unbound variable or a domain error during evaluation."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS = ("abs", "cos", "exp", "log", "sin", "sqrt")

_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[a-z][a-z0-9_]*)"
    r"|(?P<op>[+\-*/^()])"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(source):
        if source[i].isspace():
            i += 1
            continue
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[i]!r}", i)
        tokens.append(_Token(m.lastgroup, m.group(), i))
        i = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.index = 0

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect_op(self, text: str) -> None:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            raise ExprSyntaxError(f"expected {text!r}", tok.pos)
        self.advance()

    def parse_sum(self) -> Expr:
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            return BinOp("^", base, self.parse_unary())
        return base

    def parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "(":
                if tok.text not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {tok.text!r}", tok.pos)
                self.advance()
                arg = self.parse_sum()
                self.expect_op(")")
                return Call(tok.text, arg)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.parse_sum()
            self.expect_op(")")
            return node
        if tok.kind == "end":
            raise ExprSyntaxError("unexpected end of input", tok.pos)
        raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.pos)


def parse(source: str) -> Expr:
    """Parse source text into an expression tree.

    Raises ExprSyntaxError with the byte offset of the first problem.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    parser = _Parser(_tokenize(source))
    tree = parser.parse_sum()
    tok = parser.peek()
    if tok.kind != "end":
        raise ExprSyntaxError(f"unexpected token {tok.text!r}", tok.pos)
    return tree


def _domain_error(message: str, node: Expr) -> ExprEvalError:
    return ExprEvalError(f"{message} in '{to_text(node)}'")


def _power(base: float, exponent: float, node: Expr) -> float:
    if base == 0.0 and exponent < 0.0:
        raise _domain_error("zero raised to a negative power", node)
    if base < 0.0 and not float(exponent).is_integer():
        raise _domain_error("negative base with non-integer exponent", node)
    try:
        return math.pow(base, exponent)
    except (OverflowError, ValueError):
        raise _domain_error("overflow", node) from None


def _call(func: str, value: float, node: Expr) -> float:
    if func == "log":
        if value <= 0.0:
            raise _domain_error("log of a non-positive value", node)
        return math.log(value)
    if func == "sqrt":
        if value < 0.0:
            raise _domain_error("sqrt of a negative value", node)
        return math.sqrt(value)
    try:
        if func == "sin":
            return math.sin(value)
        if func == "cos":
            return math.cos(value)
        if func == "exp":
            return math.exp(value)
        if func == "abs":
            return abs(value)
    except OverflowError:
        raise _domain_error("overflow", node) from None
    raise ExprEvalError(f"unknown function {func!r}")


def evaluate(e: Expr, bindings: Mapping[str, float]) -> float:
    """Evaluate with IEEE double arithmetic; every variable must be bound."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise ExprEvalError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -evaluate(e.operand, bindings)
    if isinstance(e, Call):
        return _call(e.func, evaluate(e.arg, bindings), e)
    left = evaluate(e.left, bindings)
    right = evaluate(e.right, bindings)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if e.op == "/":
        if right == 0.0:
            raise _domain_error("division by zero", e)
        return left / right
    return _power(left, right, e)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    return 5


def to_text(e: Expr) -> str:
    """Render a tree back to source; parsing the result restores the tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        if _prec(e.operand) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    prec = _PREC[e.op]
    left = to_text(e.left)
    right = to_text(e.right)
    if e.op == "^":
        if _prec(e.left) <= prec:
            left = f"({left})"
        if _prec(e.right) < prec:
            right = f"({right})"
    else:
        if _prec(e.left) < prec:
            left = f"({left})"
        if _prec(e.right) <= prec:
            right = f"({right})"
    return f"{left} {e.op} {right}"


def free_variables(e: Expr) -> list[str]:
    """Sorted, deduplicated variable names occurring in the tree."""
    found: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            found.add(node.name)
        elif isinstance(node, Neg):
            stack.append(node.operand)
        elif isinstance(node, Call):
            stack.append(node.arg)
        elif isinstance(node, BinOp):
            stack.append(node.left)
            stack.append(node.right)
    return sorted(found)
