"""Boolean update-rule expressions: tokenizer, parser, evaluator.

Precedence from tightest to loosest: NOT, AND, OR, XOR, IMPLIES, IFF.
IMPLIES associates to the right, the other binary operators to the left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from .errors import ExpressionSyntaxError, UnknownIdentifier
from .stp import LogicalMatrix, khatri_rao, logical_kron, stp_logical, structure_matrix


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # AND, OR, XOR, IMPLIES, IFF
    left: "Expr"
    right: "Expr"


Expr = Union[Var, Const, Not, BinOp]

_OPERATOR_MATRIX = {
    "AND": "conjunction",
    "OR": "disjunction",
    "XOR": "xor",
    "IMPLIES": "implication",
    "IFF": "equivalence",
}

_SYMBOLS = [
    ("<->", "IFF"), ("<=>", "IFF"), ("↔", "IFF"),
    ("->", "IMPLIES"), ("=>", "IMPLIES"), ("→", "IMPLIES"),
    ("&&", "AND"), ("&", "AND"), ("∧", "AND"), ("*", "AND"),
    ("||", "OR"), ("|", "OR"), ("∨", "OR"), ("+", "OR"),
    ("^", "XOR"), ("⊕", "XOR"),
    ("!", "NOT"), ("~", "NOT"), ("¬", "NOT"),
    ("(", "LPAREN"), (")", "RPAREN"),
]
_KEYWORDS = {"and": "AND", "or": "OR", "xor": "XOR", "not": "NOT",
             "implies": "IMPLIES", "iff": "IFF"}
_CONSTANTS = {"0": False, "1": True, "true": True, "false": False}
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|\d+")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            line += 1
            line_start = pos + 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        column = pos - line_start + 1
        for sym, kind in _SYMBOLS:
            if text.startswith(sym, pos):
                tokens.append(_Token(kind, sym, line, column))
                pos += len(sym)
                break
        else:
            match = _WORD.match(text, pos)
            if not match:
                raise ExpressionSyntaxError(f"unexpected character {ch!r}", line, column)
            word = match.group(0)
            lowered = word.lower()
            if lowered in _KEYWORDS:
                tokens.append(_Token(_KEYWORDS[lowered], word, line, column))
            elif lowered in _CONSTANTS:
                tokens.append(_Token("CONST", lowered, line, column))
            elif word[0].isdigit():
                raise ExpressionSyntaxError(f"bad literal {word!r}", line, column)
            else:
                tokens.append(_Token("IDENT", word, line, column))
            pos = match.end()
    column = pos - line_start + 1
    tokens.append(_Token("EOF", "", line, column))
    return tokens


class _Parser:
    # loosest first; each entry is (operator, right-associative?)
    LEVELS = [("IFF", False), ("IMPLIES", True), ("XOR", False), ("OR", False), ("AND", False)]

    def __init__(self, tokens: list[_Token], identifiers):
        self.tokens = tokens
        self.pos = 0
        self.identifiers = identifiers

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> Expr:
        expr = self.level(0)
        tok = self.peek()
        if tok.kind != "EOF":
            raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.line, tok.column)
        return expr

    def level(self, depth: int) -> Expr:
        if depth == len(self.LEVELS):
            return self.unary()
        op, right_assoc = self.LEVELS[depth]
        left = self.level(depth + 1)
        if right_assoc:
            if self.peek().kind == op:
                self.take()
                return BinOp(op, left, self.level(depth))
            return left
        while self.peek().kind == op:
            self.take()
            left = BinOp(op, left, self.level(depth + 1))
        return left

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NOT":
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Expr:
        tok = self.take()
        if tok.kind == "LPAREN":
            inner = self.level(0)
            close = self.take()
            if close.kind != "RPAREN":
                raise ExpressionSyntaxError("expected ')'", close.line, close.column)
            return inner
        if tok.kind == "CONST":
            return Const(_CONSTANTS[tok.text])
        if tok.kind == "IDENT":
            if self.identifiers is not None and tok.text not in self.identifiers:
                raise UnknownIdentifier(
                    f"unknown identifier {tok.text!r} at line {tok.line}, column {tok.column}"
                )
            return Var(tok.text)
        what = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise ExpressionSyntaxError(f"unexpected {what}", tok.line, tok.column)


def parse_expression(text: str, identifiers: Sequence[str] | None = None) -> Expr:
    """Parse ``text`` into an expression tree.

    When ``identifiers`` is given, any other name raises :class:`UnknownIdentifier`.
    """
    allowed = None if identifiers is None else frozenset(identifiers)
    return _Parser(_tokenize(text), allowed).parse()


def evaluate(expr: Expr, env: Mapping[str, bool]) -> bool:
    if isinstance(expr, Var):
        return env[expr.name]
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Not):
        return not evaluate(expr.arg, env)
    a = evaluate(expr.left, env)
    b = evaluate(expr.right, env)
    if expr.op == "AND":
        return a and b
    if expr.op == "OR":
        return a or b
    if expr.op == "XOR":
        return a != b
    if expr.op == "IMPLIES":
        return (not a) or b
    if expr.op == "IFF":
        return a == b
    raise ValueError(f"unknown operator {expr.op}")


def variables_of(expr: Expr) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, Not):
        return variables_of(expr.arg)
    return variables_of(expr.left) | variables_of(expr.right)


def to_text(expr: Expr) -> str:
    """Fully parenthesized rendering that parses back to the same tree."""
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Const):
        return "1" if expr.value else "0"
    if isinstance(expr, Not):
        return f"!{to_text(expr.arg)}"
    symbol = {"AND": "&", "OR": "|", "XOR": "^", "IMPLIES": "->", "IFF": "<->"}[expr.op]
    return f"({to_text(expr.left)} {symbol} {to_text(expr.right)})"


def _selector(position: int, count: int) -> LogicalMatrix:
    """Structure matrix of the projection onto variable ``position`` (1-based) of ``count``."""
    ones_before = LogicalMatrix(1, (1,) * 2 ** (position - 1))
    ones_after = LogicalMatrix(1, (1,) * 2 ** (count - position))
    eye = LogicalMatrix(2, (1, 2))
    return logical_kron(logical_kron(ones_before, eye), ones_after)


def expression_matrix(expr: Expr, variables: Sequence[str]) -> LogicalMatrix:
    """Structure matrix M_f (2 x 2^N) of ``expr`` built by STP composition.

    Each variable becomes a selector matrix, each operator multiplies its
    structure matrix onto the column-wise product of its operands.
    """
    order = {name: i + 1 for i, name in enumerate(variables)}
    width = 2 ** len(variables)

    def build(e: Expr) -> LogicalMatrix:
        if isinstance(e, Var):
            if e.name not in order:
                raise UnknownIdentifier(f"unknown identifier {e.name!r}")
            return _selector(order[e.name], len(variables))
        if isinstance(e, Const):
            return LogicalMatrix(2, (1 if e.value else 2,) * width)
        if isinstance(e, Not):
            return stp_logical(structure_matrix("negation"), build(e.arg))
        operands = khatri_rao(build(e.left), build(e.right))
        return stp_logical(structure_matrix(_OPERATOR_MATRIX[e.op]), operands)

    return build(expr)
