"""Top-down operator precedence parser for component expressions.

Grammar (highest binding first)::

    atom    := number | name | function '(' expr ')' | '(' expr ')'
    power   := atom '^' unary            (right associative)
    unary   := '-' unary | power
    product := unary (('*' | '/') unary)*
    expr    := product (('+' | '-') product)*
"""

import logging
import math
import re
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

from .nodes import (
    FUNCTIONS,
    BinOp,
    Call,
    Constant,
    Coordinate,
    Expr,
    ExprSyntaxError,
    Negate,
    Num,
)

logger = logging.getLogger(__name__)

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)

_BINARY_POWER = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_POWER = 30


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    index = 0
    while index < len(source):
        if source[index:].strip() == "":
            break
        match = _TOKEN.match(source, index)
        if match is None or match.lastgroup is None:
            position = index + (len(source[index:]) - len(source[index:].lstrip()))
            raise ExprSyntaxError(
                f"unexpected character '{source[position]}'", _byte_offset(source, position)
            )
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(Token(kind, match.group(kind), _byte_offset(source, start)))
        index = match.end()
    tokens.append(Token("end", "", _byte_offset(source, len(source))))
    return tokens


class Parser:
    def __init__(self, source: str, chart: Sequence[str], constants: Iterable[str]):
        self.source = source
        self.chart = {name: i for i, name in enumerate(chart)}
        self.constants = set(constants)
        self.tokens = tokenize(source)
        self.position = 0

    @property
    def token(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.token
        self.position += 1
        return token

    def expect(self, text: str) -> None:
        if self.token.text != text:
            found = self.token.text or "end of input"
            raise ExprSyntaxError(f"expected '{text}' but found {found}", self.token.offset)
        self.advance()

    def parse(self) -> Expr:
        if self.token.kind == "end":
            raise ExprSyntaxError("empty expression", 0)
        tree = self.expression(0)
        if self.token.kind != "end":
            raise ExprSyntaxError(f"unexpected token '{self.token.text}'", self.token.offset)
        return tree

    def expression(self, rbp: int) -> Expr:
        left = self.prefix(self.advance())
        while rbp < self._left_power(self.token):
            op = self.advance()
            if op.text == "^":
                # right associative; the exponent may carry a unary minus
                right = self.expression(_BINARY_POWER["^"] - 1)
            else:
                right = self.expression(_BINARY_POWER[op.text])
            left = BinOp(op.text, left, right)
        return left

    def _left_power(self, token: Token) -> int:
        if token.kind == "op" and token.text in _BINARY_POWER:
            return _BINARY_POWER[token.text]
        return 0

    def prefix(self, token: Token) -> Expr:
        if token.kind == "number":
            value = float(token.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"numeric literal '{token.text}' is out of range", token.offset)
            return Num(value)
        if token.kind == "name":
            return self.name(token)
        if token.text == "-":
            return Negate(self.expression(_UNARY_POWER))
        if token.text == "(":
            inner = self.expression(0)
            self.expect(")")
            return inner
        found = token.text or "end of input"
        raise ExprSyntaxError(f"unexpected {found}", token.offset)

    def name(self, token: Token) -> Expr:
        if self.token.text == "(" and token.text in FUNCTIONS:
            self.advance()
            arg = self.expression(0)
            self.expect(")")
            return Call(token.text, arg)
        if token.text in self.chart:
            return Coordinate(token.text, self.chart[token.text])
        if token.text in self.constants:
            return Constant(token.text)
        raise ExprSyntaxError(f"unknown identifier '{token.text}'", token.offset)


def parse(
    source: str,
    chart: Sequence[str] = (),
    constants: Optional[Iterable[str]] = None,
) -> Expr:
    """Parse source text against a chart's coordinate names and declared constants."""
    return Parser(source, chart, constants or ()).parse()
