"""Arithmetic expression language for manifest component fields."""

from .nodes import (
    FUNCTIONS,
    BinOp,
    Call,
    Constant,
    Coordinate,
    Expr,
    ExprDomainError,
    ExprError,
    ExprSyntaxError,
    Negate,
    Num,
    add,
    div,
    evaluate,
    mul,
    num,
    register_function,
    to_source,
    total,
)
from .parser import parse, tokenize

__all__ = [
    "FUNCTIONS",
    "BinOp",
    "Call",
    "Constant",
    "Coordinate",
    "Expr",
    "ExprDomainError",
    "ExprError",
    "ExprSyntaxError",
    "Negate",
    "Num",
    "add",
    "div",
    "evaluate",
    "mul",
    "num",
    "parse",
    "register_function",
    "to_source",
    "tokenize",
    "total",
]
