"""Expression tree, evaluation and printing for manifest component fields."""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Sequence


class ExprError(Exception):
    """Base class for expression failures."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.message = message
        self.offset = offset


class ExprDomainError(ExprError):
    def __init__(self, message: str, subexpression: str):
        super().__init__(f"{message} in '{subexpression}'")
        self.message = message
        self.subexpression = subexpression


class Expr:
    """Immutable expression node."""

    def evaluate(self, point: Sequence[float], bindings: Mapping[str, float]) -> float:
        raise NotImplementedError

    def to_source(self) -> str:
        raise NotImplementedError

    def depends_on_coordinates(self) -> bool:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.to_source()


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def evaluate(self, point: Sequence[float], bindings: Mapping[str, float]) -> float:
        return self.value

    def to_source(self) -> str:
        text = repr(float(self.value))
        return f"({text})" if self.value < 0 or text.startswith("-") else text

    def depends_on_coordinates(self) -> bool:
        return False


@dataclass(frozen=True)
class Coordinate(Expr):
    name: str
    index: int

    def evaluate(self, point: Sequence[float], bindings: Mapping[str, float]) -> float:
        return float(point[self.index])

    def to_source(self) -> str:
        return self.name

    def depends_on_coordinates(self) -> bool:
        return True


@dataclass(frozen=True)
class Constant(Expr):
    name: str

    def evaluate(self, point: Sequence[float], bindings: Mapping[str, float]) -> float:
        try:
            return float(bindings[self.name])
        except KeyError:
            raise ExprDomainError(f"unbound constant '{self.name}'", self.name)

    def to_source(self) -> str:
        return self.name

    def depends_on_coordinates(self) -> bool:
        return False


@dataclass(frozen=True)
class Negate(Expr):
    operand: Expr

    def evaluate(self, point: Sequence[float], bindings: Mapping[str, float]) -> float:
        return -self.operand.evaluate(point, bindings)

    def to_source(self) -> str:
        return f"(-{self.operand.to_source()})"

    def depends_on_coordinates(self) -> bool:
        return self.operand.depends_on_coordinates()


def _power(base: float, exponent: float, node: Expr) -> float:
    if base < 0 and not float(exponent).is_integer():
        raise ExprDomainError("non-integer power of a negative base", node.to_source())
    if base == 0 and exponent < 0:
        raise ExprDomainError("division by zero", node.to_source())
    return math.pow(base, exponent)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def evaluate(self, point: Sequence[float], bindings: Mapping[str, float]) -> float:
        a = self.left.evaluate(point, bindings)
        b = self.right.evaluate(point, bindings)
        try:
            if self.op == "+":
                result = a + b
            elif self.op == "-":
                result = a - b
            elif self.op == "*":
                result = a * b
            elif self.op == "/":
                if b == 0:
                    raise ExprDomainError("division by zero", self.to_source())
                result = a / b
            else:
                result = _power(a, b, self)
        except OverflowError:
            raise ExprDomainError("floating point overflow", self.to_source())
        if not math.isfinite(result):
            raise ExprDomainError("non-finite result", self.to_source())
        return result

    def to_source(self) -> str:
        return f"({self.left.to_source()} {self.op} {self.right.to_source()})"

    def depends_on_coordinates(self) -> bool:
        return self.left.depends_on_coordinates() or self.right.depends_on_coordinates()


def _positive(name: str, fn: Callable[[float], float]) -> Callable[[float, Expr], float]:
    def wrapped(x: float, node: Expr) -> float:
        if x <= 0:
            raise ExprDomainError(f"{name} of a non-positive value", node.to_source())
        return fn(x)

    return wrapped


def _sqrt(x: float, node: Expr) -> float:
    if x < 0:
        raise ExprDomainError("sqrt of a negative value", node.to_source())
    return math.sqrt(x)


def _plain(fn: Callable[[float], float]) -> Callable[[float, Expr], float]:
    def wrapped(x: float, node: Expr) -> float:
        return fn(x)

    return wrapped


# Function registry; extend with register_function.
FUNCTIONS: Dict[str, Callable[[float, Expr], float]] = {
    "exp": _plain(math.exp),
    "log": _positive("log", math.log),
    "sin": _plain(math.sin),
    "cos": _plain(math.cos),
    "sqrt": _sqrt,
}


def register_function(name: str, fn: Callable[[float, Expr], float]) -> None:
    """Add a unary function to the expression language."""
    FUNCTIONS[name] = fn


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def evaluate(self, point: Sequence[float], bindings: Mapping[str, float]) -> float:
        x = self.arg.evaluate(point, bindings)
        try:
            result = FUNCTIONS[self.func](x, self)
        except OverflowError:
            raise ExprDomainError("floating point overflow", self.to_source())
        if not math.isfinite(result):
            raise ExprDomainError("non-finite result", self.to_source())
        return result

    def to_source(self) -> str:
        return f"{self.func}({self.arg.to_source()})"

    def depends_on_coordinates(self) -> bool:
        return self.arg.depends_on_coordinates()


def evaluate(e: Expr, point: Sequence[float] = (), bindings: Optional[Mapping[str, float]] = None) -> float:
    """Evaluate an expression at a point of the chart in double precision."""
    return e.evaluate(point, bindings or {})


def to_source(e: Expr) -> str:
    """Fully parenthesised source text; parsing it back evaluates identically."""
    return e.to_source()


# Builders used for exact field arithmetic (D_a deformations).

def num(value: float) -> Expr:
    return Num(float(value))


def add(a: Expr, b: Expr) -> Expr:
    return BinOp("+", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    return BinOp("/", a, b)


def total(terms: Sequence[Expr]) -> Expr:
    if not terms:
        return Num(0.0)
    result = terms[0]
    for term in terms[1:]:
        result = add(result, term)
    return result
