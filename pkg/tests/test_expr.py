import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kmnverify.expr import (
    FUNCTIONS,
    ExprDomainError,
    ExprSyntaxError,
    evaluate,
    parse,
    register_function,
    to_source,
    tokenize,
    total,
)

CHART = ["x", "y", "z"]


@pytest.mark.parametrize(
    "source, value",
    [
        ("1 + 2*3", 7.0),
        ("(1 + 2)*3", 9.0),
        ("2^3^2", 512.0),
        ("-2^2", -4.0),
        ("2^-1", 0.5),
        ("8/4/2", 1.0),
        ("1 - 2 - 3", -4.0),
        ("1.5e1 + .5", 15.5),
        ("--3", 3.0),
    ],
)
def test_precedence_and_associativity(source, value):
    assert evaluate(parse(source)) == pytest.approx(value)


def test_coordinates_and_constants():
    e = parse("x*y + lambda0*z", CHART, ["lambda0"])
    assert evaluate(e, [2.0, 3.0, 4.0], {"lambda0": 0.5}) == pytest.approx(8.0)
    assert e.depends_on_coordinates()
    assert not parse("2*lambda0", CHART, ["lambda0"]).depends_on_coordinates()


@pytest.mark.parametrize(
    "source, value",
    [("exp(0)", 1.0), ("log(exp(2))", 2.0), ("sin(0) + cos(0)", 1.0), ("sqrt(16)", 4.0)],
)
def test_functions(source, value):
    assert evaluate(parse(source)) == pytest.approx(value)


@pytest.mark.parametrize(
    "source, offset",
    [
        ("1 + * 2", 4),
        ("x + @", 4),
        ("(1 + 2", 6),
        ("", 0),
        ("w + 1", 0),
        ("1 2", 2),
        ("sin(", 4),
    ],
)
def test_syntax_error_offsets(source, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(source, CHART)
    assert info.value.offset == offset


def test_syntax_error_offset_counts_bytes():
    # no-break space is two bytes in UTF-8
    with pytest.raises(ExprSyntaxError) as info:
        parse("x +\u00a0@", CHART)
    assert info.value.offset == 5


def test_function_name_without_call_is_unknown():
    with pytest.raises(ExprSyntaxError, match="unknown identifier"):
        parse("exp + 1", CHART)


@pytest.mark.parametrize(
    "source, point",
    [
        ("1/x", [0.0, 0.0, 0.0]),
        ("log(x)", [0.0, 1.0, 1.0]),
        ("sqrt(x)", [-1.0, 0.0, 0.0]),
        ("x^0.5", [-4.0, 0.0, 0.0]),
        ("exp(x)", [1000.0, 0.0, 0.0]),
    ],
)
def test_domain_errors_name_the_subexpression(source, point):
    with pytest.raises(ExprDomainError) as info:
        evaluate(parse(source, CHART), point)
    assert info.value.subexpression


def test_unbound_constant():
    e = parse("a*x", CHART, ["a"])
    with pytest.raises(ExprDomainError, match="unbound constant"):
        evaluate(e, [1.0, 0.0, 0.0])


def test_register_function():
    register_function("tanh", lambda x, node: math.tanh(x))
    try:
        assert evaluate(parse("tanh(0)")) == 0.0
    finally:
        FUNCTIONS.pop("tanh")


def test_tokenize_offsets():
    tokens = tokenize("x*(y + 2)")
    assert [t.text for t in tokens] == ["x", "*", "(", "y", "+", "2", ")", ""]
    assert [t.offset for t in tokens] == [0, 1, 2, 3, 5, 7, 8, 9]


def test_total_of_nothing_is_zero():
    assert evaluate(total([])) == 0.0


@given(
    x=st.floats(min_value=-3, max_value=3, allow_nan=False),
    y=st.floats(min_value=-3, max_value=3, allow_nan=False),
)
def test_printed_source_evaluates_identically(x, y):
    e = parse("-x^2*y + 3/(1 + y^2) - exp(-x)*cos(y)", CHART)
    again = parse(to_source(e), CHART)
    assert evaluate(again, [x, y, 0.0]) == evaluate(e, [x, y, 0.0])


@pytest.mark.parametrize("source, offset", [("1e400", 0), ("1 + 2e999*x", 4)])
def test_out_of_range_literal_is_rejected(source, offset):
    with pytest.raises(ExprSyntaxError, match="out of range") as info:
        parse(source, CHART)
    assert info.value.offset == offset


def test_constant_expression_needs_no_point():
    assert evaluate(parse("2*3")) == 6.0
    assert evaluate(parse("2*3"), []) == 6.0
