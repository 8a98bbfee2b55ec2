import math

import numpy as np
import pytest

from cpint.errors import EvalError, ExpressionSyntaxError, UnknownFunction
from cpint.expressions import compile_expression, parse_expression


@pytest.mark.parametrize("text, x, expected", [
    ("2*x+1", 3.0, 7.0),
    ("-x^2", 3.0, -9.0),
    ("2^3^2", 0.0, 512.0),
    ("x^-2", 2.0, 0.25),
    ("(1+x)/(1-x)", 0.5, 3.0),
    ("pi*e", 0.0, math.pi * math.e),
    ("atan(x)+abs(-x)", 1.0, 0.25 * math.pi + 1.0),
    ("sqrt(exp(log(x)))", 4.0, 2.0),
])
def test_evaluate(text, x, expected):
    assert float(parse_expression(text).evaluate(x)) == pytest.approx(expected)


def test_evaluation_is_vectorized():
    values = compile_expression("x^3")(np.array([-1.0, 0.0, 2.0]))
    np.testing.assert_allclose(values, [-1.0, 0.0, 8.0])


def test_constant_expression_broadcasts():
    assert compile_expression("1")(np.zeros(4)).shape == (4,)


def test_syntax_error_reports_position():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("x +")
    assert info.value.position == 3


@pytest.mark.parametrize("text", ["", "x $ 1", "sin(x, 1)", "(x", "x x"])
def test_malformed_expressions(text):
    with pytest.raises(ExpressionSyntaxError):
        parse_expression(text)


@pytest.mark.parametrize("text", ["foo(x)", "y + 1"])
def test_unknown_names(text):
    with pytest.raises(UnknownFunction):
        parse_expression(text)


def test_piecewise_selects_branches():
    F = compile_expression("piecewise(-1, 1, 0, x+1, 2)")
    np.testing.assert_allclose(F(np.array([-5.0, -1.0, 0.0, 1.0, 5.0])), [0.0, 0.0, 1.0, 2.0, 2.0])


@pytest.mark.parametrize("text", [
    "piecewise(0, x)",
    "piecewise(1, 0, 0, x, 1)",
    "piecewise(x, 0, 1)",
])
def test_piecewise_shape_is_checked(text):
    with pytest.raises(ExpressionSyntaxError):
        parse_expression(text)


def test_piecewise_continuity_is_checked_for_primitives_only():
    with pytest.raises(ExpressionSyntaxError):
        compile_expression("piecewise(0, 0, 1)")
    integrand = compile_expression("piecewise(0, 0, 1)", continuous=False)
    np.testing.assert_array_equal(integrand(np.array([-1.0, 1.0])), [0.0, 1.0])


def test_removable_singularity_is_repaired():
    F = compile_expression("sin(x)/x")
    assert float(F(np.array([0.0]))[0]) == pytest.approx(1.0, abs=1e-12)


def test_nonabsolute_primitive_is_repaired_at_zero():
    F = compile_expression("x^2*cos(x^-2)")
    assert abs(float(F(np.array([0.0]))[0])) < 1e-20


def test_pole_is_an_evaluation_error():
    with pytest.raises(EvalError):
        compile_expression("1/x")(np.array([0.0]))
