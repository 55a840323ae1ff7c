"""
Unit tests for the expression language used by coefficient functions.
"""
import math
import pickle

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.domain.errors import (
    ExpressionDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)
from app.core.domain.expression import evaluate, parse


@pytest.mark.unit
class TestParse:
    """Grammar and precedence."""

    @pytest.mark.parametrize(
        "source, expected",
        [
            ("2*3+4", 10.0),
            ("(1+2)*3", 9.0),
            ("-2^2", -4.0),
            ("2^3^2", 512.0),
            ("2^-1", 0.5),
            ("1 - 2 - 3", -4.0),
            ("8 / 4 / 2", 1.0),
            ("pi", math.pi),
            ("e", math.e),
            ("1.5e2", 150.0),
            (".5", 0.5),
        ],
    )
    def test_constant_expressions(self, source, expected):
        assert evaluate(parse(source), 0.0) == pytest.approx(expected, rel=1e-15)

    def test_functions_of_t(self):
        expr = parse("1 + 0.5*sin(t)")
        assert evaluate(expr, 0.0) == 1.0
        assert evaluate(expr, math.pi / 2) == pytest.approx(1.5)

    def test_all_functions_known(self):
        expr = parse("sin(t) + cos(t) + tan(t) + exp(t) + log(t) + sqrt(t) + abs(-t)")
        t = 0.7
        expected = math.sin(t) + math.cos(t) + math.tan(t) + math.exp(t) + math.log(t) + math.sqrt(t) + t
        assert evaluate(expr, t) == pytest.approx(expected, rel=1e-14)

    def test_printed_form_parses_back_to_same_tree(self):
        for source in ["1 + 0.5*sin(t)", "-t^2/(1+t)", "exp(-t)*cos(3*t) - pi", "2^-1^2"]:
            expr = parse(source)
            assert parse(expr.to_text()) == expr

    def test_expressions_are_immutable(self):
        expr = parse("t")
        with pytest.raises(AttributeError):
            expr.source = "1"

    def test_expressions_survive_pickling(self):
        expr = parse("sin(t)^2")
        clone = pickle.loads(pickle.dumps(expr))
        assert clone == expr
        assert clone(1.3) == expr(1.3)


@pytest.mark.unit
class TestSyntaxErrors:
    """Malformed input is rejected with the offset of the offending token."""

    @pytest.mark.parametrize(
        "source, offset",
        [
            ("1 + * 2", 4),
            ("sin(t", 5),
            ("1 $ 2", 2),
            ("", 0),
            ("   ", 0),
            ("(1 + 2", 6),
            ("1 2", 2),
        ],
    )
    def test_offsets(self, source, offset):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse(source)
        assert info.value.offset == offset

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifierError) as info:
            parse("2*foo(t)")
        assert info.value.name == "foo"
        assert info.value.offset == 2

    def test_function_without_parenthesis(self):
        with pytest.raises(ExpressionSyntaxError):
            parse("sin t")


@pytest.mark.unit
class TestDomain:
    """Evaluation never silently returns NaN or infinity."""

    @pytest.mark.parametrize(
        "source, t",
        [
            ("log(t)", 0.0),
            ("log(t)", -1.0),
            ("sqrt(t - 1)", 0.0),
            ("1/t", 0.0),
            ("tan(t)", math.pi / 2),
            ("exp(t)", 1000.0),
            ("t^-1", 0.0),
            ("(-t)^0.5", 2.0),
        ],
    )
    def test_scalar_domain_errors(self, source, t):
        with pytest.raises(ExpressionDomainError) as info:
            evaluate(parse(source), t)
        assert info.value.t == t

    def test_non_finite_point(self):
        with pytest.raises(ExpressionDomainError):
            evaluate(parse("t"), math.inf)

    def test_array_reports_first_bad_time(self):
        with pytest.raises(ExpressionDomainError) as info:
            parse("log(t)").eval_array(np.array([2.0, 1.0, 0.0, -1.0]))
        assert info.value.t == 0.0

    def test_array_matches_scalar(self):
        expr = parse("1 + 0.3*cos(2*t) - exp(-t)*sin(t)^2")
        ts = np.linspace(0.0, 10.0, 101)
        expected = np.array([evaluate(expr, t) for t in ts])
        np.testing.assert_allclose(expr.eval_array(ts), expected, rtol=1e-14, atol=1e-15)

    def test_constant_broadcasts_over_array(self):
        values = parse("2").eval_array(np.linspace(0.0, 1.0, 5))
        assert values.shape == (5,)
        assert np.all(values == 2.0)


@pytest.mark.unit
class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=-100.0, max_value=100.0, allow_nan=False))
    def test_pythagorean_identity(self, t):
        assert evaluate(parse("sin(t)^2 + cos(t)^2"), t) == pytest.approx(1.0, abs=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(
        st.floats(min_value=-50.0, max_value=50.0, allow_nan=False),
        st.floats(min_value=-50.0, max_value=50.0, allow_nan=False),
    )
    def test_affine_expression(self, a, b):
        expr = parse(f"({a!r})*t + ({b!r})")
        assert evaluate(expr, 2.0) == pytest.approx(2.0 * a + b, rel=1e-12, abs=1e-12)
