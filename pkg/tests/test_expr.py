import math

import pytest
from hypothesis import given, strategies as st

from ridgeapprox.expr import (
    BinOp,
    Call,
    ExprEvalError,
    ExprSyntaxError,
    FUNCTIONS,
    Neg,
    Num,
    Var,
    evaluate,
    free_variables,
    parse,
    to_text,
)

QUARTIC = (
    "8*x1*x2*x3*x4 - (x1^4 + x2^4 + x3^4 + x4^4)"
    " + 2*(x1^2*x2^2 + x1^2*x3^2 + x1^2*x4^2 + x2^2*x3^2 + x2^2*x4^2 + x3^2*x4^2)"
)


class TestParse:
    def test_product_of_variables(self):
        assert parse("x1*x2") == BinOp("*", Var("x1"), Var("x2"))

    def test_quartic_example_parses(self):
        tree = parse(QUARTIC)
        assert free_variables(tree) == ["x1", "x2", "x3", "x4"]

    def test_syntax_error_position(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse("x1 + * x2")
        assert err.value.position == 5

    def test_empty_input(self):
        with pytest.raises(ExprSyntaxError):
            parse("   ")

    def test_unknown_function(self):
        with pytest.raises(ExprSyntaxError, match="unknown function"):
            parse("tan(x1)")

    def test_unexpected_character(self):
        with pytest.raises(ExprSyntaxError):
            parse("x1 @ x2")

    def test_trailing_garbage(self):
        with pytest.raises(ExprSyntaxError):
            parse("x1 x2")

    def test_scientific_notation(self):
        assert parse("1e-3") == Num(1e-3)
        assert parse("2.5e+2") == Num(250.0)

    def test_unary_minus_binds_looser_than_power(self):
        assert parse("-x1^2") == Neg(BinOp("^", Var("x1"), Num(2.0)))

    def test_power_right_associative(self):
        assert parse("2^3^2") == BinOp("^", Num(2.0), BinOp("^", Num(3.0), Num(2.0)))


class TestEvaluate:
    def test_identity_point(self):
        tree = parse("x1*x2*x3*x4")
        assert evaluate(tree, {f"x{i}": 1.0 for i in range(1, 5)}) == 1.0

    def test_quartic_at_half(self):
        # 8/16 - 4/16 + 2*6/16 = 1, cross-checked below with sympy
        tree = parse(QUARTIC)
        bindings = {f"x{i}": 0.5 for i in range(1, 5)}
        assert evaluate(tree, bindings) == pytest.approx(1.0, abs=1e-15)

    def test_quartic_matches_symbolic_evaluator(self):
        sympy = pytest.importorskip("sympy")
        symbols = sympy.symbols("x1 x2 x3 x4")
        reference = sympy.sympify(QUARTIC.replace("^", "**"))
        tree = parse(QUARTIC)
        for point in [(0.5, 0.5, 0.5, 0.5), (0.1, 0.2, 0.3, 0.4), (1.0, -1.0, 2.0, 0.25)]:
            expected = float(reference.subs(dict(zip(symbols, point))))
            got = evaluate(tree, dict(zip(("x1", "x2", "x3", "x4"), point)))
            assert got == pytest.approx(expected, rel=1e-12)

    def test_even_power_of_negative(self):
        assert evaluate(parse("y1^2"), {"y1": -2.0}) == 4.0

    def test_precedence(self):
        assert evaluate(parse("2+3*4"), {}) == 14.0

    def test_power_right_associativity_value(self):
        assert evaluate(parse("2^3^2"), {}) == 512.0

    def test_unbound_variable_is_named(self):
        with pytest.raises(ExprEvalError, match="'x2'"):
            evaluate(parse("x1 + x2"), {"x1": 1.0})

    @pytest.mark.parametrize(
        "source,bindings",
        [
            ("log(x1)", {"x1": -1.0}),
            ("log(x1)", {"x1": 0.0}),
            ("sqrt(x1)", {"x1": -4.0}),
            ("1/x1", {"x1": 0.0}),
            ("(-2)^0.5", {}),
            ("0^(-1)", {}),
        ],
    )
    def test_domain_errors(self, source, bindings):
        with pytest.raises(ExprEvalError):
            evaluate(parse(source), bindings)

    def test_functions(self):
        assert evaluate(parse("sin(0) + cos(0) + exp(0) + abs(-2) + sqrt(4) + log(1)"), {}) == 6.0

    def test_integer_power_of_negative_base(self):
        assert evaluate(parse("x1^3"), {"x1": -2.0}) == -8.0


class TestFreeVariables:
    def test_dedup_and_sort(self):
        assert free_variables(parse("x1 + x1*x3")) == ["x1", "x3"]

    def test_constant(self):
        assert free_variables(parse("3.5")) == []

    def test_quartic(self):
        assert free_variables(parse(QUARTIC)) == ["x1", "x2", "x3", "x4"]


_numbers = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)
_leaves = st.one_of(
    _numbers.map(Num),
    st.sampled_from(["x1", "x2", "y1", "y2", "a_b2"]).map(Var),
)
_trees = st.recursive(
    _leaves,
    lambda child: st.one_of(
        st.tuples(st.sampled_from("+-*/^"), child, child).map(lambda t: BinOp(*t)),
        child.map(Neg),
        st.tuples(st.sampled_from(FUNCTIONS), child).map(lambda t: Call(*t)),
    ),
    max_leaves=25,
)


class TestRoundTrip:
    @given(_trees)
    def test_print_parse_restores_tree(self, tree):
        assert parse(to_text(tree)) == tree

    @given(_trees)
    def test_reprint_is_stable(self, tree):
        text = to_text(tree)
        assert to_text(parse(text)) == text

    @given(st.floats(min_value=0.1, max_value=2.0), st.floats(min_value=0.1, max_value=2.0))
    def test_evaluation_is_pure(self, a, b):
        tree = parse("x1^2 * sin(x2) + exp(x1 / (1 + x2))")
        bindings = {"x1": a, "x2": b}
        first = evaluate(tree, bindings)
        second = evaluate(tree, bindings)
        assert math.isfinite(first)
        assert first == second
