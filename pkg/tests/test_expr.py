from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridnet.expr import (
    BOOL,
    NODE,
    REAL,
    Binary,
    Call,
    EvalError,
    ExprError,
    Name,
    Num,
    Scope,
    TupleExpr,
    Unary,
    check_type,
    compile_expr,
    derivative,
    evaluate,
    match_pattern,
    node_value,
    parse,
    unparse,
)

X = [0.7, -1.3, 2.5]
SCOPE = Scope({"x": 3}, {"k": 2.0})

# (expression, Python oracle).  The oracle sees x, k and the math module.
GOLDEN_REAL = [
    ("1 + 2 * 3", "1 + 2 * 3"),
    ("(1 + 2) * 3", "(1 + 2) * 3"),
    ("2 ^ 3 ^ 2", "2 ** 3 ** 2"),
    ("-2 ^ 2", "-2 ** 2"),
    ("2 ^ -1", "2 ** -1"),
    ("10 / 4 / 5", "10 / 4 / 5"),
    ("7 - 3 - 2", "7 - 3 - 2"),
    ("x0 + x1 * x2", "x[0] + x[1] * x[2]"),
    ("x0 ^ 2 + x1 ^ 2", "x[0] ** 2 + x[1] ** 2"),
    ("-x1", "-x[1]"),
    ("- - x1", "x[1]"),
    ("k * x2", "k * x[2]"),
    ("sqrt(x2)", "math.sqrt(x[2])"),
    ("log(x0)", "math.log(x[0])"),
    ("exp(x1)", "math.exp(x[1])"),
    ("sin(x0) ^ 2 + cos(x0) ^ 2", "math.sin(x[0]) ** 2 + math.cos(x[0]) ** 2"),
    ("abs(x1)", "abs(x[1])"),
    ("sign(x1)", "-1.0"),
    ("sign(0)", "0.0"),
    ("floor(x2)", "math.floor(x[2])"),
    ("floor(x1)", "math.floor(x[1])"),
    ("pow(x2, 0.5)", "x[2] ** 0.5"),
    ("min(x0, x1, x2)", "min(x)"),
    ("max(x0, x1, x2)", "max(x)"),
    ("max(x0)", "x[0]"),
    ("piecewise(x0 >= 1, 1 - x1, x1)", "1 - x[1] if x[0] >= 1 else x[1]"),
    ("piecewise(x0 < 1, 1 - x1, x1)", "1 - x[1] if x[0] < 1 else x[1]"),
    ("(1 - 2 * log(x0)) ^ (-0.5)", "(1 - 2 * math.log(x[0])) ** -0.5"),
    ("pi", "math.pi"),
    ("2 * pi * x0", "2 * math.pi * x[0]"),
    ("1.5e-3 * x2", "1.5e-3 * x[2]"),
    ("x2 - 2 * floor(x2 / 2)", "x[2] - 2 * math.floor(x[2] / 2)"),
    ("+x0", "x[0]"),
    ("exp(-x0 ^ 2 / 2)", "math.exp(-x[0] ** 2 / 2)"),
    ("sqrt(x0 * x0 + x1 * x1)", "math.hypot(x[0], x[1])"),
]

GOLDEN_BOOL = [
    ("x0 < x2", "x[0] < x[2]"),
    ("x0 >= 1", "x[0] >= 1"),
    ("x1 = -1.3", "x[1] == -1.3"),
    ("x1 == x1", "True"),
    ("not x0 > 0", "not x[0] > 0"),
    ("x0 > 0 and x1 > 0", "x[0] > 0 and x[1] > 0"),
    ("x0 > 0 or x1 > 0", "x[0] > 0 or x[1] > 0"),
    ("x0 > 0 or x1 > 0 and x2 < 0", "x[0] > 0 or (x[1] > 0 and x[2] < 0)"),
    ("true and not false", "True"),
    ("piecewise(x0 > 0, x1 > 0, x2 > 0)", "x[1] > 0 if x[0] > 0 else x[2] > 0"),
]

# evaluated exactly: rational arithmetic must not round
GOLDEN_EXACT = [
    ("1 / 3 + 1 / 6", Fraction(1, 2)),
    ("0.1 + 0.2", Fraction(3, 10)),
    ("2 ^ -3", Fraction(1, 8)),
    ("(2 / 3) ^ 2", Fraction(4, 9)),
    ("floor(7 / 2)", Fraction(3)),
]


def test_golden_table_has_fifty_entries():
    assert len(GOLDEN_REAL) + len(GOLDEN_BOOL) + len(GOLDEN_EXACT) == 50


def _oracle(text: str):
    return eval(text, {"math": math, "x": X, "k": 2.0, "abs": abs, "min": min, "max": max})


@pytest.mark.parametrize("text, oracle", GOLDEN_REAL)
def test_golden_real(text, oracle):
    e = parse(text)
    assert check_type(e, SCOPE) == REAL
    got = evaluate(e, SCOPE, {"x": X})
    assert got == pytest.approx(_oracle(oracle), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("text, oracle", GOLDEN_BOOL)
def test_golden_bool(text, oracle):
    e = parse(text)
    assert check_type(e, SCOPE) == BOOL
    assert evaluate(e, SCOPE, {"x": X}) is _oracle(oracle)


@pytest.mark.parametrize("text, want", GOLDEN_EXACT)
def test_golden_exact(text, want):
    assert evaluate(parse(text), exact=True) == want


def test_comparison_tolerance():
    e = parse("x0 = 1")
    assert not evaluate(e, Scope({"x": 1}), {"x": [1.0 + 1e-10]})
    assert evaluate(e, Scope({"x": 1}), {"x": [1.0 + 1e-10]}, tol=1e-9)
    assert evaluate(parse("x0 <= 0"), Scope({"x": 1}), {"x": [1e-10]}, tol=1e-9)


def test_unknown_identifier_is_located():
    with pytest.raises(ExprError) as err:
        check_type(parse("x0 + 2 * spam", line=4, col=9), SCOPE)
    assert (err.value.line, err.value.col) == (4, 18)
    assert "spam" in err.value.message


def test_coordinate_out_of_range_is_unknown():
    with pytest.raises(ExprError):
        check_type(parse("x3"), SCOPE)


@pytest.mark.parametrize(
    "text",
    ["x0 + (x1 > 0)", "not x0", "piecewise(x0, 1, 2)", "piecewise(x0 > 0, 1, x1 > 0)", "sqrt(1, 2)", "x0 > 0 and 1"],
)
def test_type_errors(text):
    with pytest.raises(ExprError):
        check_type(parse(text), SCOPE)


@pytest.mark.parametrize("text", ["1 +", "(1, 2", "x0 < x1 < x2", "1 2", "and x0", "x0 $ 1"])
def test_syntax_errors(text):
    with pytest.raises(ExprError):
        parse(text)


def test_syntax_error_position():
    with pytest.raises(ExprError) as err:
        parse("1 + * 2")
    assert (err.value.line, err.value.col) == (1, 5)


@pytest.mark.parametrize("text", ["log(0 - 1)", "1 / (x0 - x0)", "sqrt(-1)"])
def test_evaluation_errors(text):
    with pytest.raises(EvalError):
        evaluate(parse(text), SCOPE, {"x": X})


def test_nodes_and_tuples():
    assert check_type(parse("(0, 1)"), SCOPE) == NODE
    assert node_value(parse("(1, (2, \"a\"))"), Scope()) == (1, (2, "a"))
    assert node_value(parse("4 / 2"), Scope()) == 2
    with pytest.raises(ExprError):
        node_value(parse("1 / 2"), Scope())


def test_patterns():
    pat = parse("(a, (_, 1))")
    assert match_pattern(pat, (5, ("q", 1))) == {"a": 5}
    assert match_pattern(pat, (5, ("q", 2))) is None
    assert match_pattern(parse("(a, a)"), (1, 1)) == {"a": 1}
    assert match_pattern(parse("(a, a)"), (1, 2)) is None
    assert match_pattern(parse("-1"), -1) == {}
    with pytest.raises(ExprError):
        match_pattern(parse("a + 1"), 2)


def test_pattern_variables_feed_expressions():
    e = parse("1 - j")
    assert node_value(e, Scope(values={"j": 0})) == 1


@pytest.mark.parametrize(
    "text, var, point",
    [
        ("x0 ^ 3", "x0", 0.7),
        ("x0 * x1", "x0", 0.7),
        ("sin(x0) * exp(x0)", "x0", 0.7),
        ("(1 - 2 * log(x0)) ^ (-0.5)", "x0", 0.7),
        ("x0 / (1 + x0 ^ 2)", "x0", 0.7),
        ("x0 ^ x0", "x0", 0.7),
        ("sqrt(x0) + cos(x0)", "x0", 0.7),
        ("abs(x1) + max(x0, x1)", "x1", -1.3),
        ("piecewise(x0 > 0, x0 ^ 2, -x0)", "x0", 0.7),
        ("pow(x0, 3) - floor(x0)", "x0", 0.7),
    ],
)
def test_derivative_matches_central_difference(text, var, point):
    e = parse(text)
    d = derivative(e, var)
    k = int(var[1:])
    x = list(X)
    x[k] = point
    got = evaluate(d, SCOPE, {"x": x})
    h = 1e-6
    hi, lo = list(x), list(x)
    hi[k] += h
    lo[k] -= h
    fd = (evaluate(e, SCOPE, {"x": hi}) - evaluate(e, SCOPE, {"x": lo})) / (2 * h)
    assert got == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_derivative_of_constant_is_zero():
    assert derivative(parse("k * x1"), "x0") == Num("0")
    assert unparse(derivative(parse("3 * x0"), "x0")) == "3"


# ---------------------------------------------------------------- round trips

_names = st.sampled_from(["x0", "x1", "y0", "k"]).map(Name)
_nums = st.one_of(
    st.integers(0, 1000).map(str),
    st.sampled_from(["0.5", "1.25", "2e3", "1.5e-3"]),
).map(Num)


def _extend(children):
    reals = st.one_of(
        st.builds(Binary, st.sampled_from(["+", "-", "*", "/", "^"]), children, children),
        st.builds(Unary, st.just("-"), children),
        st.builds(Call, st.sampled_from(["sqrt", "exp", "log"]), st.tuples(children)),
        st.builds(Call, st.sampled_from(["min", "max"]), st.lists(children, min_size=1, max_size=3).map(tuple)),
    )
    return reals


REAL_TREES = st.recursive(st.one_of(_names, _nums), _extend, max_leaves=12)


def _bools(children):
    return st.one_of(
        st.builds(Binary, st.sampled_from(["and", "or"]), children, children),
        st.builds(Unary, st.just("not"), children),
    )


BOOL_TREES = st.recursive(
    st.builds(Binary, st.sampled_from(["<", "<=", "==", ">=", ">"]), REAL_TREES, REAL_TREES), _bools, max_leaves=6
)


@settings(max_examples=300, deadline=None)
@given(REAL_TREES)
def test_unparse_then_parse_is_identity_on_real_trees(tree):
    assert parse(unparse(tree)) == tree


@settings(max_examples=200, deadline=None)
@given(BOOL_TREES)
def test_unparse_then_parse_is_identity_on_bool_trees(tree):
    assert parse(unparse(tree)) == tree


@settings(max_examples=200, deadline=None)
@given(REAL_TREES)
def test_unparse_is_a_fixed_point(tree):
    text = unparse(tree)
    assert unparse(parse(text)) == text


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2), REAL_TREES)
def test_round_trip_preserves_values(x, tree):
    scope = Scope({"x": 2, "y": 1}, {"k": 2.0})
    coords = {"x": x, "y": [0.25]}
    try:
        want = compile_expr(tree, scope)(coords, 0.0)
    except (EvalError, OverflowError):
        return
    got = compile_expr(parse(unparse(tree)), scope)(coords, 0.0)
    assert got == want or (math.isnan(got) and math.isnan(want))


def test_tuple_round_trip():
    t = TupleExpr((Num("0"), TupleExpr((Name("a"), Num("1")))))
    assert unparse(t) == "(0, (a, 1))"
    assert parse(unparse(t)) == t
