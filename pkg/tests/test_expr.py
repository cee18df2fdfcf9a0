import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normdecay.errors import DomainError, ExprSyntaxError
from normdecay.expr import Call, Div, Neg, Num, Pow, Var, evaluate, free_variables, parse, to_text


def test_reciprocal_log_tree():
    assert parse("1/ln(y)") == Div(Num(1.0), Call("ln", Var("y")))


def test_negative_power_tree():
    assert parse("y^(-2)") == Pow(Var("y"), Neg(Num(2.0)))


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("2*+")
    assert info.value.offset == 2
    assert info.value.expected


def test_unknown_name_reports_expected_set():
    with pytest.raises(ExprSyntaxError) as info:
        parse("foo(y)")
    assert info.value.offset == 0
    assert "'ln'" in info.value.expected


@pytest.mark.parametrize("text, offset", [("(y", 2), ("y +", 3), ("y $ 2", 2), ("", 0), ("y y", 2)])
def test_error_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset


def test_offsets_are_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse("y + é")
    assert info.value.offset == 4


def test_evaluate_examples():
    assert evaluate(parse("1/ln(y)"), math.e) == pytest.approx(1.0, abs=1e-15)
    assert evaluate(parse("y^(-2)"), 2.0) == 0.25


def test_log_of_one_is_domain_error():
    with pytest.raises(DomainError):
        evaluate(parse("1/ln(y)"), 1.0)


@pytest.mark.parametrize("text, y", [("ln(y)", 0.0), ("sqrt(y)", -1.0), ("y^0.5", -2.0), ("1/(y-1)", 1.0)])
def test_domain_errors(text, y):
    with pytest.raises(DomainError):
        evaluate(parse(text), y)


def test_exp_overflow_is_infinite():
    assert evaluate(parse("exp(y)"), 1000.0) == math.inf


def test_array_evaluation_matches_scalar():
    e = parse("y^2*exp(-y)/(1+sqrt(y))")
    ys = np.linspace(0.1, 10, 37)
    arr = evaluate(e, ys)
    assert np.allclose(arr, [evaluate(e, float(y)) for y in ys], rtol=1e-15, atol=0)


def test_non_strict_array_gives_nan():
    out = evaluate(parse("ln(y)"), np.array([-1.0, 1.0]), strict=False)
    assert math.isnan(out[0]) and out[1] == 0.0


def test_precedence_and_associativity():
    assert evaluate(parse("2^3^2"), 0.0) == 512.0
    assert evaluate(parse("-2^2"), 0.0) == -4.0
    assert evaluate(parse("8/4/2"), 0.0) == 1.0
    assert evaluate(parse("1-2-3"), 0.0) == -4.0


def test_constants_and_variables():
    assert evaluate(parse("pi*e"), 0.0) == math.pi * math.e
    assert free_variables(parse("t^2+1", variables=("t",))) == {"t"}
    with pytest.raises(ExprSyntaxError):
        parse("t", variables=("y",))


def test_to_text_roundtrip_examples():
    for s in ["1/ln(y)", "y^(-2)", "-(y+1)*2", "2^3^2", "(2^3)^2", "1-(2-3)", "exp(-y/2)"]:
        e = parse(s)
        assert parse(to_text(e)) == e


_leaf = st.one_of(
    st.floats(min_value=0.0, max_value=1e6, allow_nan=False).map(Num),
    st.just(Var("y")),
)


def _extend(children):
    from normdecay.expr import Add, Mul, Sub

    binary = st.tuples(st.sampled_from([Add, Sub, Mul, Div, Pow]), children, children).map(lambda p: p[0](p[1], p[2]))
    return st.one_of(binary, children.map(Neg), st.tuples(st.sampled_from(["ln", "exp", "sqrt", "abs"]), children)
                     .map(lambda p: Call(*p)))


@settings(max_examples=300, deadline=None)
@given(st.recursive(_leaf, _extend, max_leaves=12))
def test_print_parse_roundtrip(tree):
    assert parse(to_text(tree)) == tree
