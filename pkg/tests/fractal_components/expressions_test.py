import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractal_core.exceptions import (
    CombineError,
    EvaluationError,
    ExpressionSyntaxError,
    NonTotalPiecewise,
    UnknownIdentifier,
)
from fractal_core.models import AlphaContext, FractalConst, KNum, KSym, Mono, Piecewise, Subst, Sum
from fractal_core.services import expressions
from fractal_core.services.expressions import combine, parse, parse_scalar
from fractal_core.utils.corpus import DEFAULT_CORPUS

ctx = AlphaContext(alpha=0.5, s=0.5)

EXAMPLE41 = "pw(u==0 -> fb(0); u>0 -> fb(1)*mono(s) + fb(-1))"
EXAMPLE42 = "pw(u<=1 -> mono(s/(1-s)); u>1 -> fv(2)*mono(s/(1-s)))"


### --- Parser Components --- ###
def test_parse_monomial():
    assert parse("mono(s)") == Mono(k=KSym())


def test_parse_example41_shape():
    f = parse(EXAMPLE41)
    assert isinstance(f, Piecewise)
    assert [b.guard.op for b in f.branches] == ["==", ">"]
    tail = f.branches[1].expr
    assert isinstance(tail, Sum)
    assert tail.terms[1] == FractalConst(mode="base", literal=-1.0)


def test_parse_example42_value_constant():
    f = parse(EXAMPLE42)
    # fv(2) has base 4 at alpha = 0.5
    assert expressions.evaluate(f, 2.0, ctx).base == pytest.approx(8.0)
    assert expressions.evaluate(f, 1.0, ctx).base == pytest.approx(1.0)


@pytest.mark.parametrize("text", list(DEFAULT_CORPUS.values()) + [EXAMPLE41, EXAMPLE42, "max(mono(1), fb(2)) - mono(-(s))", "subst(mono(s); pow(u, 2) + (-1) * u)"])
def test_pretty_print_round_trip(text):
    f = parse(text)
    assert parse(expressions.to_text(f)) == f


def test_to_json_tree():
    assert expressions.to_json(parse("mono(s)")) == {"kind": "mono", "k": {"kind": "k_sym", "name": "s"}}


# --- Diagnostics --- #
def test_unknown_identifier_position():
    with pytest.raises(UnknownIdentifier) as error:
        parse("fb(1) +\n  mono(x)")
    assert (error.value.line, error.value.column) == (2, 8)


def test_unknown_function_word():
    with pytest.raises(UnknownIdentifier):
        parse("exp(1)")


def test_non_total_piecewise():
    with pytest.raises(NonTotalPiecewise):
        parse("pw(u<1 -> fb(1); u>1 -> fb(2))")


def test_else_branch_makes_piecewise_total():
    f = parse("pw(u<1 -> fb(1); else -> fb(2))")
    assert expressions.evaluate(f, 1.0, ctx).base == 2.0


def test_trailing_operator():
    with pytest.raises(ExpressionSyntaxError) as error:
        parse("fb(1) +")
    assert error.value.column == 8


def test_bad_character():
    with pytest.raises(ExpressionSyntaxError):
        parse("fb(1) $ fb(2)")


### --- Evaluation Components --- ###
def test_evaluate_monomial():
    x = expressions.evaluate(parse("mono(s)"), 4.0, ctx)
    assert x.base == pytest.approx(2.0)
    assert x.value(ctx.alpha) == pytest.approx(2.0**0.5)


def test_evaluate_example41():
    f = parse(EXAMPLE41)
    assert expressions.evaluate(f, 0.0, ctx).base == 0.0
    assert expressions.evaluate(f, 1.0, ctx).base == pytest.approx(0.0)


def test_first_matching_branch_wins():
    f = parse("pw(u<=1 -> fb(1); u>=1 -> fb(2))")
    assert expressions.evaluate(f, 1.0, ctx).base == 1.0


def test_base_view():
    mono_s = expressions.base_view(parse("mono(s)"), ctx)
    assert mono_s(9.0) == pytest.approx(3.0)
    assert expressions.base_view(parse("fb(3)"), ctx)(5.0) == 3.0
    shifted = expressions.base_view(parse("mono(s) + fb(1)"), ctx)
    np.testing.assert_allclose(shifted(np.array([0.0, 4.0])), [1.0, 3.0])


def test_negative_points_rejected():
    with pytest.raises(EvaluationError):
        expressions.evaluate(parse("mono(1)"), -1.0, ctx)


def test_pole_reported():
    with pytest.raises(EvaluationError):
        expressions.evaluate(parse("mono(-1)"), 0.0, ctx)
    with pytest.raises(EvaluationError):
        expressions.evaluate(parse("subst(mono(0.5); u - 1)"), 0.0, ctx)


@settings(max_examples=200)
@given(st.floats(min_value=0.0, max_value=10.0), st.sampled_from(sorted(DEFAULT_CORPUS)))
def test_evaluate_matches_base_view(u, name):
    f = parse(DEFAULT_CORPUS[name])
    assert expressions.evaluate(f, u, ctx).base == expressions.base_view(f, ctx)(u)


def test_scalar_view():
    g = expressions.scalar_view(parse_scalar("pow(u, 2) - 3 * u"))
    assert g(2.0) == pytest.approx(-2.0)
    with pytest.raises(EvaluationError):
        expressions.scalar_view(parse_scalar("1 / u"))(0.0)


### --- Structure Components --- ###
def test_bind_s():
    assert expressions.bind_s(parse("mono(s)"), 0.3) == Mono(k=KNum(value=0.3))


def test_breakpoints():
    assert expressions.breakpoints(parse(EXAMPLE42)) == [1.0]
    assert expressions.breakpoints(parse("mono(1)")) == []


def test_combine_thm35_pattern_constant():
    assert combine("thm35_pattern", parse("fv(1)"), s=0.5) == Mono(k=KNum(value=1.0))


def test_combine_product_of_monomials():
    product = combine("product", parse("mono(s)"), parse("mono(s)"))
    assert isinstance(product, Mono)
    assert expressions.resolve_k(product.k, 0.3) == pytest.approx(0.6)


def test_combine_compose():
    h = combine("compose", parse("mono(s)"), parse_scalar("u * u"))
    assert isinstance(h, Subst)
    assert expressions.evaluate(h, 3.0, ctx).base == pytest.approx(3.0)


def test_combine_sum_and_max():
    total = combine("sum", parse("mono(s)"), parse("fb(1)"))
    assert expressions.evaluate(total, 4.0, ctx).base == pytest.approx(3.0)
    top = combine("max", parse("mono(1)"), parse("fb(2)"))
    assert expressions.evaluate(top, 1.0, ctx).base == 2.0


def test_combine_errors():
    with pytest.raises(CombineError):
        combine("sum", parse("mono(1)"))
    with pytest.raises(CombineError):
        combine("compose", parse("mono(1)"), parse("mono(1)"))
    with pytest.raises(CombineError):
        combine("thm35_pattern", parse("fv(1)"), s=1.0)
    with pytest.raises(CombineError):
        combine("quotient", parse("mono(1)"), parse("mono(1)"))
