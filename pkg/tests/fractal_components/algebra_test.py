import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fractal_core.exceptions import DivisionByZeroElement, GammaDomainError
from fractal_core.models import AlphaContext, FractalScalar, Ordering
from fractal_core.services import algebra

ctx = AlphaContext(alpha=0.5, s=0.5)

bases = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
alphas = st.floats(min_value=0.05, max_value=1.0)
non_negative = st.one_of(st.just(0.0), st.floats(min_value=1e-100, max_value=1e3))


def close(x: FractalScalar, y: FractalScalar, tol: float = 1e-9) -> bool:
    return algebra.bases_close(x.base, y.base, tol) or abs(x.base - y.base) < 1e-9


### --- Algebra Components --- ###
def test_make_scalar_from_value():
    x = algebra.make_scalar("value", 2.0, ctx)
    assert x.base == pytest.approx(4.0)
    assert algebra.value(x, ctx) == pytest.approx(2.0)


def test_make_scalar_invalid_mode():
    with pytest.raises(ValueError):
        algebra.make_scalar("exponent", 1.0, ctx)


def test_negative_base_value_is_signed():
    x = algebra.make_scalar("base", -4.0, ctx)
    assert algebra.value(x, ctx) == pytest.approx(-2.0)


def test_field_ops_act_on_bases():
    two, three = FractalScalar(base=2.0), FractalScalar(base=3.0)
    assert algebra.field_op("add", two, three, ctx).base == 5.0
    assert algebra.field_op("sub", two, three, ctx).base == -1.0
    assert algebra.field_op("mul", two, three, ctx).base == 6.0
    assert algebra.field_op("div", FractalScalar(base=6.0), three, ctx).base == 2.0


def test_division_by_zero_element():
    with pytest.raises(DivisionByZeroElement):
        algebra.field_op("div", algebra.ONE, algebra.ZERO, ctx)


def test_field_op_unknown():
    with pytest.raises(ValueError):
        algebra.field_op("pow", algebra.ONE, algebra.ONE, ctx)


def test_scalar_scale_acts_on_values():
    scaled = algebra.scalar_scale(algebra.gamma(1.5), algebra.ONE, ctx)
    assert algebra.value(scaled, ctx) == pytest.approx(0.8862269254527580, rel=1e-12)
    six = algebra.scalar_scale(2.0, algebra.make_scalar("value", 3.0, ctx), ctx)
    assert algebra.value(six, ctx) == pytest.approx(6.0)


def test_compare():
    assert algebra.compare(FractalScalar(base=1.0), FractalScalar(base=2.0), ctx) is Ordering.LESS
    assert algebra.compare(FractalScalar(base=-1.0), algebra.ZERO, ctx) is Ordering.LESS
    assert algebra.compare(FractalScalar(base=5.0), FractalScalar(base=5.0 * (1 + 1e-14)), ctx) is Ordering.EQUAL
    assert algebra.compare(FractalScalar(base=3.0), FractalScalar(base=2.0), ctx) is Ordering.GREATER


# --- Gamma --- #
@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 1.5, 2.0, 7.3, 25.0, 50.0])
def test_gamma_against_mpmath(t):
    assert algebra.gamma(t) == pytest.approx(float(mpmath.gamma(t)), rel=1e-12)


def test_gamma_spot_values():
    assert algebra.gamma(1.0) == pytest.approx(1.0)
    assert algebra.gamma(2.0) == pytest.approx(1.0)
    assert algebra.gamma(1.5) == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-14)


@pytest.mark.parametrize("t", [0.0, -1.0, -0.5])
def test_gamma_domain(t):
    with pytest.raises(GammaDomainError):
        algebra.gamma(t)


def test_invalid_context():
    with pytest.raises(ValueError):
        AlphaContext(alpha=1.5)
    with pytest.raises(ValueError):
        AlphaContext(tol_base=1e-6, tol_violation=1e-9)


# --- Arithmetic laws --- #
LAW_ALPHAS = [0.3, 0.5, 0.8]


@pytest.mark.parametrize("alpha", LAW_ALPHAS)
@given(bases, bases, bases)
def test_addition_laws(alpha, a, b, c):
    ctx = AlphaContext(alpha=alpha)
    x, y, z = FractalScalar(base=a), FractalScalar(base=b), FractalScalar(base=c)
    assert algebra.field_op("add", x, y, ctx) == algebra.field_op("add", y, x, ctx)
    left = algebra.field_op("add", algebra.field_op("add", x, y, ctx), z, ctx)
    right = algebra.field_op("add", x, algebra.field_op("add", y, z, ctx), ctx)
    assert close(left, right)
    assert algebra.field_op("add", x, algebra.ZERO, ctx) == x


@pytest.mark.parametrize("alpha", LAW_ALPHAS)
@given(bases, bases, bases)
def test_multiplication_laws(alpha, a, b, c):
    ctx = AlphaContext(alpha=alpha)
    x, y, z = FractalScalar(base=a), FractalScalar(base=b), FractalScalar(base=c)
    assert algebra.field_op("mul", x, y, ctx) == algebra.field_op("mul", y, x, ctx)
    assert algebra.field_op("mul", x, algebra.ONE, ctx) == x
    distributed = algebra.field_op(
        "add", algebra.field_op("mul", x, y, ctx), algebra.field_op("mul", x, z, ctx), ctx
    )
    factored = algebra.field_op("mul", x, algebra.field_op("add", y, z, ctx), ctx)
    assert abs(distributed.base - factored.base) <= 1e-9 * max(1.0, abs(a) * (abs(b) + abs(c)))


@given(non_negative, non_negative, alphas)
def test_value_multiplication_for_non_negative(a, b, alpha):
    local = AlphaContext(alpha=alpha)
    x, y = FractalScalar(base=a), FractalScalar(base=b)
    product = algebra.value(algebra.field_op("mul", x, y, local), local)
    assert product == pytest.approx(algebra.value(x, local) * algebra.value(y, local), rel=1e-12, abs=1e-300)


@given(st.floats(min_value=0.0, max_value=1e6), alphas)
def test_value_round_trip(a, alpha):
    local = AlphaContext(alpha=alpha)
    x = FractalScalar(base=a)
    back = algebra.make_scalar("value", algebra.value(x, local), local)
    assert back.base == pytest.approx(a, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("alpha", LAW_ALPHAS)
@given(bases, bases)
def test_order_matches_value_order(alpha, a, b):
    local = AlphaContext(alpha=alpha)
    x, y = FractalScalar(base=a), FractalScalar(base=b)
    order = algebra.compare(x, y, local)
    if order is Ordering.LESS:
        assert algebra.value(x, local) < algebra.value(y, local)
    elif order is Ordering.GREATER:
        assert algebra.value(x, local) > algebra.value(y, local)
