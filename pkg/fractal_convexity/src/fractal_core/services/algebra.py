"""
Arithmetic on the fractal real line R^alpha.

Elements a^alpha are stored by their base a, which turns the addition and
multiplication rules of R^alpha into ordinary real arithmetic on bases.
Bare real factors such as Gamma(1 + alpha) act on values instead.
"""

from typing import Literal

import numpy as np
from scipy.special import gamma as sp_gamma

from fractal_core.exceptions import DivisionByZeroElement, GammaDomainError
from fractal_core.models import AlphaContext, FractalScalar, Ordering

ABSOLUTE_FLOOR = 1e-300

ZERO = FractalScalar(base=0.0)
ONE = FractalScalar(base=1.0)


def to_value(base, alpha: float):
    """Signed power sign(a)|a|^alpha, for floats and numpy arrays"""
    return np.sign(base) * np.abs(base) ** alpha


def to_base(value, alpha: float):
    """Inverse of to_value: sign(v)|v|^(1/alpha)"""
    return np.sign(value) * np.abs(value) ** (1.0 / alpha)


def make_scalar(
    mode: Literal["base", "value"], x: float, ctx: AlphaContext
) -> FractalScalar:
    """
    Builds an element either from its base or from its value
    """
    match mode:
        case "base":
            return FractalScalar(base=float(x))
        case "value":
            return FractalScalar(base=float(to_base(x, ctx.alpha)))
        case _:
            raise ValueError(f"Invalid mode: {mode}. Must be one of ['base', 'value']")


def value(x: FractalScalar, ctx: AlphaContext) -> float:
    return float(to_value(x.base, ctx.alpha))


def bases_close(a: float, b: float, tol: float) -> bool:
    """Relative tolerance band with an absolute floor against subnormal noise"""
    return abs(a - b) <= max(tol * max(abs(a), abs(b)), ABSOLUTE_FLOOR)


def is_zero(x: FractalScalar, ctx: AlphaContext) -> bool:
    return bases_close(x.base, 0.0, ctx.tol_base)


def field_op(
    op: Literal["add", "sub", "mul", "div"],
    lhs: FractalScalar,
    rhs: FractalScalar,
    ctx: AlphaContext,
) -> FractalScalar:
    """
    Field operations of R^alpha: (a+b)^alpha and (ab)^alpha act on bases
    """
    match op:
        case "add":
            return FractalScalar(base=lhs.base + rhs.base)
        case "sub":
            return FractalScalar(base=lhs.base - rhs.base)
        case "mul":
            return FractalScalar(base=lhs.base * rhs.base)
        case "div":
            if is_zero(rhs, ctx):
                raise DivisionByZeroElement("division by the zero element 0^alpha")
            return FractalScalar(base=lhs.base / rhs.base)
        case _:
            raise ValueError(
                f"Invalid operation: {op}. Must be one of ['add', 'sub', 'mul', 'div']"
            )


def scalar_scale(c: float, x: FractalScalar, ctx: AlphaContext) -> FractalScalar:
    """
    Multiplies the value of x by the real c; the result is re-based
    """
    scaled_value = c * value(x, ctx)
    return FractalScalar(base=float(to_base(scaled_value, ctx.alpha)))


def compare(lhs: FractalScalar, rhs: FractalScalar, ctx: AlphaContext) -> Ordering:
    """
    Orders elements by base, with the tol_base equality band. On non-negative
    bases this agrees with the order of values.
    """
    if bases_close(lhs.base, rhs.base, ctx.tol_base):
        return Ordering.EQUAL
    return Ordering.LESS if lhs.base < rhs.base else Ordering.GREATER


def gamma(t: float) -> float:
    """
    Gamma(t) = integral_0^inf x^(t-1) e^(-x) dx, for t > 0
    """
    if not t > 0:
        raise GammaDomainError(f"Gamma is only defined here for t > 0, got {t}")
    return float(sp_gamma(t))


def gamma_factor(ctx: AlphaContext) -> float:
    """Gamma(1 + alpha), the prefactor of the local fractional operators"""
    return gamma(1.0 + ctx.alpha)
