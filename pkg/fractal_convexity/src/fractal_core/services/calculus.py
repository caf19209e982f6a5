"""
Local fractional continuity, derivative and integral on R^alpha.

Every operator reduces to base space: the difference quotient of order
alpha has value Gamma(1+alpha) * sign(r)|r|^alpha where r is the ordinary
difference quotient of the bases, and the Riemann sum of f(t_j)(dt_j)^alpha
has base sum_j F(t_j) dt_j. Limits are taken on the base quotients and
mapped to values at the end.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from fractal_core.exceptions import PreconditionError
from fractal_core.models import (
    AlphaContext,
    CalculusResult,
    ContinuityReport,
    FtcResult,
    LimitScheme,
    MeshSpec,
    RatioLimitResult,
)
from fractal_core.services.algebra import gamma_factor, to_base, to_value
from fractal_core.services.expressions import BaseFunction, FunctionNode, base_view

logger = logging.getLogger(__name__)

FractalFunction = Union[FunctionNode, BaseFunction]

DEFAULT_EPS_GRID = [10.0**-k for k in range(1, 7)]
PROBE_DELTAS = [10.0**-j for j in range(1, 41)]
# deltas below this multiple of |x0| no longer separate x0 from its neighbours
DELTA_RELATIVE_FLOOR = 1e-12
PROBE_FRACTIONS = np.linspace(1.0 / 16.0, 1.0, 16)


def as_base_function(f: FractalFunction, ctx: AlphaContext) -> BaseFunction:
    if callable(f):
        return f
    return base_view(f, ctx)


def _bases(F: BaseFunction, points) -> np.ndarray:
    return np.asarray(F(np.asarray(points, dtype=float)), dtype=float)


# === Limits ===
def _extrapolate(sequence: np.ndarray, ratio: float, order: int) -> np.ndarray:
    """One Richardson step for a sequence with error ~ h^order, h shrinking by ratio"""
    factor = (1.0 / ratio) ** order
    return (factor * sequence[1:] - sequence[:-1]) / (factor - 1.0)


def _stable_limit(
    base_sequence: np.ndarray, ctx: AlphaContext, scale: float, rel: float
) -> Tuple[float, float, int, bool]:
    """
    Picks the most stable term of a base-space sequence, judged on values.
    Returns (base, estimate, levels_used, converged).
    """
    values = scale * to_value(base_sequence, ctx.alpha)
    if len(values) < 2 or not np.all(np.isfinite(values)):
        finite = np.isfinite(values)
        if not np.any(finite):
            return float("nan"), float("inf"), len(values), False
        last = int(np.flatnonzero(finite)[-1])
        return float(base_sequence[last]), float("inf"), last + 1, False
    differences = np.abs(np.diff(values))
    best = int(np.argmin(differences))
    estimate = float(differences[best])
    chosen = best + 1
    converged = estimate <= rel * max(abs(float(values[chosen])), 1.0)
    return float(base_sequence[chosen]), estimate, chosen + 1, converged


def _quotient_sequence(
    F: BaseFunction, x0: float, scheme: LimitScheme
) -> Tuple[np.ndarray, int, float]:
    h0 = scheme.h0 if x0 == 0 else min(scheme.h0, x0 / 2.0)
    steps = np.array([h0 * scheme.ratio**j for j in range(scheme.terms)])
    f0 = _bases(F, [x0])[0]
    right = (_bases(F, x0 + steps) - f0) / steps
    if x0 == 0:
        return right, 1, h0
    # left quotient: the increment (x - x0)^alpha has the negative base x - x0
    left = (_bases(F, x0 - steps) - f0) / (-steps)
    return (right + left) / 2.0, 2, h0


def lf_derivative(
    f: FractalFunction,
    x0: float,
    ctx: AlphaContext,
    scheme: Optional[LimitScheme] = None,
) -> CalculusResult:
    """
    Local fractional derivative of order alpha at x0 >= 0 (right-sided at 0)
    """
    scheme = scheme or LimitScheme()
    if x0 < 0:
        raise PreconditionError("the derivative is only defined on u >= 0")
    F = as_base_function(f, ctx)
    with np.errstate(all="ignore"):
        quotients, order, _ = _quotient_sequence(F, x0, scheme)
        sequence = (
            _extrapolate(quotients, scheme.ratio, order) if scheme.extrapolation else quotients
        )
    prefactor = gamma_factor(ctx)
    base_ratio, estimate, levels, converged = _stable_limit(
        sequence, ctx, prefactor, scheme.rel_converge
    )
    value = prefactor * float(to_value(base_ratio, ctx.alpha))
    if not converged:
        logger.warning("derivative at x0=%g did not stabilise (estimate %.3g)", x0, estimate)
    return CalculusResult(
        value=value,
        base=float(to_base(value, ctx.alpha)),
        convergence_estimate=estimate,
        levels_used=levels,
        converged=converged,
    )


# === Integral ===
def riemann_base(
    F: BaseFunction, a: float, b: float, mesh: MeshSpec
) -> Tuple[float, float, int, bool]:
    """
    Base of the fractal Riemann sum over [a, b] with midpoint sampling, so
    endpoints are never evaluated. Returns (base, estimate, levels, converged).
    """
    if a == b:
        return 0.0, 0.0, 1, True
    previous = None
    estimate = float("inf")
    n = mesh.n_intervals
    for level in range(mesh.refinement_levels):
        width = (b - a) / n
        midpoints = a + (np.arange(n) + 0.5) * width
        total = float(np.sum(_bases(F, midpoints)) * width)
        if previous is not None:
            estimate = abs(total - previous)
            if estimate <= mesh.rel_stop * max(abs(total), 1e-300):
                return total, estimate, level + 1, True
        previous = total
        n *= 2
    return previous, estimate, mesh.refinement_levels, False


def oriented_base(F: BaseFunction, a: float, b: float, mesh: MeshSpec) -> float:
    if b >= a:
        return riemann_base(F, a, b, mesh)[0]
    return -riemann_base(F, b, a, mesh)[0]


def lf_integral(
    f: FractalFunction,
    a: float,
    b: float,
    ctx: AlphaContext,
    mesh: Optional[MeshSpec] = None,
) -> CalculusResult:
    """
    Local fractional integral of order alpha over [a, b]
    """
    mesh = mesh or MeshSpec()
    if a > b:
        raise PreconditionError(f"integration bounds must satisfy a <= b, got [{a}, {b}]")
    F = as_base_function(f, ctx)
    total, estimate, levels, converged = riemann_base(F, a, b, mesh)
    value = float(to_value(total, ctx.alpha)) / gamma_factor(ctx)
    if not converged:
        logger.warning(
            "integral over [%g, %g] not converged after %d levels (estimate %.3g)",
            a,
            b,
            levels,
            estimate,
        )
    return CalculusResult(
        value=value,
        base=float(to_base(value, ctx.alpha)),
        convergence_estimate=estimate,
        levels_used=levels,
        converged=converged,
    )


# === Continuity ===
def _separating_deltas(x0: float) -> List[float]:
    floor = abs(x0) * DELTA_RELATIVE_FLOOR
    return [delta for delta in PROBE_DELTAS if delta >= floor] or [floor]


def continuity_probe(
    f: FractalFunction,
    x0: float,
    ctx: AlphaContext,
    eps_grid: Optional[Sequence[float]] = None,
) -> ContinuityReport:
    """
    For every eps, looks for a delta with |f(x) - f(x0)| < eps^alpha on
    |x - x0| < delta, i.e. |F(x) - F(x0)| < eps in base space
    """
    eps_grid = sorted(eps_grid or DEFAULT_EPS_GRID, reverse=True)
    F = as_base_function(f, ctx)
    f0 = _bases(F, [x0])[0]
    sups = []
    for delta in _separating_deltas(x0):
        offsets = delta * PROBE_FRACTIONS
        points = x0 + offsets
        left = x0 - offsets
        points = np.concatenate([points, left[left >= 0]])
        points = points[points != x0]
        if points.size == 0:
            break
        sups.append(float(np.max(np.abs(_bases(F, points) - f0))))
    sups = np.array(sups)
    obstructing = None
    for eps in eps_grid:
        if not np.any(sups < eps):
            obstructing = eps
            break
    report = ContinuityReport(
        x0=x0,
        continuous=obstructing is None,
        obstructing_eps=obstructing,
        jump_estimate=float(sups[-1]),
        eps_checked=list(eps_grid),
    )
    if not report.continuous:
        logger.info("discontinuity at x0=%g, jump %.3g", x0, report.jump_estimate)
    return report


def right_limit(
    f: FractalFunction,
    x0: float,
    ctx: AlphaContext,
    terms: int = 40,
    rel: float = 1e-6,
) -> CalculusResult:
    """
    f(x0+) from a geometric ladder of steps down to the smallest one that
    still moves x0, keeping the most stable term
    """
    F = as_base_function(f, ctx)
    floor = max(abs(x0) * DELTA_RELATIVE_FLOOR, 1e-300)
    steps = np.geomspace(1e-2, floor, terms)
    base, estimate, levels, converged = _stable_limit(_bases(F, x0 + steps), ctx, 1.0, rel)
    if not converged:
        logger.warning("f(%g+) did not stabilise (estimate %.3g)", x0, estimate)
    return CalculusResult(
        value=float(to_value(base, ctx.alpha)),
        base=base,
        convergence_estimate=estimate,
        levels_used=levels,
        converged=converged,
    )


# === Ratio limit ===
def _one_sided_limit(F: BaseFunction, x0: float) -> List[float]:
    tiny = max(abs(x0) * 4e-16, 1e-300)
    limits = [float(_bases(F, [x0 + tiny])[0])]
    if x0 > 0:
        limits.append(float(_bases(F, [x0 - tiny])[0]))
    return limits


def ratio_limit(
    f: FractalFunction,
    g: FractalFunction,
    x0: float,
    ctx: AlphaContext,
    scheme: Optional[LimitScheme] = None,
) -> RatioLimitResult:
    """
    Samples lim f^(alpha)/g^(alpha) as x -> x0+ together with lim f/g
    """
    scheme = scheme or LimitScheme(terms=12)
    F, G = as_base_function(f, ctx), as_base_function(g, ctx)
    for name, H in (("f", F), ("g", G)):
        if any(abs(limit) > ctx.tol_violation for limit in _one_sided_limit(H, x0)):
            raise PreconditionError(f"{name} does not tend to 0^alpha at x0={x0}")
    steps = np.array(scheme.steps())
    points = x0 + steps
    derivative_ratio, direct_ratio = [], []
    for point, step in zip(points, steps):
        inner = LimitScheme(h0=step / 4.0, terms=16)
        df = lf_derivative(F, point, ctx, inner).base
        dg = lf_derivative(G, point, ctx, inner).base
        if abs(dg) <= 1e-300:
            raise PreconditionError(f"g^(alpha) vanishes at x={point:g}")
        derivative_ratio.append(df / dg)
        g_base = float(_bases(G, [point])[0])
        if g_base == 0:
            raise PreconditionError(f"g vanishes at x={point:g}")
        direct_ratio.append(float(_bases(F, [point])[0]) / g_base)

    results = []
    for sequence in (np.array(derivative_ratio), np.array(direct_ratio)):
        extrapolated = _extrapolate(sequence, scheme.ratio, 1) if scheme.extrapolation else sequence
        base, estimate, levels, converged = _stable_limit(
            extrapolated, ctx, 1.0, scheme.rel_converge
        )
        results.append(
            CalculusResult(
                value=float(to_value(base, ctx.alpha)),
                base=base,
                convergence_estimate=estimate,
                levels_used=levels,
                converged=converged,
            )
        )
    by_derivative, direct = results
    agree = abs(by_derivative.value - direct.value) <= 1e-4 * max(
        1.0, abs(by_derivative.value), abs(direct.value)
    )
    if not agree:
        logger.warning("ratio limits disagree at x0=%g", x0)
    return RatioLimitResult(derivative_ratio=by_derivative, direct_ratio=direct, agree=agree)


# === Fundamental theorem ===
def integral_function(
    f: FractalFunction,
    a: float,
    anchor: float,
    ctx: AlphaContext,
    mesh: Optional[MeshSpec] = None,
) -> BaseFunction:
    """
    u -> base of lf_integral(f, a, u). Increments are integrated from the
    anchor, using interval additivity, so nearby values share one base term.
    """
    mesh = mesh or MeshSpec()
    F = as_base_function(f, ctx)
    head = oriented_base(F, a, anchor, mesh)
    rescale = gamma_factor(ctx) ** (1.0 / ctx.alpha)

    def antiderivative(u):
        points = np.atleast_1d(np.asarray(u, dtype=float))
        totals = np.array([head + oriented_base(F, anchor, point, mesh) for point in points])
        return totals / rescale

    return antiderivative


def ftc_report(
    f: FractalFunction,
    a: float,
    x: float,
    ctx: AlphaContext,
    mesh: Optional[MeshSpec] = None,
    scheme: Optional[LimitScheme] = None,
) -> FtcResult:
    """
    d^alpha/dx^alpha (aI_x f) at x, compared with f(x)
    """
    if not a < x:
        raise PreconditionError(f"need a < x, got a={a}, x={x}")
    mesh = mesh or MeshSpec()
    antiderivative = integral_function(f, a, x, ctx, mesh)
    derivative = lf_derivative(antiderivative, x, ctx, scheme)
    target = float(to_value(_bases(as_base_function(f, ctx), [x])[0], ctx.alpha))
    residual = abs(derivative.value - target) / max(1.0, abs(target))
    logger.debug("ftc residual at x=%g: %.3g", x, residual)
    return FtcResult(
        **derivative.model_dump(),
        a=a,
        x=x,
        target_value=target,
        residual=residual,
    )


def ftc_residual(
    f: FractalFunction,
    a: float,
    x: float,
    ctx: AlphaContext,
    mesh: Optional[MeshSpec] = None,
    scheme: Optional[LimitScheme] = None,
) -> float:
    """
    |d^alpha/dx^alpha (aI_x f) - f(x)| in value, relative to max(1, |f(x)|)
    """
    return ftc_report(f, a, x, ctx, mesh, scheme).residual
