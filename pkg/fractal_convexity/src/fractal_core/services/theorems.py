"""
Executable statements of the convexity theorems.

Each check verifies the hypotheses on grids or with the certifier, and only
then tests the conclusion. Both steps can only falsify, so "holds" means no
counterexample was found within the budget.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from fractal_core.models import (
    AlphaContext,
    ConclusionStatus,
    ConvexityVerdict,
    HypothesisCheck,
    KNum,
    MeshSpec,
    Mono,
    Product,
    SandwichReport,
    SandwichRow,
    SearchBudget,
    Sense,
    SPow,
    Subst,
    SVar,
    TheoremReport,
)
from fractal_core.services import algebra
from fractal_core.services.calculus import continuity_probe, lf_integral, right_limit
from fractal_core.services.certifier import certify, certify_classical, certify_relaxed
from fractal_core.services.expressions import (
    BaseFunction,
    FunctionNode,
    ScalarNode,
    base_view,
    bind_s,
    breakpoints,
    combine,
    scalar_view,
)
from fractal_core.utils.grids import positive_axis, search_axis

logger = logging.getLogger(__name__)

CITATIONS = {
    "thm31a": "Theorem 3.1(a): f in GK_s^1 is non-decreasing on (0, +inf) and f(0+) <= f(0)",
    "thm31b": "Theorem 3.1(b): f in GK_s^2 is non-negative on [0, +inf)",
    "bivariate": "F generalized convex in each variable (display before Theorem 3.2)",
    "thm32": "Theorem 3.2: h(u) = F(f(u), g(u)) is in GK_s^1",
    "thm33a": "Theorem 3.3(a): relaxed first-sense inequality iff f(0) <= 0^alpha",
    "thm33b": "Theorem 3.3(b): relaxed second-sense inequality iff f(0) = 0^alpha",
    "thm34a": "Theorem 3.4(a): f in GK_s^2 with f(0) = 0^alpha is in GK_s^1",
    "thm34b": "Theorem 3.4(b): f in GK_s2^2 with f(0) = 0^alpha is in GK_s1^2",
    "thm34c": "Theorem 3.4(c): f in GK_s2^1 with f(0) <= 0^alpha is in GK_s1^1",
    "thm35": "Theorem 3.5: u^((s/(1-s)) alpha) p(u) is in GK_s^1",
    "thm36a": "Theorem 3.6(a): f o g is in GK_s^1 with s = s1 s2",
    "thm36b": "Theorem 3.6(b): fg is in GK_s^1 with s = min(s1, s2)",
    "remark33": "Remark 3.3: f o g is in GK_s^2 for non-decreasing f in GK_s^2 and convex g >= 0",
    "remark34": "Remark 3.4: product of non-negative, equally monotone generalized convex functions",
    "phi_type": "phi-type function: f(0) = 0^alpha, local fractional continuous, non-decreasing",
    "cor31": "Corollary 3.1: Phi o g is in GK_s^1",
    "cor32": "Corollary 3.2: f o Phi is in GK_s^2",
    "thm37": "Theorem 3.7: f(2^(-1/s) u) <= Phi(u^s) <= f(u)",
}

ScalarFunction = Union[ScalarNode, Callable]


# === Bivariate functions ===
@dataclass(frozen=True)
class BivariateFn:
    """F: R x R -> R^alpha, given by the base of F(x, y)"""

    name: str
    base: Callable[[np.ndarray, np.ndarray], np.ndarray]


SUM_ALPHA = BivariateFn("sum_alpha", lambda x, y: x + y)
MAX_ALPHA = BivariateFn("max_alpha", np.maximum)
PRODUCT_ALPHA = BivariateFn("product_alpha", lambda x, y: x * y)

BIVARIATE_CATALOG = {fn.name: fn for fn in (SUM_ALPHA, MAX_ALPHA, PRODUCT_ALPHA)}


def bivariate_from_pair(
    f: FunctionNode, g: FunctionNode, kind: Literal["sum", "product", "max"], ctx: AlphaContext
) -> BivariateFn:
    """F(x, y) = f(x) (+|*|max) g(y), for x, y >= 0"""
    F, G = base_view(f, ctx), base_view(g, ctx)
    joins = {"sum": np.add, "product": np.multiply, "max": np.maximum}
    join = joins[kind]
    return BivariateFn(
        f"{kind}_pair", lambda x, y: join(F(np.abs(x)), G(np.abs(y)))
    )


# === Shared helpers ===
def _search_only(f, sense: Sense, ctx: AlphaContext, budget: SearchBudget) -> ConvexityVerdict:
    return certify(f, sense, ctx, budget, use_patterns=False)


def _membership(name: str, verdict: ConvexityVerdict) -> HypothesisCheck:
    detail = verdict.status.value
    if verdict.witness is not None:
        detail += f" (margin {verdict.witness.margin:.3g})"
    return HypothesisCheck(name=name, passed=not verdict.is_violation, detail=detail)


def _monotone(values: np.ndarray, tol: float) -> Tuple[bool, Optional[int]]:
    drops = np.flatnonzero(np.diff(values) < -tol)
    return (True, None) if drops.size == 0 else (False, int(drops[0]))


def _monotone_check(name: str, F: BaseFunction, points: np.ndarray, tol: float) -> HypothesisCheck:
    ok, index = _monotone(np.asarray(F(points)), tol)
    detail = None if ok else f"drop between u={points[index]:g} and u={points[index + 1]:g}"
    return HypothesisCheck(name=name, passed=ok, detail=detail)


def _nonnegative_check(name: str, F: BaseFunction, points: np.ndarray, tol: float) -> HypothesisCheck:
    values = np.asarray(F(points))
    bad = np.flatnonzero(values < -tol)
    detail = None if bad.size == 0 else f"negative at u={points[bad[0]]:g}"
    return HypothesisCheck(name=name, passed=bad.size == 0, detail=detail)


def _zero_at_origin(name: str, F: BaseFunction, ctx: AlphaContext, allow_negative: bool = False) -> HypothesisCheck:
    f0 = float(np.asarray(F(np.array([0.0])))[0])
    passed = f0 <= ctx.tol_base if allow_negative else algebra.bases_close(f0, 0.0, ctx.tol_base)
    return HypothesisCheck(name=name, passed=passed, detail=f"f(0) base {f0:g}")


def _report(
    theorem_id: str,
    hypotheses: List[HypothesisCheck],
    conclusion: Optional[ConvexityVerdict] = None,
    holds: Optional[bool] = None,
    details: Optional[dict] = None,
) -> TheoremReport:
    details = dict(details or {})
    if not all(h.passed for h in hypotheses):
        status = ConclusionStatus.HYPOTHESIS_UNMET
    elif conclusion is not None:
        status = ConclusionStatus.FALSIFIED if conclusion.is_violation else ConclusionStatus.HOLDS
        details["verdict"] = conclusion.model_dump(mode="json", by_alias=True)
    else:
        status = ConclusionStatus.HOLDS if holds else ConclusionStatus.FALSIFIED
    report = TheoremReport(
        theorem_id=theorem_id,
        citation=CITATIONS[theorem_id],
        hypotheses_checked=hypotheses,
        conclusion_status=status,
        witness=None if conclusion is None or status is not ConclusionStatus.FALSIFIED else conclusion.witness,
        details=details,
    )
    log = logger.warning if status is ConclusionStatus.FALSIFIED else logger.info
    log("%s: %s", theorem_id, status.value)
    return report


# === Theorem 3.1 ===
def check_thm31(
    f: FunctionNode, part: Literal["a", "b"], ctx: AlphaContext, budget: Optional[SearchBudget] = None
) -> TheoremReport:
    """
    (a) GK_s^1 members are non-decreasing on (0, +inf), f(0+) <= f(0), and
    f(tu) <= f(u) for t in (0, 1]; (b) GK_s^2 members are non-negative
    """
    budget = budget or SearchBudget()
    sense = Sense.FIRST if part == "a" else Sense.SECOND
    hypotheses = [
        HypothesisCheck(name="0 < s < 1", passed=0 < ctx.s < 1, detail=f"s = {ctx.s}"),
        _membership(f"f in GK_s^{1 if part == 'a' else 2}", _search_only(f, sense, ctx, budget)),
    ]
    F = base_view(f, ctx)
    tol = ctx.tol_violation
    if part == "b":
        check = _nonnegative_check("non-negative", F, search_axis(budget.grid_n, budget.u_max), tol)
        return _report(f"thm31{part}", hypotheses, holds=check.passed, details={"check": check.detail})

    points = positive_axis(budget.grid_n, budget.u_max)
    monotone = _monotone_check("non-decreasing on (0, u_max]", F, points, tol)
    limit_at_0 = right_limit(f, 0.0, ctx)
    limit = limit_at_0.base
    f0 = float(F(np.array([0.0]))[0])
    ts = np.linspace(0.0, 1.0, 33)[1:]
    T, U = np.meshgrid(ts, points, indexing="ij")
    gaps = F(T.ravel() * U.ravel()) - F(U.ravel())
    scaling_ok = bool(np.all(gaps <= tol))
    details = {
        "limit_at_0_plus": limit,
        "limit_estimate": limit_at_0.convergence_estimate,
        "f_at_0": f0,
        "strict_gap_at_0": limit < f0 - tol,
        "monotone": monotone.passed,
        "monotone_detail": monotone.detail,
        "scaling_f_tu_le_f_u": scaling_ok,
        "max_scaling_gap": float(np.max(gaps)),
    }
    if ctx.s == 1:
        details["remark"] = "at s = 1 members need not be monotone or non-negative"
    holds = monotone.passed and limit <= f0 + tol and scaling_ok
    return _report("thm31a", hypotheses, holds=holds, details=details)


# === Bivariate convexity and Theorem 3.2 ===
def check_bivariate_convex(
    F: BivariateFn,
    s: float,
    ctx: AlphaContext,
    box: float = 4.0,
    grid_n: int = 7,
    lambda_n: int = 6,
    drop_s_exponents: bool = False,
) -> TheoremReport:
    """
    F(l1^s u + l2^s v, l1^s r + l2^s t) <= l1^(s alpha) F(u, r) + l2^(s alpha) F(v, t)
    over a grid of [-box, box]^4 and independent l1, l2 in [0, 1]
    """
    axis = np.unique(np.concatenate((np.linspace(-box, box, grid_n), [0.0])))
    lambdas = np.linspace(0.0, 1.0, lambda_n)
    U, V, R, T, L1, L2 = (x.ravel() for x in np.meshgrid(axis, axis, axis, axis, lambdas, lambdas, indexing="ij"))
    w1, w2 = np.power(L1, s), np.power(L2, s)
    inner1, inner2 = (L1, L2) if drop_s_exponents else (w1, w2)
    lhs = F.base(inner1 * U + inner2 * V, inner1 * R + inner2 * T)
    rhs = w1 * F.base(U, R) + w2 * F.base(V, T)
    margins = lhs - rhs
    worst = int(np.argmax(margins))
    holds = bool(margins[worst] <= ctx.tol_violation)
    details = {
        "function": F.name,
        "drop_s_exponents": drop_s_exponents,
        "max_margin": float(margins[worst]),
        "points": int(margins.size),
    }
    if not holds:
        details["counterexample"] = {
            "u": float(U[worst]),
            "v": float(V[worst]),
            "r": float(R[worst]),
            "t": float(T[worst]),
            "lambda1": float(L1[worst]),
            "lambda2": float(L2[worst]),
        }
    return _report("bivariate", [], holds=holds, details=details)


def _bivariate_monotone(F: BivariateFn, box: float, n: int, tol: float) -> HypothesisCheck:
    axis = np.linspace(-box, box, n)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    values = F.base(X, Y)
    ok = bool(np.all(np.diff(values, axis=0) >= -tol) and np.all(np.diff(values, axis=1) >= -tol))
    return HypothesisCheck(name="F non-decreasing in each variable", passed=ok)


def check_thm32(
    F: BivariateFn,
    f: ScalarFunction,
    g: ScalarFunction,
    s: float,
    ctx: AlphaContext,
    budget: Optional[SearchBudget] = None,
) -> TheoremReport:
    budget = budget or SearchBudget()
    fv, gv = scalar_view(f), scalar_view(g)
    bivariate = check_bivariate_convex(F, s, ctx)
    hypotheses = [
        HypothesisCheck(name="0 < s < 1", passed=0 < s < 1),
        _membership("f in K_s^1", certify_classical(fv, Sense.FIRST, s, budget, ctx.tol_violation)),
        _membership("g in K_s^1", certify_classical(gv, Sense.FIRST, s, budget, ctx.tol_violation)),
        HypothesisCheck(
            name="F generalized convex in each variable",
            passed=bivariate.conclusion_status is ConclusionStatus.HOLDS,
            detail=f"max margin {bivariate.details['max_margin']:.3g}",
        ),
        _bivariate_monotone(F, 4.0, 33, ctx.tol_violation),
    ]
    if not all(h.passed for h in hypotheses):
        return _report("thm32", hypotheses)

    def h(u):
        return F.base(fv(u), gv(u))

    verdict = certify(h, Sense.FIRST, ctx.with_s(s), budget)
    return _report("thm32", hypotheses, verdict, details={"F": F.name})


# === Theorem 3.3 ===
def check_thm33(
    f: FunctionNode, sense: Sense, ctx: AlphaContext, budget: Optional[SearchBudget] = None
) -> TheoremReport:
    """
    Predicts the relaxed-constraint outcome from the sign of f(0) and checks
    the prediction against the relaxed search
    """
    budget = budget or SearchBudget()
    sense = Sense(sense)
    theorem_id = "thm33a" if sense is Sense.FIRST else "thm33b"
    hypotheses = [
        _membership(f"f in GK_s^{1 if sense is Sense.FIRST else 2}", _search_only(f, sense, ctx, budget))
    ]
    if not hypotheses[0].passed:
        return _report(theorem_id, hypotheses)
    f0 = float(base_view(f, ctx)(np.array([0.0]))[0])
    if sense is Sense.FIRST:
        predicted_holds = f0 <= ctx.tol_base
    else:
        predicted_holds = algebra.bases_close(f0, 0.0, ctx.tol_base)
    relaxed = certify_relaxed(f, sense, ctx, budget)
    agrees = predicted_holds != relaxed.is_violation
    details = {
        "f_at_0": f0,
        "predicted": "holds" if predicted_holds else "violation",
        "relaxed_verdict": relaxed.model_dump(mode="json", by_alias=True),
    }
    report = _report(theorem_id, hypotheses, holds=agrees, details=details)
    if not agrees and relaxed.witness is not None:
        report.witness = relaxed.witness
    return report


# === Theorem 3.4 ===
def check_thm34(
    f: FunctionNode,
    case: Literal["a", "b", "c"],
    ctx: AlphaContext,
    budget: Optional[SearchBudget] = None,
    s1: Optional[float] = None,
    s2: Optional[float] = None,
) -> TheoremReport:
    """
    Class inclusions: (a) GK_s^2 -> GK_s^1, (b) GK_s2^2 -> GK_s1^2,
    (c) GK_s2^1 -> GK_s1^1, under the stated conditions on f(0)
    """
    budget = budget or SearchBudget()
    s1 = ctx.s if s1 is None else s1
    s2 = ctx.s if s2 is None else s2
    match case:
        case "a":
            s_hyp, s_con, sense_hyp, sense_con = ctx.s, ctx.s, Sense.SECOND, Sense.FIRST
        case "b":
            s_hyp, s_con, sense_hyp, sense_con = s2, s1, Sense.SECOND, Sense.SECOND
        case "c":
            s_hyp, s_con, sense_hyp, sense_con = s2, s1, Sense.FIRST, Sense.FIRST
        case _:
            raise ValueError(f"Invalid case: {case}. Must be one of ['a', 'b', 'c']")
    bound = bind_s(f, s_hyp)
    hyp_ctx = ctx.with_s(s_hyp)
    hypotheses = [
        HypothesisCheck(name="0 < s1 <= s2 <= 1", passed=0 < s1 <= s2 <= 1, detail=f"s1={s1}, s2={s2}"),
        _membership(
            f"f in GK_{s_hyp}^{1 if sense_hyp is Sense.FIRST else 2}",
            _search_only(bound, sense_hyp, hyp_ctx, budget),
        ),
        _zero_at_origin(
            "f(0) <= 0^alpha" if case == "c" else "f(0) = 0^alpha",
            base_view(bound, hyp_ctx),
            ctx,
            allow_negative=case == "c",
        ),
    ]
    if not all(h.passed for h in hypotheses):
        return _report(f"thm34{case}", hypotheses)
    verdict = _search_only(bound, sense_con, ctx.with_s(s_con), budget)
    return _report(f"thm34{case}", hypotheses, verdict, details={"s_hypothesis": s_hyp, "s_conclusion": s_con})


# === Theorem 3.5 ===
def check_thm35(
    p: FunctionNode, s: float, ctx: AlphaContext, budget: Optional[SearchBudget] = None
) -> TheoremReport:
    budget = budget or SearchBudget()
    p = bind_s(p, s)
    P = base_view(p, ctx)
    points = search_axis(budget.grid_n, budget.u_max)
    points = np.unique(np.concatenate((points, breakpoints(p))))
    hypotheses = [
        HypothesisCheck(name="0 < s < 1", passed=0 < s < 1),
        _monotone_check("p non-decreasing", P, points, ctx.tol_violation),
        _nonnegative_check("p non-negative", P, points, ctx.tol_violation),
    ]
    if not all(h.passed for h in hypotheses):
        return _report("thm35", hypotheses)
    f = combine("thm35_pattern", p, s=s)
    verdict = _search_only(f, Sense.FIRST, ctx.with_s(s), budget)
    return _report("thm35", hypotheses, verdict, details={"function": f.model_dump(mode="json")})


# === Theorem 3.6 and Remark 3.4 ===
def _limit_at_zero(F: BaseFunction, ctx: AlphaContext) -> Tuple[float, float]:
    return right_limit(F, 0.0, ctx).base, float(F(np.array([0.0]))[0])


def check_thm36(
    f: FunctionNode,
    g: Union[FunctionNode, ScalarFunction],
    kind: Literal["compose", "product"],
    s1: float,
    s2: float,
    ctx: AlphaContext,
    budget: Optional[SearchBudget] = None,
) -> TheoremReport:
    """
    (a) compose: f in GK_s1^1 non-decreasing with f(0) <= 0^alpha, g in K_s2^1
    non-negative with g(0) = 0 give f o g in GK_(s1 s2)^1.
    (b) product: non-negative f in GK_s1^1, g in GK_s2^1 with f(0) = 0^alpha and
    g(0+) = g(0) (or the symmetric condition) give fg in GK_min(s1,s2)^1.
    With s1 = s2 = 1 the product case checks the generalized convex variant.
    """
    budget = budget or SearchBudget()
    tol = ctx.tol_violation
    points = search_axis(budget.grid_n, budget.u_max)
    f_bound = bind_s(f, s1)
    F = base_view(f_bound, ctx)

    if kind == "compose":
        gv = scalar_view(g)
        hypotheses = [
            _membership("f in GK_s1^1", _search_only(f_bound, Sense.FIRST, ctx.with_s(s1), budget)),
            _monotone_check("f non-decreasing", F, points, tol),
            _zero_at_origin("f(0) <= 0^alpha", F, ctx, allow_negative=True),
            _membership("g in K_s2^1", certify_classical(gv, Sense.FIRST, s2, budget, tol)),
            _nonnegative_check("g non-negative", gv, points, tol),
            HypothesisCheck(name="g(0) = 0", passed=abs(float(gv(np.array([0.0]))[0])) <= ctx.tol_base),
        ]
        if not all(h.passed for h in hypotheses):
            return _report("thm36a", hypotheses)
        h = combine("compose", f_bound, g) if not callable(g) else (lambda u: F(gv(u)))
        verdict = _search_only(h, Sense.FIRST, ctx.with_s(s1 * s2), budget)
        return _report("thm36a", hypotheses, verdict, details={"s": s1 * s2})

    g_bound = bind_s(g, s2)
    G = base_view(g_bound, ctx)
    product = combine("product", f_bound, g_bound)
    if s1 == s2 == 1:
        up = _monotone_check("f non-decreasing", F, points, tol).passed and _monotone_check(
            "g non-decreasing", G, points, tol
        ).passed
        down = _monotone_check("f non-increasing", lambda u: -F(u), points, tol).passed and _monotone_check(
            "g non-increasing", lambda u: -G(u), points, tol
        ).passed
        hypotheses = [
            _membership("f generalized convex", _search_only(f_bound, Sense.FIRST, ctx.with_s(1.0), budget)),
            _membership("g generalized convex", _search_only(g_bound, Sense.FIRST, ctx.with_s(1.0), budget)),
            _nonnegative_check("f non-negative", F, points, tol),
            _nonnegative_check("g non-negative", G, points, tol),
            HypothesisCheck(name="f and g monotone in the same direction", passed=up or down),
        ]
        if not all(h.passed for h in hypotheses):
            return _report("remark34", hypotheses)
        verdict = _search_only(product, Sense.FIRST, ctx.with_s(1.0), budget)
        return _report("remark34", hypotheses, verdict)

    f_limit, f0 = _limit_at_zero(F, ctx)
    g_limit, g0 = _limit_at_zero(G, ctx)
    boundary = (algebra.bases_close(f0, 0.0, ctx.tol_base) and abs(g_limit - g0) <= tol) or (
        algebra.bases_close(g0, 0.0, ctx.tol_base) and abs(f_limit - f0) <= tol
    )
    hypotheses = [
        _membership("f in GK_s1^1", _search_only(f_bound, Sense.FIRST, ctx.with_s(s1), budget)),
        _membership("g in GK_s2^1", _search_only(g_bound, Sense.FIRST, ctx.with_s(s2), budget)),
        _nonnegative_check("f non-negative", F, points, tol),
        _nonnegative_check("g non-negative", G, points, tol),
        HypothesisCheck(name="boundary condition at 0", passed=boundary),
    ]
    if not all(h.passed for h in hypotheses):
        return _report("thm36b", hypotheses)
    s = min(s1, s2)
    verdict = _search_only(product, Sense.FIRST, ctx.with_s(s), budget)
    return _report("thm36b", hypotheses, verdict, details={"s": s})


def check_remark33(
    f: FunctionNode, g: ScalarFunction, ctx: AlphaContext, budget: Optional[SearchBudget] = None
) -> TheoremReport:
    budget = budget or SearchBudget()
    tol = ctx.tol_violation
    points = search_axis(budget.grid_n, budget.u_max)
    f_bound = bind_s(f, ctx.s)
    gv = scalar_view(g)
    hypotheses = [
        _membership("f in GK_s^2", _search_only(f_bound, Sense.SECOND, ctx, budget)),
        _monotone_check("f non-decreasing", base_view(f_bound, ctx), points, tol),
        _membership("g convex", certify_classical(gv, Sense.SECOND, 1.0, budget, tol)),
        _nonnegative_check("g non-negative", gv, points, tol),
    ]
    if not all(h.passed for h in hypotheses):
        return _report("remark33", hypotheses)
    F = base_view(f_bound, ctx)
    h = combine("compose", f_bound, g) if not callable(g) else (lambda u: F(gv(u)))
    return _report("remark33", hypotheses, _search_only(h, Sense.SECOND, ctx, budget))


# === phi-type functions and corollaries ===
def phi_type_check(
    f: FunctionNode, ctx: AlphaContext, u_max: float = 10.0, grid_n: int = 16
) -> TheoremReport:
    """
    f(0) = 0^alpha, local fractional continuity at grid points and breakpoints,
    non-decreasing and non-negative on the grid
    """
    f = bind_s(f, ctx.s)
    F = base_view(f, ctx)
    probes = np.unique(
        np.concatenate(([0.0], np.linspace(0.0, u_max, grid_n), [b for b in breakpoints(f) if 0 <= b <= u_max]))
    )
    discontinuities = [
        report.x0 for report in (continuity_probe(f, float(x), ctx) for x in probes) if not report.continuous
    ]
    dense = np.unique(np.concatenate((search_axis(4 * grid_n, u_max), probes)))
    checks = [
        _zero_at_origin("f(0) = 0^alpha", F, ctx),
        HypothesisCheck(
            name="local fractional continuous",
            passed=not discontinuities,
            detail=None if not discontinuities else f"discontinuous at {discontinuities}",
        ),
        _monotone_check("non-decreasing", F, dense, ctx.tol_violation),
        _nonnegative_check("non-negative", F, dense, ctx.tol_violation),
    ]
    failed = [check.name for check in checks if not check.passed]
    return _report(
        "phi_type",
        [],
        holds=not failed,
        details={"checks": [c.model_dump() for c in checks], "failed": failed},
    )


def _phi_function_checks(phi: ScalarFunction, points: np.ndarray, ctx: AlphaContext) -> List[HypothesisCheck]:
    view = scalar_view(phi)
    return [
        HypothesisCheck(name="phi(0) = 0", passed=abs(float(view(np.array([0.0]))[0])) <= ctx.tol_base),
        _monotone_check("phi non-decreasing", view, points, ctx.tol_violation),
        _nonnegative_check("phi non-negative", view, points, ctx.tol_violation),
    ]


def check_corollaries(
    kind: Literal["3.1", "3.2"],
    phi: Union[FunctionNode, ScalarFunction],
    other: Union[FunctionNode, ScalarFunction, None],
    s: float,
    ctx: AlphaContext,
    budget: Optional[SearchBudget] = None,
) -> TheoremReport:
    """
    3.1: Phi generalized convex phi-type, g in K_s^1 a phi-function -> Phi o g in GK_s^1.
    3.2: Phi convex phi-function, f in GK_s^2 phi-type -> f o Phi in GK_s^2;
    other defaults to u^(s alpha), the particular case [Phi(u)]^(s alpha).
    """
    budget = budget or SearchBudget()
    points = search_axis(budget.grid_n, budget.u_max)
    sctx = ctx.with_s(s)
    if kind == "3.1":
        outer = bind_s(phi, 1.0)
        g = other if other is not None else SPow(operand=SVar(), exponent=s)
        hypotheses = [
            _membership("Phi generalized convex", _search_only(outer, Sense.FIRST, ctx.with_s(1.0), budget)),
            HypothesisCheck(
                name="Phi phi-type",
                passed=phi_type_check(outer, ctx, budget.u_max).conclusion_status is ConclusionStatus.HOLDS,
            ),
            _membership("g in K_s^1", certify_classical(scalar_view(g), Sense.FIRST, s, budget, ctx.tol_violation)),
            *_phi_function_checks(g, points, ctx),
        ]
        theorem_id, sense, inner, outer_node = "cor31", Sense.FIRST, g, outer
    elif kind == "3.2":
        f = bind_s(other if other is not None else Mono(k=KNum(value=s)), s)
        hypotheses = [
            _membership("Phi convex", certify_classical(scalar_view(phi), Sense.SECOND, 1.0, budget, ctx.tol_violation)),
            *_phi_function_checks(phi, points, ctx),
            _membership("f in GK_s^2", _search_only(f, Sense.SECOND, sctx, budget)),
            HypothesisCheck(
                name="f phi-type",
                passed=phi_type_check(f, sctx, budget.u_max).conclusion_status is ConclusionStatus.HOLDS,
            ),
        ]
        theorem_id, sense, inner, outer_node = "cor32", Sense.SECOND, phi, f
    else:
        raise ValueError(f"Invalid corollary: {kind}. Must be one of ['3.1', '3.2']")
    if not all(h.passed for h in hypotheses):
        return _report(theorem_id, hypotheses)
    if callable(inner):
        outer_view = base_view(outer_node, ctx)
        h = lambda u: outer_view(inner(u))  # noqa: E731
    else:
        h = combine("compose", outer_node, inner)
    return _report(theorem_id, hypotheses, _search_only(h, sense, sctx, budget))


# === Theorem 3.7 ===
def phi_integrand(f: FunctionNode, s: float) -> FunctionNode:
    """t -> f(t^(1/s)) / t^alpha"""
    return Product(
        factors=(
            Subst(outer=bind_s(f, s), inner=SPow(operand=SVar(), exponent=1.0 / s)),
            Mono(k=KNum(value=-1.0)),
        )
    )


def build_phi_thm37(
    f: FunctionNode,
    s: float,
    ctx: AlphaContext,
    mesh: Optional[MeshSpec] = None,
    n_points: int = 100,
    u_max: float = 4.0,
) -> Tuple[BaseFunction, SandwichReport]:
    """
    Phi(u) = Gamma(1+alpha) 0I_u (f(t^(1/s)) / t^alpha), Phi(0) = 0^alpha,
    and the chain f(2^(-1/s) u) <= Phi(u^s) <= f(u) on n_points grid points
    """
    mesh = mesh or MeshSpec()
    sctx = ctx.with_s(s)
    integrand = phi_integrand(f, s)
    F = base_view(bind_s(f, s), sctx)
    estimates = {}

    def phi_base(u: float) -> float:
        if u == 0:
            return 0.0
        result = lf_integral(integrand, 0.0, u, sctx, mesh)
        scaled = algebra.scalar_scale(
            algebra.gamma_factor(sctx), algebra.make_scalar("value", result.value, sctx), sctx
        )
        estimates[u] = result.convergence_estimate
        return scaled.base

    def phi(u):
        points = np.atleast_1d(np.asarray(u, dtype=float))
        return np.array([phi_base(float(x)) for x in points])

    grid = u_max * np.arange(1, n_points + 1) / n_points
    lower = F(2.0 ** (-1.0 / s) * grid)
    upper = F(grid)
    middle_points = grid**s
    middle = phi(middle_points)
    rows, holds = [], True
    for u, lo, mid, up, at in zip(grid, lower, middle, upper, middle_points):
        slack = ctx.tol_violation + abs(estimates.get(float(at), 0.0))
        holds = holds and lo <= mid + slack and mid <= up + slack
        rows.append(
            SandwichRow(
                u=float(u),
                lower_value=float(algebra.to_value(lo, ctx.alpha)),
                phi_value=float(algebra.to_value(mid, ctx.alpha)),
                upper_value=float(algebra.to_value(up, ctx.alpha)),
                lower_base=float(lo),
                phi_base=float(mid),
                upper_base=float(up),
                convergence_estimate=float(estimates.get(float(at), 0.0)),
            )
        )
    logger.info("sandwich over %d points: %s", n_points, "holds" if holds else "fails")
    return phi, SandwichReport(s=s, alpha=ctx.alpha, rows=rows, holds=holds)


def check_thm37(
    f: FunctionNode,
    s: float,
    ctx: AlphaContext,
    budget: Optional[SearchBudget] = None,
    mesh: Optional[MeshSpec] = None,
    n_points: int = 100,
) -> TheoremReport:
    budget = budget or SearchBudget()
    sctx = ctx.with_s(s)
    bound = bind_s(f, s)
    F = base_view(bound, sctx)
    positive = positive_axis(budget.grid_n, budget.u_max)
    ratio = F(np.power(positive, 1.0 / s)) / positive
    hypotheses = [
        HypothesisCheck(name="0 < s < 1", passed=0 < s < 1),
        _membership("f in GK_s^1", _search_only(bound, Sense.FIRST, sctx, budget)),
        HypothesisCheck(
            name="f phi-type",
            passed=phi_type_check(bound, sctx, budget.u_max).conclusion_status is ConclusionStatus.HOLDS,
        ),
        HypothesisCheck(
            name="f(u^(1/s))/u^alpha non-decreasing",
            passed=_monotone(ratio, ctx.tol_violation)[0],
        ),
    ]
    if not all(h.passed for h in hypotheses):
        return _report("thm37", hypotheses)
    phi, sandwich = build_phi_thm37(bound, s, ctx, mesh, n_points)
    knots = np.linspace(0.0, 4.0, 21)
    phi_knots = phi(knots)
    midpoint_convex = bool(
        np.all(phi_knots[1:-1] <= (phi_knots[:-2] + phi_knots[2:]) / 2.0 + ctx.tol_violation)
    )
    phi_monotone = _monotone(phi_knots, ctx.tol_violation)[0]
    details = {
        "sandwich_holds": sandwich.holds,
        "phi_midpoint_convex": midpoint_convex,
        "phi_non_decreasing": phi_monotone,
        "phi_at_0": float(phi_knots[0]),
        "rows": len(sandwich.rows),
    }
    holds = sandwich.holds and midpoint_convex and phi_monotone and phi_knots[0] == 0.0
    return _report("thm37", hypotheses, holds=holds, details=details)


# === Suite ===
@dataclass(frozen=True)
class SuiteEntry:
    test_id: str
    theorem_id: str
    run: Callable[[AlphaContext, SearchBudget, MeshSpec], TheoremReport]


def run_suite(
    entries: Sequence[SuiteEntry],
    ctx: AlphaContext,
    budget: Optional[SearchBudget] = None,
    mesh: Optional[MeshSpec] = None,
) -> List[TheoremReport]:
    """
    Runs independent checks, concurrently when budget.workers > 1;
    reports come back in entry order
    """
    budget = budget or SearchBudget()
    mesh = mesh or MeshSpec()
    reports = Parallel(n_jobs=budget.workers, prefer="threads")(
        delayed(entry.run)(ctx, budget, mesh) for entry in entries
    )
    for entry, report in zip(entries, reports):
        report.details.setdefault("test_id", entry.test_id)
    falsified = sum(r.conclusion_status is ConclusionStatus.FALSIFIED for r in reports)
    logger.info("suite finished: %d checks, %d falsified", len(reports), falsified)
    return reports
