import logging
from typing import Any, Dict, List, Literal, Union

from fractal_core.models import (
    AlphaContext,
    CalcRequest,
    CalculusResult,
    ClassifyRequest,
    ContinuityReport,
    ConvexityVerdict,
    Example41Params,
    ExamplesRequest,
    MeshSpec,
    RatioLimitResult,
    RunOptions,
    SandwichReport,
    SandwichRequest,
    SearchBudget,
    Sense,
    TheoremReport,
    TheoremsRequest,
)
from fractal_core.services import calculus, gallery, theorems
from fractal_core.services.certifier import certify, certify_relaxed
from fractal_core.services.expressions import parse
from fractal_core.utils.corpus import corpus_suite, load_corpus, select_suite
from fractal_core.utils.settings import get_settings

logger = logging.getLogger(__name__)

CalcOperation = Literal["derive", "integrate", "continuity", "ratio-limit", "ftc"]


def context_for(options: RunOptions) -> AlphaContext:
    return get_settings().context(alpha=options.alpha, s=options.s, tol_violation=options.tol_violation)


def budget_for(options: RunOptions) -> SearchBudget:
    return get_settings().budget(
        grid_n=options.grid_n,
        t_grid_n=options.t_grid_n,
        random_trials=options.random_trials,
        refine_steps=options.refine_steps,
        seed=options.seed,
        u_max=options.u_max,
        workers=options.workers,
    )


def classify(request: ClassifyRequest) -> ConvexityVerdict:
    """
    Parses the function and certifies it in the requested sense
    """
    ctx = context_for(request)
    f = parse(request.fn, ctx)
    budget = budget_for(request)
    if request.relaxed:
        return certify_relaxed(f, request.sense, ctx, budget)
    return certify(f, request.sense, ctx, budget, use_patterns=not request.search_only)


def calculate(
    operation: CalcOperation, request: CalcRequest
) -> Union[CalculusResult, ContinuityReport, RatioLimitResult]:
    """
    Dispatches one local fractional calculus operation
    """
    ctx = context_for(request)
    f = parse(request.fn, ctx)
    mesh = get_settings().mesh()
    if request.n_intervals is not None:
        mesh = MeshSpec(n_intervals=request.n_intervals, refinement_levels=mesh.refinement_levels)
    match operation:
        case "derive":
            return calculus.lf_derivative(f, request.x0, ctx)
        case "integrate":
            return calculus.lf_integral(f, request.a, request.b, ctx, mesh)
        case "continuity":
            return calculus.continuity_probe(f, request.x0, ctx)
        case "ratio-limit":
            if request.g is None:
                raise ValueError("ratio-limit needs a second function g")
            return calculus.ratio_limit(f, parse(request.g, ctx), request.x0, ctx)
        case "ftc":
            return calculus.ftc_report(f, request.a, request.x0, ctx, mesh)
        case _:
            raise ValueError(
                f"Invalid operation: {operation}. "
                "Must be one of ['derive', 'integrate', 'continuity', 'ratio-limit', 'ftc']"
            )


def run_theorems(request: TheoremsRequest) -> List[TheoremReport]:
    ctx = context_for(request)
    entries = select_suite(request.suite)
    if request.corpus != "default":
        entries = entries + corpus_suite(load_corpus(request.corpus))
    return theorems.run_suite(entries, ctx, budget_for(request), get_settings().mesh())


def sandwich(request: SandwichRequest) -> SandwichReport:
    ctx = context_for(request)
    _, report = theorems.build_phi_thm37(
        parse(request.fn, ctx),
        ctx.s,
        ctx,
        get_settings().mesh(),
        n_points=request.n_points,
        u_max=request.u_max_sandwich,
    )
    return report


def examples(request: ExamplesRequest) -> Dict[str, Any]:
    """
    Example 4.1 / 4.2 constructions, the (3.5) witness and the regression matrix
    """
    ctx = context_for(request)
    budget = budget_for(request)
    out: Dict[str, Any] = {"schema": "1"}
    if request.which in ("all", "4.1"):
        f, expected = gallery.make_example41(
            Example41Params(a=request.a, b=request.b, c=request.c, s=ctx.s), ctx
        )
        out["example41"] = {
            "function": f,
            "expected": expected,
            "first": certify(f, Sense.FIRST, ctx, budget),
            "second": certify(f, Sense.SECOND, ctx, budget),
        }
    if request.which in ("all", "4.2", "ineq35"):
        params = gallery.example42_params(request.k, ctx.s)
        f, expected = gallery.make_example42(params, ctx)
        if request.which != "ineq35":
            out["example42"] = {
                "function": f,
                "expected": expected,
                "first": certify(f, Sense.FIRST, ctx, budget),
                "second": certify(f, Sense.SECOND, ctx, budget),
                "continuity_at_one": calculus.continuity_probe(f, 1.0, ctx),
            }
        out["ineq35"] = gallery.find_ineq35_witness(params, ctx, budget)
    if request.which in ("all", "matrix"):
        out["matrix"] = gallery.regression_matrix(ctx, budget, full=request.full_matrix)
    return out
