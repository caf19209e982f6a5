import itertools
import logging
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from fractal_core.exceptions import ParameterError
from fractal_core.models import (
    AlphaContext,
    Example41Params,
    Example42Params,
    ExampleExpectation,
    Ineq35Witness,
    Membership,
    RegressionRow,
    SearchBudget,
    Sense,
    VerdictStatus,
    Witness,
)
from fractal_core.services.certifier import certify, inequality_margin
from fractal_core.services.expressions import FunctionNode, parse

logger = logging.getLogger(__name__)

EXAMPLE41_GRID = (0.0, 1.0, 2.0)
EXAMPLE41_CANONICAL = [(0.0, 1.0, 0.0), (1.0, 1.0, 0.0), (0.0, 1.0, -1.0), (1.0, 1.0, -1.0)]
EXAMPLE42_GRID = [(k, s) for k in (1.5, 2.0, 4.0) for s in (0.25, 0.5)]
REGRESSION_S = (0.25, 0.5, 0.75)
REGRESSION_ALPHA = (0.3, 0.5, 0.8)


# === Constructors ===
def make_example41(p: Example41Params, ctx: AlphaContext) -> Tuple[FunctionNode, ExampleExpectation]:
    """
    f(u) = a^alpha at u = 0 and b^alpha u^(s alpha) + c^alpha for u > 0, with
    the classification its parameters imply
    """
    f = parse(f"pw(u==0 -> fb({p.a!r}); u>0 -> fb({p.b!r})*mono(s) + fb({p.c!r}))", ctx)
    expected = ExampleExpectation()
    if p.b >= 0 and p.c <= p.a:
        expected.first = Membership.MEMBER
        expected.cases.append("i")
    if p.b >= 0 and p.c < p.a:
        expected.cases.append("ii")
    if p.b >= 0:
        expected.monotone_on_open = True
        expected.monotone_on_closed = p.c >= p.a
    if p.b >= 0 and 0 <= p.c <= p.a:
        expected.second = Membership.MEMBER
        expected.cases.append("iii")
    if p.b > 0 and p.c < 0:
        expected.second = Membership.NON_MEMBER
        expected.cases.append("iv")
    return f, expected


def make_example42(p: Example42Params, ctx: AlphaContext) -> Tuple[FunctionNode, ExampleExpectation]:
    """
    f(u) = u^((s/(1-s)) alpha) on [0, 1] and k^alpha u^((s/(1-s)) alpha) for u > 1
    """
    f = parse(f"pw(u<=1 -> mono(s/(1-s)); u>1 -> fb({p.k!r})*mono(s/(1-s)))", ctx)
    return f, ExampleExpectation(
        first=Membership.MEMBER,
        second=Membership.NON_MEMBER,
        continuous_at_one=False,
    )


def example42_params(k: float, s: float) -> Example42Params:
    if not k > 1:
        raise ParameterError(f"Example 4.2 needs k > 1, got {k}")
    return Example42Params(k=k, s=s)


# === Inequality (3.5) ===
def ineq35_margin(p: Example42Params, a, lambda1) -> np.ndarray:
    """
    Base of k^alpha a^(m alpha) minus the right-hand side of (3.5), m = s/(1-s);
    positive means (3.5) fails
    """
    a = np.asarray(a, dtype=float)
    lambda1 = np.asarray(lambda1, dtype=float)
    m = p.s / (1.0 - p.s)
    v = (a - lambda1) / (1.0 - lambda1)
    rhs = np.power(lambda1, p.s) + p.k * np.power(1.0 - lambda1, p.s) * np.power(v, m)
    return p.k * np.power(a, m) - rhs


def find_ineq35_witness(
    p: Example42Params,
    ctx: AlphaContext,
    budget: Optional[SearchBudget] = None,
    a_max: float = 4.0,
) -> Optional[Ineq35Witness]:
    """
    Searches (a, lambda1) in (1, a_max] x [0, 1) for a failure of (3.5) and maps
    it to the second-sense inequality at u = 1, v = (a - lambda1)/(1 - lambda1)
    """
    budget = budget or SearchBudget()
    n = max(budget.grid_n, 16)
    a_axis = 1.0 + np.logspace(-6, np.log10(a_max - 1.0), n)
    l_axis = np.linspace(0.0, 1.0, budget.t_grid_n)[:-1]
    A, L = (x.ravel() for x in np.meshgrid(a_axis, l_axis, indexing="ij"))
    margins = ineq35_margin(p, A, L)
    best = int(np.argmax(margins))
    a, lam, margin = float(A[best]), float(L[best]), float(margins[best])
    step_a, step_l = (a_max - 1.0) / 10.0, 0.1
    for _ in range(budget.refine_steps):
        trials = [
            (a + da, lam + dl)
            for da, dl in ((-step_a, 0), (step_a, 0), (0, -step_l), (0, step_l))
            if 1.0 < a + da <= a_max and 0.0 <= lam + dl < 1.0
        ]
        scores = [float(ineq35_margin(p, ta, tl)) for ta, tl in trials]
        if scores and max(scores) > margin:
            index = int(np.argmax(scores))
            (a, lam), margin = trials[index], scores[index]
        else:
            step_a, step_l = step_a / 2.0, step_l / 2.0
    if not margin > ctx.tol_violation:
        logger.warning("no failure of (3.5) found for k=%g, s=%g", p.k, p.s)
        return None
    f, _ = make_example42(p, ctx)
    v = (a - lam) / (1.0 - lam)
    sctx = ctx.with_s(p.s)
    replay = inequality_margin(f, 1.0, v, lam, 1.0 - lam, sctx)
    if not replay > ctx.tol_violation:
        logger.warning(
            "(3.5) margin %.3g at a=%g, lambda1=%g does not replay on f (margin %.3g)", margin, a, lam, replay
        )
        return None
    return Ineq35Witness(
        a=a,
        lambda1=lam,
        margin=margin,
        witness=Witness(u=1.0, v=v, lambda1=lam, lambda2=1.0 - lam, margin=replay),
    )


# === Regression matrix ===
def _row(
    family: str,
    params: dict,
    f: FunctionNode,
    expected: Membership,
    sense: Sense,
    ctx: AlphaContext,
    budget: SearchBudget,
) -> RegressionRow:
    verdict = certify(f, sense, ctx, budget)
    margin = verdict.witness.margin if verdict.witness else verdict.budget_stats.max_margin_seen
    match expected:
        case Membership.MEMBER:
            matches = not verdict.is_violation
        case Membership.NON_MEMBER:
            matches = verdict.is_violation
        case _:
            matches = True
    return RegressionRow(
        family=family,
        params=params,
        alpha=ctx.alpha,
        sense=sense,
        expected=expected,
        observed=verdict.status,
        margin=margin,
        matches=matches,
    )


def regression_cases(ctx: AlphaContext, full: bool = True) -> List[tuple]:
    """(family, params, f, expected, sense, ctx) for every cell of the matrix"""
    alphas = REGRESSION_ALPHA if full else (ctx.alpha,)
    svals = REGRESSION_S if full else (ctx.s,)
    cases = []
    abc = list(itertools.product(EXAMPLE41_GRID, repeat=3)) + EXAMPLE41_CANONICAL
    for alpha, s, (a, b, c) in itertools.product(alphas, svals, abc):
        cell_ctx = AlphaContext(alpha=alpha, s=s, tol_base=ctx.tol_base, tol_violation=ctx.tol_violation)
        f, expectation = make_example41(Example41Params(a=a, b=b, c=c, s=s), cell_ctx)
        params = {"a": a, "b": b, "c": c, "s": s}
        cases.append(("example41", params, f, expectation.first, Sense.FIRST, cell_ctx))
        cases.append(("example41", params, f, expectation.second, Sense.SECOND, cell_ctx))
    for alpha, (k, s) in itertools.product(alphas, EXAMPLE42_GRID if full else [(2.0, ctx.s)]):
        cell_ctx = AlphaContext(alpha=alpha, s=s, tol_base=ctx.tol_base, tol_violation=ctx.tol_violation)
        f, expectation = make_example42(Example42Params(k=k, s=s), cell_ctx)
        params = {"k": k, "s": s}
        cases.append(("example42", params, f, expectation.first, Sense.FIRST, cell_ctx))
        cases.append(("example42", params, f, expectation.second, Sense.SECOND, cell_ctx))
    return cases


def regression_matrix(
    ctx: AlphaContext, budget: Optional[SearchBudget] = None, full: bool = True
) -> List[RegressionRow]:
    """
    Certifies every Example 4.1 / 4.2 cell and compares with the expected
    classification; rows run concurrently when budget.workers > 1
    """
    budget = budget or SearchBudget()
    cell_budget = budget.model_copy(update={"workers": 1})
    rows = Parallel(n_jobs=budget.workers, prefer="threads")(
        delayed(_row)(family, params, f, expected, sense, cell_ctx, cell_budget)
        for family, params, f, expected, sense, cell_ctx in regression_cases(ctx, full)
    )
    mismatches = [row for row in rows if not row.matches]
    if mismatches:
        logger.warning("%d regression cells disagree with the expected classification", len(mismatches))
    else:
        logger.info("regression matrix: %d cells, all consistent", len(rows))
    return rows


def observed_membership(status: VerdictStatus) -> Membership:
    if status is VerdictStatus.VIOLATION:
        return Membership.NON_MEMBER
    if status is VerdictStatus.PROVEN_MEMBER:
        return Membership.MEMBER
    return Membership.UNKNOWN
