"""
Falsification-oriented certification of generalized s-convexity.

The inequality f(l1 u + l2 v) <= l1^(s alpha) f(u) + l2^(s alpha) f(v) is
checked in base space, where it reads F(l1 u + l2 v) <= l1^s F(u) + l2^s F(v)
for the base function F. Sampling can only falsify; membership is proven
only by the syntactic pattern rules below.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from fractal_core.models import (
    AlphaContext,
    BudgetStats,
    ConvexityVerdict,
    FractalConst,
    Max,
    Mono,
    Piecewise,
    Product,
    SBinary,
    SearchBudget,
    Sense,
    SLiteral,
    SPow,
    Subst,
    Sum,
    SVar,
    VerdictStatus,
    Witness,
)
from fractal_core.services import algebra
from fractal_core.services.expressions import (
    BaseFunction,
    FunctionNode,
    base_array,
    base_view,
    breakpoints,
    evaluate,
    resolve_k,
    scalar_view,
)
from fractal_core.utils.grids import search_axis, t_axis

logger = logging.getLogger(__name__)

Variant = Literal["exact", "relaxed"]

CITATIONS = {
    "ex41_affine_first": "Example 4.1(i): b >= 0 and c <= a gives f in GK_s^1",
    "ex41_affine_second": "Example 4.1(iii): b >= 0 and 0 <= c <= a gives f in GK_s^2",
    "ex41_negative_offset": "Example 4.1(iv): b > 0 and c < 0 gives f not in GK_s^2",
    "thm35_pattern": "Theorem 3.5: u^((s/(1-s)) alpha) p(u) with p non-decreasing is in GK_s^1",
}

RELAXED_R_GRID = np.linspace(0.0, 1.0, 9)[:-1]


# === Constraint pairs and margins ===
def constraint_pair(
    sense: Sense,
    variant: Variant,
    t: float,
    s: float,
    r: float = 1.0,
) -> Tuple[float, float]:
    """
    (l1, l2) with l1^s + l2^s = r (first sense) or l1 + l2 = r (second sense);
    r = 1 for the exact constraint
    """
    l1, l2 = constraint_pairs(sense, np.array([t]), s, np.array([r if variant == "relaxed" else 1.0]))
    return float(l1[0]), float(l2[0])


def constraint_pairs(
    sense: Sense, t: np.ndarray, s: float, r: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    if Sense(sense) is Sense.FIRST:
        l1, l2 = np.power(t, 1.0 / s), np.power(1.0 - t, 1.0 / s)
        if r is not None:
            scale = np.power(r, 1.0 / s)
            l1, l2 = l1 * scale, l2 * scale
    else:
        l1, l2 = t, 1.0 - t
        if r is not None:
            l1, l2 = l1 * r, l2 * r
    return l1, l2


def _margins(F: BaseFunction, u, v, l1, l2, s: float) -> np.ndarray:
    u, v, l1, l2 = (np.asarray(x, dtype=float) for x in (u, v, l1, l2))
    lhs = F(l1 * u + l2 * v)
    rhs = np.power(l1, s) * F(u) + np.power(l2, s) * F(v)
    return lhs - rhs


def inequality_margin(
    f: Union[FunctionNode, BaseFunction],
    u: float,
    v: float,
    lambda1: float,
    lambda2: float,
    ctx: AlphaContext,
    s: Optional[float] = None,
) -> float:
    """
    base(f(l1 u + l2 v)) - base(l1^(s alpha) f(u) + l2^(s alpha) f(v));
    positive means the inequality is violated
    """
    s = ctx.s if s is None else s
    if callable(f):
        return float(_margins(f, [u], [v], [lambda1], [lambda2], s)[0])
    lhs = evaluate(f, lambda1 * u + lambda2 * v, ctx)
    weight1 = algebra.make_scalar("base", float(np.power(lambda1, s)), ctx)
    weight2 = algebra.make_scalar("base", float(np.power(lambda2, s)), ctx)
    rhs = algebra.field_op(
        "add",
        algebra.field_op("mul", weight1, evaluate(f, u, ctx), ctx),
        algebra.field_op("mul", weight2, evaluate(f, v, ctx), ctx),
        ctx,
    )
    return algebra.field_op("sub", lhs, rhs, ctx).base


# === Pattern rules ===
def _const_base(node: FractalConst, ctx: AlphaContext) -> float:
    if node.mode == "base":
        return node.literal
    return float(algebra.to_base(node.literal, ctx.alpha))


def _affine_in_us(node: FunctionNode, ctx: AlphaContext) -> Optional[Tuple[float, float]]:
    """(b, c) when node is b^alpha u^(s alpha) + c^alpha, else None"""
    match node:
        case FractalConst():
            return 0.0, _const_base(node, ctx)
        case Mono():
            if abs(resolve_k(node.k, ctx.s) - ctx.s) <= 1e-12:
                return 1.0, 0.0
            return None
        case Sum():
            b, c = 0.0, 0.0
            for sign, term in zip(node.signs, node.terms):
                part = _affine_in_us(term, ctx)
                if part is None:
                    return None
                b, c = b + sign * part[0], c + sign * part[1]
            return b, c
        case Product():
            scale, body = 1.0, None
            for factor in node.factors:
                if isinstance(factor, FractalConst):
                    scale *= _const_base(factor, ctx)
                elif body is None:
                    body = _affine_in_us(factor, ctx)
                    if body is None:
                        return None
                else:
                    return None
            if body is None:
                return 0.0, scale
            return scale * body[0], scale * body[1]
    return None


def match_example41(node: FunctionNode, ctx: AlphaContext) -> Optional[Tuple[float, float, float]]:
    """
    (a, b, c) when node is a^alpha at u = 0 and b^alpha u^(s alpha) + c^alpha
    for u > 0; a bare affine expression has a = c
    """
    if isinstance(node, Piecewise) and len(node.branches) == 2:
        first, second = node.branches
        zero_guard = first.guard.op == "==" and first.guard.threshold == 0.0
        rest_guard = second.guard.op == "else" or (
            second.guard.op in (">", ">=") and second.guard.threshold == 0.0
        )
        if zero_guard and rest_guard and isinstance(first.expr, FractalConst):
            affine = _affine_in_us(second.expr, ctx)
            if affine is not None:
                return _const_base(first.expr, ctx), affine[0], affine[1]
        return None
    affine = _affine_in_us(node, ctx)
    if affine is None or affine[0] == 0.0:
        return None
    return affine[1], affine[0], affine[1]


def _scalar_monotone(node) -> bool:
    """Syntactically non-negative and non-decreasing real expression on R+"""
    match node:
        case SLiteral():
            return node.value >= 0
        case SVar():
            return True
        case SPow():
            return node.exponent >= 0 and _scalar_monotone(node.operand)
        case SBinary():
            return node.op in ("+", "*") and _scalar_monotone(node.left) and _scalar_monotone(node.right)
    return False


def _split_power(node: FunctionNode, ctx: AlphaContext) -> Tuple[float, List[FunctionNode]]:
    """Writes node as u^(K alpha) times the remaining factors"""
    match node:
        case Mono():
            return resolve_k(node.k, ctx.s), []
        case Product():
            exponent, rest = 0.0, []
            for factor in node.factors:
                k, others = _split_power(factor, ctx)
                exponent += k
                rest.extend(others)
            return exponent, rest
        case Piecewise():
            splits = [_split_power(branch.expr, ctx) for branch in node.branches]
            exponents = {round(k, 12) for k, _ in splits}
            if len(exponents) == 1:
                exponent = splits[0][0]
                branches = tuple(
                    branch.model_copy(update={"expr": _product_of(rest)})
                    for branch, (_, rest) in zip(node.branches, splits)
                )
                return exponent, [Piecewise(branches=branches)]
    return 0.0, [node]


def _product_of(factors: List[FunctionNode]) -> FunctionNode:
    if not factors:
        return FractalConst(mode="base", literal=1.0)
    if len(factors) == 1:
        return factors[0]
    return Product(factors=tuple(factors))


def _piecewise_monotone(node: Piecewise, ctx: AlphaContext) -> bool:
    if not all(_monotone_nonnegative(branch.expr, ctx) for branch in node.branches):
        return False

    def selected(u: float) -> int:
        for index, branch in enumerate(node.branches):
            op, c = branch.guard.op, branch.guard.threshold
            if (
                op == "else"
                or (op == "==" and u == c)
                or (op == "<" and u < c)
                or (op == "<=" and u <= c)
                or (op == ">" and u > c)
                or (op == ">=" and u >= c)
            ):
                return index
        raise ValueError("non-total piecewise")

    thresholds = sorted({b.guard.threshold for b in node.branches if b.guard.op != "else"})
    for c in (c for c in thresholds if c >= 0):
        at = np.array([c])
        indices = [selected(c)]
        if c > 0:
            indices.insert(0, selected(float(np.nextafter(c, -np.inf))))
        indices.append(selected(float(np.nextafter(c, np.inf))))
        levels = [base_array(node.branches[i].expr, at, ctx)[0] for i in indices]
        if any(left > right + ctx.tol_violation for left, right in zip(levels, levels[1:])):
            return False
    return True


def _monotone_nonnegative(node: FunctionNode, ctx: AlphaContext) -> bool:
    """Syntactic check that node is non-negative and non-decreasing on R+"""
    match node:
        case FractalConst():
            return _const_base(node, ctx) >= 0
        case Mono():
            return resolve_k(node.k, ctx.s) >= 0
        case Sum():
            return all(sign > 0 for sign in node.signs) and all(
                _monotone_nonnegative(term, ctx) for term in node.terms
            )
        case Product():
            return all(_monotone_nonnegative(factor, ctx) for factor in node.factors)
        case Max():
            return _monotone_nonnegative(node.left, ctx) and _monotone_nonnegative(node.right, ctx)
        case Piecewise():
            return _piecewise_monotone(node, ctx)
        case Subst():
            return _monotone_nonnegative(node.outer, ctx) and _scalar_monotone(node.inner)
    return False


def match_thm35(node: FunctionNode, ctx: AlphaContext) -> bool:
    """
    u^(K alpha) p(u) with K >= s/(1-s) and p non-decreasing, non-negative;
    the surplus u^((K - s/(1-s)) alpha) is absorbed into p
    """
    if not 0 < ctx.s < 1:
        return False
    exponent, rest = _split_power(node, ctx)
    if exponent < ctx.s / (1.0 - ctx.s) - 1e-12:
        return False
    return all(_monotone_nonnegative(factor, ctx) for factor in rest)


def _pattern_verdict(
    f: FunctionNode, sense: Sense, ctx: AlphaContext
) -> Optional[ConvexityVerdict]:
    if not 0 < ctx.s < 1:
        return None
    proven = None
    example41 = match_example41(f, ctx)
    if example41 is not None:
        a, b, c = example41
        if sense is Sense.FIRST and b >= 0 and c <= a:
            proven = "ex41_affine_first"
        if sense is Sense.SECOND and b >= 0 and 0 <= c <= a:
            proven = "ex41_affine_second"
        if sense is Sense.SECOND and b > 0 and c < 0:
            point = (-c / (2.0 * b)) ** (1.0 / ctx.s)
            margin = inequality_margin(f, point, point, 0.5, 0.5, ctx)
            if margin > ctx.tol_violation:
                return ConvexityVerdict(
                    status=VerdictStatus.VIOLATION,
                    sense=sense,
                    s=ctx.s,
                    alpha=ctx.alpha,
                    witness=Witness(u=point, v=point, lambda1=0.5, lambda2=0.5, margin=margin),
                    rule_id="ex41_negative_offset",
                    citation=CITATIONS["ex41_negative_offset"],
                    budget_stats=BudgetStats(evaluations=3, max_margin_seen=margin),
                )
    if proven is None and sense is Sense.FIRST and match_thm35(f, ctx):
        proven = "thm35_pattern"
    if proven is None:
        return None
    return ConvexityVerdict(
        status=VerdictStatus.PROVEN_MEMBER,
        sense=sense,
        s=ctx.s,
        alpha=ctx.alpha,
        rule_id=proven,
        citation=CITATIONS[proven],
    )


# === Search ===
@dataclass(frozen=True)
class _Candidate:
    margin: float
    u: float
    v: float
    t: float
    r: float

    def key(self):
        # larger margin first, then lexicographically smallest (u, v, t, r)
        return (-self.margin, self.u, self.v, self.t, self.r)


def _best_of(margins, u, v, t, r) -> Optional[_Candidate]:
    margins = np.asarray(margins)
    if margins.size == 0:
        return None
    top = np.max(margins)
    hits = np.flatnonzero(margins == top)
    order = np.lexsort((r[hits], t[hits], v[hits], u[hits]))
    i = hits[order[0]]
    return _Candidate(float(top), float(u[i]), float(v[i]), float(t[i]), float(r[i]))


def _pick(candidates: List[Optional[_Candidate]]) -> Optional[_Candidate]:
    candidates = [c for c in candidates if c is not None]
    return min(candidates, key=_Candidate.key) if candidates else None


class _Search:
    """One certification run over a base function"""

    def __init__(
        self,
        F: BaseFunction,
        sense: Sense,
        s: float,
        budget: SearchBudget,
        relaxed: bool,
        extra_points: Sequence[float] = (),
    ):
        self.F = F
        self.sense = Sense(sense)
        self.s = s
        self.budget = budget
        self.relaxed = relaxed
        self.evaluations = 0
        self._grid_evaluations = 0
        self.extra_points = [p for p in extra_points if 0.0 <= p <= budget.u_max]

    def margins(self, u, v, t, r) -> np.ndarray:
        l1, l2 = constraint_pairs(self.sense, t, self.s, r if self.relaxed else None)
        self.evaluations += np.size(u)
        return _margins(self.F, u, v, l1, l2, self.s)

    def grid(self) -> Optional[_Candidate]:
        # guard thresholds join the grid: piecewise jumps hide violations there
        axis = np.unique(np.concatenate((search_axis(self.budget.grid_n, self.budget.u_max), self.extra_points)))
        ts = t_axis(self.budget.t_grid_n)
        rs = RELAXED_R_GRID if self.relaxed else np.array([1.0])
        V, T, R = (x.ravel() for x in np.meshgrid(axis, ts, rs, indexing="ij"))
        best = []
        for u in axis:
            U = np.full_like(V, u)
            best.append(_best_of(self.margins(U, V, T, R), U, V, T, R))
        return _pick(best)

    def random_block(self, block: int, size: int) -> Optional[_Candidate]:
        rng = np.random.default_rng([self.budget.seed, block])
        u_max = self.budget.u_max

        def draw():
            log_part = np.exp(rng.uniform(np.log(1e-6), np.log(u_max), size))
            uniform_part = rng.uniform(0.0, u_max, size)
            picked = np.where(rng.random(size) < 0.5, log_part, uniform_part)
            return np.where(rng.random(size) < 0.05, 0.0, picked)

        u, v = draw(), draw()
        t = rng.random(size)
        r = rng.random(size) if self.relaxed else np.ones(size)
        return _best_of(self.margins(u, v, t, r), u, v, t, r)

    def random(self) -> Optional[_Candidate]:
        trials = self.budget.random_trials
        if trials == 0:
            return None
        size = self.budget.block_size
        blocks = [(b, min(size, trials - b * size)) for b in range(math.ceil(trials / size))]
        results = Parallel(n_jobs=self.budget.workers, prefer="threads")(
            delayed(self.random_block)(block, count) for block, count in blocks
        )
        self.evaluations = sum(count for _, count in blocks) + self._grid_evaluations
        return _pick(results)

    def refine(self, start: _Candidate) -> _Candidate:
        """Coordinate search around the worst point found so far"""
        best = start
        limits = {"u": (0.0, self.budget.u_max), "v": (0.0, self.budget.u_max), "t": (0.0, 1.0)}
        if self.relaxed:
            limits["r"] = (0.0, 1.0 - 1e-12)
        steps = {name: (high - low) / 10.0 for name, (low, high) in limits.items()}
        for _ in range(self.budget.refine_steps):
            improved = False
            for name, (low, high) in limits.items():
                current = getattr(best, name)
                trial_values = np.clip([current - steps[name], current + steps[name]], low, high)
                trials = [best.__class__(**{**best.__dict__, name: float(x)}) for x in trial_values]
                margins = self.margins(
                    np.array([c.u for c in trials]),
                    np.array([c.v for c in trials]),
                    np.array([c.t for c in trials]),
                    np.array([c.r for c in trials]),
                )
                for candidate, margin in zip(trials, margins):
                    if margin > best.margin:
                        best = _Candidate(float(margin), candidate.u, candidate.v, candidate.t, candidate.r)
                        improved = True
            if not improved:
                steps = {name: step / 2.0 for name, step in steps.items()}
        return best

    def run(self) -> Tuple[Optional[_Candidate], int]:
        grid_best = self.grid()
        self._grid_evaluations = self.evaluations
        random_best = self.random()
        best = _pick([grid_best, random_best])
        if best is not None:
            best = self.refine(best)
        logger.debug("search finished after %d evaluations", self.evaluations)
        return best, self.evaluations


def _verdict_from_search(
    F: BaseFunction,
    sense: Sense,
    s: float,
    alpha: float,
    tol_violation: float,
    budget: SearchBudget,
    relaxed: bool,
    extra_points: Sequence[float] = (),
) -> ConvexityVerdict:
    search = _Search(F, sense, s, budget, relaxed, extra_points)
    best, evaluations = search.run()
    verdict = ConvexityVerdict(
        status=VerdictStatus.NO_VIOLATION_FOUND,
        sense=sense,
        s=s,
        alpha=alpha,
        relaxed=relaxed,
        boundary_case=s == 1.0,
        budget_stats=BudgetStats(
            evaluations=evaluations,
            max_margin_seen=None if best is None else best.margin,
        ),
    )
    if best is None or not best.margin > tol_violation:
        return verdict
    l1, l2 = constraint_pairs(
        sense, np.array([best.t]), s, np.array([best.r]) if relaxed else None
    )
    l1, l2 = float(l1[0]), float(l2[0])
    replay = float(_margins(F, [best.u], [best.v], [l1], [l2], s)[0])
    if not replay > tol_violation:
        logger.warning("witness failed to replay (margin %.3g), discarding", replay)
        return verdict
    verdict.status = VerdictStatus.VIOLATION
    verdict.witness = Witness(u=best.u, v=best.v, lambda1=l1, lambda2=l2, margin=replay)
    return verdict


def certify(
    f: FunctionNode,
    sense: Sense,
    ctx: AlphaContext,
    budget: Optional[SearchBudget] = None,
    use_patterns: bool = True,
) -> ConvexityVerdict:
    """
    Membership of f in GK_s^1 (first sense) or GK_s^2 (second sense)
    """
    sense = Sense(sense)
    budget = budget or SearchBudget()
    if use_patterns and not callable(f):
        verdict = _pattern_verdict(f, sense, ctx)
        if verdict is not None:
            logger.info("pattern rule %s decided %s", verdict.rule_id, verdict.status.value)
            return verdict
    F = f if callable(f) else base_view(f, ctx)
    extra = () if callable(f) else breakpoints(f)
    verdict = _verdict_from_search(F, sense, ctx.s, ctx.alpha, ctx.tol_violation, budget, False, extra)
    logger.info("certify %s sense: %s", sense.value, verdict.status.value)
    return verdict


def certify_relaxed(
    f: FunctionNode,
    sense: Sense,
    ctx: AlphaContext,
    budget: Optional[SearchBudget] = None,
) -> ConvexityVerdict:
    """
    Same search with l1^s + l2^s = r (first) or l1 + l2 = r (second), r in [0, 1)
    """
    sense = Sense(sense)
    budget = budget or SearchBudget()
    F = f if callable(f) else base_view(f, ctx)
    extra = () if callable(f) else breakpoints(f)
    return _verdict_from_search(F, sense, ctx.s, ctx.alpha, ctx.tol_violation, budget, True, extra)


def certify_classical(
    g: Union[Callable, object],
    sense: Sense,
    s: float,
    budget: Optional[SearchBudget] = None,
    tol_violation: float = 1e-9,
    extra_points: Sequence[float] = (),
) -> ConvexityVerdict:
    """
    Classical K_s^1 / K_s^2 membership of a real function g in ordinary arithmetic;
    extra_points join the search grid
    """
    sense = Sense(sense)
    budget = budget or SearchBudget()
    return _verdict_from_search(scalar_view(g), sense, s, 1.0, tol_violation, budget, False, extra_points)
