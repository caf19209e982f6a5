import numpy as np
import pytest

from fractal_core.models import AlphaContext, SearchBudget, Sense, VerdictStatus
from fractal_core.services import certifier
from fractal_core.services.certifier import (
    certify,
    certify_classical,
    certify_relaxed,
    constraint_pair,
    inequality_margin,
)
from fractal_core.services.expressions import base_view, breakpoints, parse, parse_scalar
from fractal_core.utils.corpus import DEFAULT_CORPUS

ctx = AlphaContext(alpha=0.5, s=0.5)
budget = SearchBudget(grid_n=16, t_grid_n=32, random_trials=2000, refine_steps=10)


def example41(a: float, b: float, c: float):
    return parse(f"pw(u==0 -> fb({a}); u>0 -> fb({b})*mono(s) + fb({c}))")


### --- Constraint Components --- ###
def test_first_sense_exact_pair():
    l1, l2 = constraint_pair(Sense.FIRST, "exact", 0.5, 0.5)
    assert (l1, l2) == pytest.approx((0.25, 0.25))
    assert l1**0.5 + l2**0.5 == pytest.approx(1.0, abs=1e-12)


def test_second_sense_exact_pair():
    assert constraint_pair(Sense.SECOND, "exact", 0.3, 0.5) == pytest.approx((0.3, 0.7))


def test_first_sense_relaxed_pair():
    l1, l2 = constraint_pair(Sense.FIRST, "relaxed", 0.5, 0.5, r=0.5)
    assert (l1, l2) == pytest.approx((0.0625, 0.0625))
    assert l1**0.5 + l2**0.5 == pytest.approx(0.5, abs=1e-12)


def test_constraint_exactness_over_t():
    t = np.linspace(0.0, 1.0, 101)
    l1, l2 = certifier.constraint_pairs(Sense.FIRST, t, 0.3)
    np.testing.assert_allclose(l1**0.3 + l2**0.3, 1.0, atol=1e-12)


# --- Margins --- #
def test_monomial_margin_is_not_positive():
    l1, l2 = constraint_pair(Sense.FIRST, "exact", 0.3, 0.5)
    assert inequality_margin(parse("mono(s)"), 1.0, 1.0, l1, l2, ctx) <= 0.0


def test_degenerate_pair_margin():
    assert inequality_margin(example41(0, 1, -1), 1.0, 0.0, 1.0, 0.0, ctx) == 0.0


@pytest.mark.parametrize("name", sorted(DEFAULT_CORPUS))
def test_degenerate_pairs_never_violate(name):
    f = parse(DEFAULT_CORPUS[name])
    for u, v in [(0.0, 3.0), (2.0, 0.5), (7.0, 7.0)]:
        assert inequality_margin(f, u, v, 1.0, 0.0, ctx) <= ctx.tol_violation
        assert inequality_margin(f, u, v, 0.0, 1.0, ctx) <= ctx.tol_violation


def test_negative_offset_has_positive_margin():
    assert inequality_margin(example41(0, 1, -1), 0.25, 0.25, 0.5, 0.5, ctx) > 0.2


def test_callable_margin_matches_expression_margin():
    f = example41(0, 1, -1)
    direct = inequality_margin(f, 0.3, 2.0, 0.4, 0.6, ctx)
    through_view = inequality_margin(base_view(f, ctx), 0.3, 2.0, 0.4, 0.6, ctx)
    assert direct == pytest.approx(through_view, abs=1e-14)


### --- Certify Components --- ###
def test_monomial_proven_member():
    verdict = certify(parse("mono(s)"), Sense.FIRST, ctx, budget)
    assert verdict.status is VerdictStatus.PROVEN_MEMBER
    assert verdict.rule_id == "ex41_affine_first"
    assert verdict.citation


def test_example41_negative_offset_violates_second_sense():
    f = example41(0, 1, -1)
    verdict = certify(f, Sense.SECOND, ctx, budget)
    assert verdict.status is VerdictStatus.VIOLATION
    assert verdict.rule_id == "ex41_negative_offset"
    w = verdict.witness
    assert inequality_margin(f, w.u, w.v, w.lambda1, w.lambda2, ctx) == pytest.approx(w.margin, abs=1e-10)


def test_example41_non_negative_offset_second_sense():
    verdict = certify(example41(0, 1, 0), Sense.SECOND, ctx, budget)
    assert verdict.status is VerdictStatus.PROVEN_MEMBER
    assert verdict.rule_id == "ex41_affine_second"


def test_search_finds_negative_offset_violation():
    f = example41(0, 1, -1)
    verdict = certify(f, Sense.SECOND, ctx, budget, use_patterns=False)
    assert verdict.is_violation
    assert verdict.rule_id is None
    w = verdict.witness
    assert w.margin > ctx.tol_violation
    assert w.lambda1 + w.lambda2 == pytest.approx(1.0, abs=1e-12)
    assert inequality_margin(f, w.u, w.v, w.lambda1, w.lambda2, ctx) == pytest.approx(w.margin, abs=1e-10)


def test_search_witness_satisfies_first_sense_constraint():
    verdict = certify(example41(0, 1, 1), Sense.FIRST, ctx, budget)
    assert verdict.is_violation
    w = verdict.witness
    assert w.lambda1**ctx.s + w.lambda2**ctx.s == pytest.approx(1.0, abs=1e-12)


def test_example42_jump_found_by_search():
    f = parse("pw(u<=1 -> mono(s/(1-s)); u>1 -> fb(2)*mono(s/(1-s)))")
    assert certify(f, Sense.FIRST, ctx, budget).rule_id == "thm35_pattern"
    assert certify(f, Sense.SECOND, ctx, budget).is_violation


def test_no_violation_reports_budget():
    verdict = certify(parse("mono(s)"), Sense.FIRST, ctx, budget, use_patterns=False)
    assert verdict.status is VerdictStatus.NO_VIOLATION_FOUND
    assert verdict.budget_stats.evaluations > budget.random_trials
    assert verdict.budget_stats.max_margin_seen <= ctx.tol_violation


def test_boundary_case_at_s_one():
    verdict = certify(parse("mono(1)"), Sense.FIRST, ctx.with_s(1.0), budget)
    assert verdict.boundary_case
    assert verdict.status is VerdictStatus.NO_VIOLATION_FOUND


def test_verdict_json_shape():
    data = certify(parse("mono(s)"), Sense.FIRST, ctx, budget).model_dump(mode="json", by_alias=True)
    assert data["schema"] == "1"
    assert data["status"] == "proven_member"
    assert data["sense"] == "first"


# --- Determinism --- #
@pytest.mark.parametrize("text", ["pw(u==0 -> fb(0); u>0 -> fb(1)*mono(s) + fb(-1))", "mono(s)"])
def test_same_verdict_for_any_worker_count(text):
    f = parse(text)
    wide = budget.model_copy(update={"random_trials": 20_000, "block_size": 1024})
    verdicts = [
        certify(f, Sense.SECOND, ctx, wide.model_copy(update={"workers": workers}), use_patterns=False).model_dump()
        for workers in (1, 4, 16)
    ]
    assert verdicts[0] == verdicts[1] == verdicts[2]


def test_seed_changes_only_random_phase():
    f = parse("mono(s)")
    first = certify(f, Sense.FIRST, ctx, budget, use_patterns=False)
    second = certify(f, Sense.FIRST, ctx, budget.model_copy(update={"seed": 7}), use_patterns=False)
    assert first.status == second.status


### --- Relaxed and Classical Components --- ###
def test_relaxed_monomial():
    verdict = certify_relaxed(parse("mono(s)"), Sense.FIRST, ctx, budget)
    assert verdict.relaxed
    assert verdict.status is VerdictStatus.NO_VIOLATION_FOUND


def test_relaxed_positive_intercept():
    verdict = certify_relaxed(parse("mono(s) + fv(1)"), Sense.FIRST, ctx, budget)
    assert verdict.is_violation
    w = verdict.witness
    assert (w.u, w.v, w.lambda1, w.lambda2) == (0.0, 0.0, 0.0, 0.0)
    assert w.margin == pytest.approx(1.0)


def test_relaxed_second_sense_needs_zero_at_origin():
    assert certify_relaxed(example41(1, 1, -1), Sense.SECOND, ctx, budget).is_violation


def test_classical_power():
    verdict = certify_classical(parse_scalar("pow(u, 0.5)"), Sense.FIRST, 0.5, budget)
    assert verdict.status is VerdictStatus.NO_VIOLATION_FOUND
    assert verdict.alpha == 1.0


def test_classical_convex_square():
    assert not certify_classical(parse_scalar("pow(u, 2)"), Sense.SECOND, 1.0, budget).is_violation


def test_classical_negative_function():
    assert certify_classical(parse_scalar("-u"), Sense.SECOND, 0.5, budget).is_violation


EQUIVALENCE_TEXTS = [
    "mono(s)",
    "mono(2)",
    "mono(s) + fv(1)",
    "fb(-1) + mono(0.5)",
    "max(mono(1), fb(2))",
    "pw(u<=1 -> mono(s/(1-s)); u>1 -> fb(2)*mono(s/(1-s)))",
    "pw(u<=1 -> mono(1); u>1 -> fb(0.5)*mono(1))",
    *DEFAULT_CORPUS.values(),
]


@pytest.mark.parametrize("text", EQUIVALENCE_TEXTS)
@pytest.mark.parametrize("sense", [Sense.FIRST, Sense.SECOND])
def test_equivalence_with_classical_search(text, sense):
    f = parse(text)
    fractal = certify(f, sense, ctx, budget, use_patterns=False)
    classical = certify_classical(base_view(f, ctx), sense, ctx.s, budget, extra_points=breakpoints(f))
    assert fractal.status == classical.status
    assert fractal.witness == classical.witness
