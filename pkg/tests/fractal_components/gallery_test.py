import numpy as np
import pydantic
import pytest

from fractal_core.exceptions import ParameterError
from fractal_core.models import (
    AlphaContext,
    Example41Params,
    Example42Params,
    Membership,
    SearchBudget,
    Sense,
    VerdictStatus,
)
from fractal_core.services import gallery
from fractal_core.services.certifier import certify, inequality_margin
from fractal_core.services.expressions import evaluate

ctx = AlphaContext(alpha=0.5, s=0.5)
budget = SearchBudget(grid_n=16, t_grid_n=32, random_trials=2000, refine_steps=10)


### --- Example 4.1 Components --- ###
def test_negative_offset_classification():
    f, expected = gallery.make_example41(Example41Params(a=0, b=1, c=-1, s=0.5), ctx)
    assert expected.first is Membership.MEMBER
    assert expected.second is Membership.NON_MEMBER
    assert expected.cases == ["i", "ii", "iv"]
    assert expected.monotone_on_open and not expected.monotone_on_closed
    assert evaluate(f, 0.0, ctx).base == 0.0
    assert evaluate(f, 4.0, ctx).base == pytest.approx(1.0)


def test_gap_classification():
    _, expected = gallery.make_example41(Example41Params(a=1, b=1, c=0, s=0.5), ctx)
    assert expected.cases == ["i", "ii", "iii"]
    assert expected.second is Membership.MEMBER


def test_continuous_classification():
    _, expected = gallery.make_example41(Example41Params(a=0, b=1, c=0, s=0.5), ctx)
    assert expected.cases == ["i", "iii"]
    assert expected.monotone_on_closed


def test_example41_needs_open_unit_order():
    with pytest.raises(pydantic.ValidationError):
        Example41Params(a=0, b=1, c=0, s=1.0)


### --- Example 4.2 Components --- ###
def test_example42_shape():
    f, expected = gallery.make_example42(Example42Params(k=2.0, s=0.5), ctx)
    assert evaluate(f, 1.0, ctx).base == pytest.approx(1.0)
    assert evaluate(f, 2.0, ctx).base == pytest.approx(4.0)
    assert expected.first is Membership.MEMBER
    assert expected.second is Membership.NON_MEMBER
    assert expected.continuous_at_one is False


@pytest.mark.parametrize("k", [1.0, 0.5, -2.0])
def test_example42_needs_k_above_one(k):
    with pytest.raises(ParameterError):
        gallery.example42_params(k, 0.5)


def test_ineq35_margin_vanishes_without_weight():
    params = Example42Params(k=2.0, s=0.5)
    np.testing.assert_allclose(gallery.ineq35_margin(params, np.array([1.5, 3.0]), 0.0), 0.0, atol=1e-12)


@pytest.mark.parametrize("k, s", [(2.0, 0.5), (1.5, 0.25), (4.0, 0.5)])
def test_ineq35_witness(k, s):
    params = gallery.example42_params(k, s)
    found = gallery.find_ineq35_witness(params, ctx, budget.model_copy(update={"t_grid_n": 256, "refine_steps": 40}))
    assert found is not None
    assert found.a > 1.0
    assert found.margin > ctx.tol_violation
    w = found.witness
    assert w.u == 1.0
    assert w.lambda1 + w.lambda2 == pytest.approx(1.0)
    assert w.margin == pytest.approx(found.margin, rel=1e-9)
    f, _ = gallery.make_example42(params, ctx)
    replay = inequality_margin(f, w.u, w.v, w.lambda1, w.lambda2, ctx.with_s(s))
    assert replay > ctx.tol_violation


def test_ineq35_witness_must_replay(monkeypatch):
    monkeypatch.setattr(gallery, "inequality_margin", lambda *args, **kwargs: 0.0)
    assert gallery.find_ineq35_witness(gallery.example42_params(2.0, 0.5), ctx, budget) is None


@pytest.mark.parametrize("k, s", [(4.0, 0.25), (2.0, 0.5)])
def test_example42_violates_second_sense(k, s):
    local = ctx.with_s(s)
    f, _ = gallery.make_example42(Example42Params(k=k, s=s), local)
    verdict = certify(f, Sense.SECOND, local, budget, use_patterns=False)
    assert verdict.is_violation
    w = verdict.witness
    assert inequality_margin(f, w.u, w.v, w.lambda1, w.lambda2, local) == pytest.approx(w.margin, abs=1e-10)
    assert not certify(f, Sense.FIRST, local, budget).is_violation


### --- Regression Matrix Components --- ###
def test_regression_matrix_matches_classification():
    rows = gallery.regression_matrix(ctx, budget, full=False)
    assert len(rows) == 2 * (27 + 4) + 2
    assert all(row.matches for row in rows)
    example42_second = [r for r in rows if r.family == "example42" and r.sense is Sense.SECOND]
    assert example42_second[0].observed is VerdictStatus.VIOLATION


def test_full_matrix_covers_every_order():
    cases = gallery.regression_cases(ctx, full=True)
    assert {case[5].alpha for case in cases} == {0.3, 0.5, 0.8}
    assert {case[1]["s"] for case in cases} == {0.25, 0.5, 0.75}


def test_observed_membership():
    assert gallery.observed_membership(VerdictStatus.VIOLATION) is Membership.NON_MEMBER
    assert gallery.observed_membership(VerdictStatus.PROVEN_MEMBER) is Membership.MEMBER
    assert gallery.observed_membership(VerdictStatus.NO_VIOLATION_FOUND) is Membership.UNKNOWN


@pytest.mark.slow
def test_full_matrix_at_default_budget():
    rows = gallery.regression_matrix(ctx, SearchBudget(), full=True)
    assert len(rows) == 3 * 3 * 2 * (27 + 4) + 3 * 6 * 2
    assert [row for row in rows if not row.matches] == []
