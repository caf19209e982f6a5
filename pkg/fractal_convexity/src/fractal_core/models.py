from __future__ import annotations

import math
from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import pydantic
from pydantic import ConfigDict, Field, field_validator, model_validator


class _Frozen(pydantic.BaseModel):
    model_config = ConfigDict(frozen=True)


# === Fractal algebra ===
class AlphaContext(_Frozen):
    alpha: float = 0.5
    s: float = 0.5
    tol_base: float = 1e-12
    tol_violation: float = 1e-9

    @field_validator("alpha", "s")
    @classmethod
    def check_unit_interval(cls, value: float) -> float:
        if not 0.0 < value <= 1.0:
            raise ValueError(f"must lie in (0, 1], got {value}")
        return value

    @model_validator(mode="after")
    def check_tolerances(self) -> "AlphaContext":
        if not self.tol_violation > self.tol_base > 0.0:
            raise ValueError("tolerances must satisfy tol_violation > tol_base > 0")
        return self

    def with_s(self, s: float) -> "AlphaContext":
        return AlphaContext(
            alpha=self.alpha,
            s=s,
            tol_base=self.tol_base,
            tol_violation=self.tol_violation,
        )


class FractalScalar(_Frozen):
    """
    An element a^alpha of the fractal real line, stored by its base a.
    The alpha it lives under travels in the AlphaContext.
    """

    base: float

    def value(self, alpha: float) -> float:
        return math.copysign(abs(self.base) ** alpha, self.base) if self.base else 0.0


class Ordering(str, Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


# === Function model: scalar (real-valued) expressions ===
class SLiteral(_Frozen):
    kind: Literal["s_lit"] = "s_lit"
    value: float


class SVar(_Frozen):
    kind: Literal["s_var"] = "s_var"


class SBinary(_Frozen):
    kind: Literal["s_bin"] = "s_bin"
    op: Literal["+", "-", "*", "/"]
    left: ScalarExpr
    right: ScalarExpr


class SNeg(_Frozen):
    kind: Literal["s_neg"] = "s_neg"
    operand: ScalarExpr


class SPow(_Frozen):
    kind: Literal["s_pow"] = "s_pow"
    operand: ScalarExpr
    exponent: float


class Guard(_Frozen):
    op: Literal["==", "<", "<=", ">", ">=", "else"]
    threshold: float = 0.0


class SBranch(_Frozen):
    guard: Guard
    expr: ScalarExpr


class SPiecewise(_Frozen):
    kind: Literal["s_pw"] = "s_pw"
    branches: Tuple[SBranch, ...]


ScalarExpr = Annotated[
    Union[SLiteral, SVar, SBinary, SNeg, SPow, SPiecewise],
    Field(discriminator="kind"),
]


# === Function model: exponent coefficients k (may mention s) ===
class KNum(_Frozen):
    kind: Literal["k_num"] = "k_num"
    value: float


class KSym(_Frozen):
    kind: Literal["k_sym"] = "k_sym"
    name: Literal["s"] = "s"


class KBinary(_Frozen):
    kind: Literal["k_bin"] = "k_bin"
    op: Literal["+", "-", "*", "/"]
    left: KExpr
    right: KExpr


class KNeg(_Frozen):
    kind: Literal["k_neg"] = "k_neg"
    operand: KExpr


KExpr = Annotated[Union[KNum, KSym, KBinary, KNeg], Field(discriminator="kind")]


# === Function model: fractal-valued expressions ===
class FractalConst(_Frozen):
    kind: Literal["const"] = "const"
    mode: Literal["base", "value"]
    literal: float


class Mono(_Frozen):
    kind: Literal["mono"] = "mono"
    k: KExpr


class Sum(_Frozen):
    kind: Literal["sum"] = "sum"
    terms: Tuple[FunctionExpr, ...]
    signs: Tuple[int, ...]

    @model_validator(mode="after")
    def check_signs(self) -> "Sum":
        if len(self.signs) != len(self.terms) or any(
            sign not in (1, -1) for sign in self.signs
        ):
            raise ValueError("one sign (+1 or -1) per term is required")
        return self


class Product(_Frozen):
    kind: Literal["product"] = "product"
    factors: Tuple[FunctionExpr, ...]


class Max(_Frozen):
    kind: Literal["max"] = "max"
    left: FunctionExpr
    right: FunctionExpr


class Branch(_Frozen):
    guard: Guard
    expr: FunctionExpr


class Piecewise(_Frozen):
    kind: Literal["pw"] = "pw"
    branches: Tuple[Branch, ...]


class Subst(_Frozen):
    kind: Literal["subst"] = "subst"
    outer: FunctionExpr
    inner: ScalarExpr


FunctionExpr = Annotated[
    Union[FractalConst, Mono, Sum, Product, Max, Piecewise, Subst],
    Field(discriminator="kind"),
]

for _model in (SBinary, SNeg, SPow, SBranch, SPiecewise, KBinary, KNeg):
    _model.model_rebuild()
for _model in (Sum, Product, Max, Branch, Piecewise, Subst):
    _model.model_rebuild()

FunctionAdapter = pydantic.TypeAdapter(FunctionExpr)
ScalarAdapter = pydantic.TypeAdapter(ScalarExpr)


# === Fractal calculus ===
class MeshSpec(_Frozen):
    n_intervals: int = Field(default=4096, gt=0)
    refinement_levels: int = Field(default=4, ge=2)
    rel_stop: float = 1e-8


class LimitScheme(_Frozen):
    h0: float = Field(default=1e-2, gt=0)
    ratio: float = Field(default=0.5, gt=0, lt=1)
    terms: int = Field(default=20, ge=3)
    extrapolation: bool = True
    rel_converge: float = 1e-6

    def steps(self) -> List[float]:
        return [self.h0 * self.ratio**j for j in range(self.terms)]


class CalculusResult(pydantic.BaseModel):
    value: float
    base: float
    convergence_estimate: float
    levels_used: int
    converged: bool = True


class ContinuityReport(pydantic.BaseModel):
    x0: float
    continuous: bool
    obstructing_eps: Optional[float] = None
    jump_estimate: float = 0.0
    eps_checked: List[float] = []


class RatioLimitResult(pydantic.BaseModel):
    derivative_ratio: CalculusResult
    direct_ratio: CalculusResult
    agree: bool


class FtcResult(CalculusResult):
    """
    Derivative of the antiderivative anchored at a, taken at x; value and
    base are that derivative, residual its relative distance from f(x)
    """

    schema_version: str = Field(default="1", serialization_alias="schema")
    a: float
    x: float
    target_value: float
    residual: float


# === Convexity certifier ===
class Sense(str, Enum):
    FIRST = "first"
    SECOND = "second"


class SearchBudget(_Frozen):
    grid_n: int = Field(default=64, gt=0)
    t_grid_n: int = Field(default=128, gt=1)
    random_trials: int = Field(default=100_000, ge=0)
    refine_steps: int = Field(default=40, ge=0)
    seed: int = 0
    u_max: float = Field(default=10.0, gt=0)
    workers: int = Field(default=1, gt=0)
    block_size: int = Field(default=8192, gt=0)


class Witness(_Frozen):
    u: float
    v: float
    lambda1: float
    lambda2: float
    margin: float


class VerdictStatus(str, Enum):
    PROVEN_MEMBER = "proven_member"
    VIOLATION = "violation"
    NO_VIOLATION_FOUND = "no_violation_found"


class BudgetStats(pydantic.BaseModel):
    evaluations: int = 0
    max_margin_seen: Optional[float] = None


class ConvexityVerdict(pydantic.BaseModel):
    schema_version: str = Field(default="1", serialization_alias="schema")
    status: VerdictStatus
    sense: Sense
    s: float
    alpha: float
    relaxed: bool = False
    boundary_case: bool = False
    witness: Optional[Witness] = None
    rule_id: Optional[str] = None
    citation: Optional[str] = None
    budget_stats: BudgetStats = BudgetStats()

    @property
    def is_violation(self) -> bool:
        return self.status is VerdictStatus.VIOLATION


# === Theorem suite ===
class ConclusionStatus(str, Enum):
    HOLDS = "holds"
    FALSIFIED = "falsified"
    HYPOTHESIS_UNMET = "hypothesis_unmet"


class HypothesisCheck(pydantic.BaseModel):
    name: str
    passed: bool
    detail: Optional[str] = None


class TheoremReport(pydantic.BaseModel):
    theorem_id: str
    citation: str
    hypotheses_checked: List[HypothesisCheck] = []
    conclusion_status: ConclusionStatus
    witness: Optional[Witness] = None
    details: Dict[str, Any] = {}


class SandwichRow(pydantic.BaseModel):
    u: float
    lower_value: float
    phi_value: float
    upper_value: float
    lower_base: float
    phi_base: float
    upper_base: float
    convergence_estimate: float


class SandwichReport(pydantic.BaseModel):
    s: float
    alpha: float
    rows: List[SandwichRow]
    holds: bool


# === Example gallery ===
class Example41Params(_Frozen):
    a: float
    b: float
    c: float
    s: float = Field(gt=0, lt=1)


class Example42Params(_Frozen):
    k: float
    s: float = Field(gt=0, lt=1)

    @field_validator("k")
    @classmethod
    def check_k(cls, value: float) -> float:
        if not value > 1.0:
            raise ValueError(f"k must exceed 1, got {value}")
        return value


class Membership(str, Enum):
    MEMBER = "member"
    NON_MEMBER = "non_member"
    UNKNOWN = "unknown"


class ExampleExpectation(pydantic.BaseModel):
    first: Membership = Membership.UNKNOWN
    second: Membership = Membership.UNKNOWN
    cases: List[str] = []
    monotone_on_open: Optional[bool] = None
    monotone_on_closed: Optional[bool] = None
    continuous_at_one: Optional[bool] = None


class Ineq35Witness(pydantic.BaseModel):
    a: float
    lambda1: float
    margin: float
    witness: Witness


class RegressionRow(pydantic.BaseModel):
    family: str
    params: Dict[str, float]
    alpha: float
    sense: Sense
    expected: Membership
    observed: VerdictStatus
    margin: Optional[float] = None
    matches: bool


# === Requests (CLI and service) ===
class RunOptions(pydantic.BaseModel):
    """Optional per-request overrides of the configured defaults"""

    alpha: Optional[float] = None
    s: Optional[float] = None
    tol_violation: Optional[float] = None
    grid_n: Optional[int] = None
    t_grid_n: Optional[int] = None
    random_trials: Optional[int] = None
    refine_steps: Optional[int] = None
    seed: Optional[int] = None
    u_max: Optional[float] = None
    workers: Optional[int] = None


class ClassifyRequest(RunOptions):
    fn: str
    sense: Sense = Sense.FIRST
    relaxed: bool = False
    search_only: bool = False


class CalcRequest(RunOptions):
    fn: str
    x0: float = 0.0
    a: float = 0.0
    b: float = 1.0
    g: Optional[str] = None
    n_intervals: Optional[int] = None


class TheoremsRequest(RunOptions):
    suite: str = "all"
    corpus: str = "default"


class SandwichRequest(RunOptions):
    fn: str = "mono(1)"
    n_points: int = Field(default=100, gt=1)
    u_max_sandwich: float = Field(default=4.0, gt=0)


class ExamplesRequest(RunOptions):
    which: Literal["all", "4.1", "4.2", "ineq35", "matrix"] = "all"
    a: float = 0.0
    b: float = 1.0
    c: float = -1.0
    k: float = 2.0
    full_matrix: bool = False
