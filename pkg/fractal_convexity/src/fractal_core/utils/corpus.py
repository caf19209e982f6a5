"""
Shipped function corpus and the default theorem suite built on it
"""

from pathlib import Path
from typing import Dict, List

from fractal_core.exceptions import CorpusError
from fractal_core.models import AlphaContext, MeshSpec, SearchBudget, Sense
from fractal_core.services import theorems
from fractal_core.services.expressions import combine, parse, parse_scalar
from fractal_core.services.theorems import SuiteEntry

DEFAULT_CORPUS: Dict[str, str] = {
    "const_base_one": "fb(1)",
    "const_value_two": "fv(2)",
    "zero": "fb(0)",
    "mono_half": "mono(0.5)",
    "mono_one": "mono(1)",
    "mono_two": "mono(2)",
    "mono_s": "mono(s)",
    "example41_i_iii": "pw(u==0 -> fb(0); u>0 -> fb(1)*mono(s) + fb(0))",
    "example41_ii": "pw(u==0 -> fb(1); u>0 -> fb(1)*mono(s) + fb(0))",
    "example41_iv": "pw(u==0 -> fb(0); u>0 -> fb(1)*mono(s) + fb(-1))",
}


def load_corpus(name: str = "default") -> Dict[str, str]:
    """
    The shipped corpus, or a file with one 'name: dsl' (or bare dsl) per line
    """
    if name == "default":
        return dict(DEFAULT_CORPUS)
    try:
        content = Path(name).read_text()
    except OSError as error:
        raise CorpusError(f"cannot read corpus {name}: {error}") from error
    corpus = {}
    for number, line in enumerate(content.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        label, sep, text = line.partition(":")
        corpus[label.strip() if sep else f"fn{number}"] = text.strip() if sep else line
    return corpus


def _at(s: float):
    def wrap(check):
        return lambda ctx, budget, mesh: check(ctx.with_s(s), budget, mesh)

    return wrap


def default_suite() -> List[SuiteEntry]:
    """Every theorem check on instances whose hypotheses hold"""
    mono_s = parse("mono(s)")
    ex41_member = parse(DEFAULT_CORPUS["example41_i_iii"])
    ex41_gap = parse(DEFAULT_CORPUS["example41_ii"])
    u_to_s = parse_scalar("pow(u, 0.5)")
    half = _at(0.5)

    entries = [
        SuiteEntry("thm31a_mono_s", "thm31a", half(lambda c, b, m: theorems.check_thm31(mono_s, "a", c, b))),
        SuiteEntry("thm31a_example41_gap", "thm31a", half(lambda c, b, m: theorems.check_thm31(ex41_gap, "a", c, b))),
        SuiteEntry("thm31b_example41", "thm31b", half(lambda c, b, m: theorems.check_thm31(ex41_member, "b", c, b))),
        SuiteEntry(
            "bivariate_sum", "bivariate", half(lambda c, b, m: theorems.check_bivariate_convex(theorems.SUM_ALPHA, c.s, c))
        ),
        SuiteEntry(
            "bivariate_max", "bivariate", half(lambda c, b, m: theorems.check_bivariate_convex(theorems.MAX_ALPHA, c.s, c))
        ),
        SuiteEntry(
            "thm32_sum",
            "thm32",
            half(lambda c, b, m: theorems.check_thm32(theorems.SUM_ALPHA, u_to_s, u_to_s, c.s, c, b)),
        ),
        SuiteEntry(
            "thm32_max",
            "thm32",
            half(lambda c, b, m: theorems.check_thm32(theorems.MAX_ALPHA, u_to_s, u_to_s, c.s, c, b)),
        ),
        SuiteEntry(
            "thm32_max_scaled",
            "thm32",
            half(
                lambda c, b, m: theorems.check_thm32(
                    theorems.MAX_ALPHA, u_to_s, parse_scalar("2 * pow(u, 0.5)"), c.s, c, b
                )
            ),
        ),
        SuiteEntry("thm33a_mono_s", "thm33a", half(lambda c, b, m: theorems.check_thm33(mono_s, Sense.FIRST, c, b))),
        SuiteEntry(
            "thm33a_shifted",
            "thm33a",
            half(lambda c, b, m: theorems.check_thm33(parse("mono(s) + fv(1)"), Sense.FIRST, c, b)),
        ),
        SuiteEntry(
            "thm33b_example41", "thm33b", half(lambda c, b, m: theorems.check_thm33(ex41_member, Sense.SECOND, c, b))
        ),
        SuiteEntry("thm34a_mono_s", "thm34a", half(lambda c, b, m: theorems.check_thm34(mono_s, "a", c, b))),
        SuiteEntry(
            "thm34b_mono_s2",
            "thm34b",
            lambda c, b, m: theorems.check_thm34(mono_s, "b", c, b, s1=0.3, s2=0.6),
        ),
        SuiteEntry(
            "thm34c_mono_s2",
            "thm34c",
            lambda c, b, m: theorems.check_thm34(mono_s, "c", c, b, s1=0.3, s2=0.6),
        ),
        SuiteEntry("thm35_constant", "thm35", lambda c, b, m: theorems.check_thm35(parse("fv(1)"), 0.5, c, b)),
        SuiteEntry(
            "thm35_step",
            "thm35",
            lambda c, b, m: theorems.check_thm35(parse("pw(u<=1 -> fv(1); u>1 -> fv(2))"), 0.5, c, b),
        ),
        SuiteEntry(
            "thm35_ramp", "thm35", lambda c, b, m: theorems.check_thm35(parse("fb(1) + mono(1)"), 0.5, c, b)
        ),
        SuiteEntry(
            "thm36a_compose",
            "thm36a",
            lambda c, b, m: theorems.check_thm36(mono_s, u_to_s, "compose", 0.5, 0.5, c, b),
        ),
        SuiteEntry(
            "thm36b_product",
            "thm36b",
            lambda c, b, m: theorems.check_thm36(parse("mono(0.5)"), parse("mono(0.5)"), "product", 0.5, 0.5, c, b),
        ),
        SuiteEntry(
            "thm36b_mixed",
            "thm36b",
            lambda c, b, m: theorems.check_thm36(parse("mono(0.3)"), parse("mono(0.6)"), "product", 0.3, 0.6, c, b),
        ),
        SuiteEntry(
            "remark34_product",
            "remark34",
            lambda c, b, m: theorems.check_thm36(parse("mono(1)"), parse("mono(1)"), "product", 1.0, 1.0, c, b),
        ),
        SuiteEntry(
            "remark33_compose",
            "remark33",
            half(lambda c, b, m: theorems.check_remark33(mono_s, parse_scalar("u * u + 1"), c, b)),
        ),
        SuiteEntry("phi_type_mono_s", "phi_type", half(lambda c, b, m: theorems.phi_type_check(mono_s, c))),
        SuiteEntry(
            "cor31_particular", "cor31", lambda c, b, m: theorems.check_corollaries("3.1", parse("mono(1)"), None, 0.5, c, b)
        ),
        SuiteEntry(
            "cor32_particular",
            "cor32",
            lambda c, b, m: theorems.check_corollaries("3.2", parse_scalar("u"), None, 0.5, c, b),
        ),
        SuiteEntry(
            "cor32_square",
            "cor32",
            lambda c, b, m: theorems.check_corollaries("3.2", parse_scalar("pow(u, 2)"), None, 0.5, c, b),
        ),
        SuiteEntry(
            "thm37_mono_one", "thm37", lambda c, b, m: theorems.check_thm37(parse("mono(1)"), 0.5, c, b, m)
        ),
        SuiteEntry(
            "thm37_thm35_ramp",
            "thm37",
            lambda c, b, m: theorems.check_thm37(
                combine("thm35_pattern", parse("fb(1) + mono(1)"), s=0.5), 0.5, c, b, m
            ),
        ),
    ]
    return entries


def select_suite(suite: str) -> List[SuiteEntry]:
    """'all' or a comma separated list of theorem ids or test ids"""
    entries = default_suite()
    if suite == "all":
        return entries
    wanted = {item.strip() for item in suite.split(",") if item.strip()}
    chosen = [e for e in entries if e.theorem_id in wanted or e.test_id in wanted]
    unknown = wanted - {e.theorem_id for e in chosen} - {e.test_id for e in chosen}
    if unknown:
        known = sorted({e.theorem_id for e in entries})
        raise ValueError(f"Invalid suite: {sorted(unknown)}. Must be 'all' or from {known}")
    return chosen


def corpus_suite(corpus: Dict[str, str]) -> List[SuiteEntry]:
    """
    Theorem 3.1 on every corpus function that the certifier does not reject
    """
    entries = []
    for name, text in corpus.items():
        f = parse(text)
        for part in ("a", "b"):
            entries.append(
                SuiteEntry(
                    f"thm31{part}_{name}",
                    f"thm31{part}",
                    lambda c, b, m, f=f, part=part: theorems.check_thm31(f, part, c, b),
                )
            )
    return entries
