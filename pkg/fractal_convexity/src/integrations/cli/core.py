"""
fractal-convexity command line.

Exit codes: 0 completed, 1 violation or falsification found, 2 usage or
evaluation error. Reports go to standard output (or --out), logs to
standard error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import pydantic

from fractal_core import components
from fractal_core.exceptions import FractalError
from fractal_core.models import (
    CalcRequest,
    ClassifyRequest,
    ConclusionStatus,
    ExamplesRequest,
    SandwichRequest,
    Sense,
    TheoremsRequest,
)
from fractal_core.utils import reporting
from fractal_core.utils.settings import get_settings

logger = logging.getLogger(__name__)

SENSES = {"1": Sense.FIRST, "2": Sense.SECOND, "first": Sense.FIRST, "second": Sense.SECOND}


def _function_text(value: str) -> str:
    """DSL text, or the contents of a file holding it"""
    path = Path(value)
    if len(value) < 256 and path.is_file():
        return path.read_text().strip()
    return value


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, help="fractal order alpha in (0, 1]")
    parser.add_argument("--s", type=float, help="convexity order s in (0, 1]")
    parser.add_argument("--grid-n", type=int, dest="grid_n", help="grid points per u/v axis")
    parser.add_argument("--t-grid-n", type=int, dest="t_grid_n", help="grid points on the t axis")
    parser.add_argument("--trials", type=int, dest="random_trials", help="random trials")
    parser.add_argument("--refine-steps", type=int, dest="refine_steps")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--tol", type=float, dest="tol_violation", help="violation threshold in base space")
    parser.add_argument("--u-max", type=float, dest="u_max", help="search domain cap")
    parser.add_argument("--workers", type=int, help="parallel search workers")
    parser.add_argument("--output", choices=["json", "csv", "text"], default="json")
    parser.add_argument("--json", action="store_const", const="json", dest="output")
    parser.add_argument("--out", dest="out_path", help="write the report here instead of stdout")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractal-convexity",
        description="Generalized s-convexity on fractal sets: certifier, calculus and theorem checks",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    classify = commands.add_parser("classify", help="certify GK_s^1 / GK_s^2 membership")
    _common(classify)
    classify.add_argument("--fn", required=True, help="function in the DSL, or a file holding it")
    classify.add_argument("--sense", choices=sorted(SENSES), default="1")
    classify.add_argument("--relaxed", action="store_true", help="relaxed constraint (sum < 1)")
    classify.add_argument("--search-only", action="store_true", dest="search_only")

    suite = commands.add_parser("theorems", help="run the theorem suite")
    _common(suite)
    suite.add_argument("--suite", default="all", help="'all' or comma separated theorem/test ids")
    suite.add_argument("--corpus", default="default", help="'default' or a corpus file")

    calc = commands.add_parser("calc", help="local fractional calculus")
    calc.add_argument("operation", choices=["derive", "integrate", "continuity", "ratio-limit", "ftc"])
    _common(calc)
    calc.add_argument("--fn", required=True)
    calc.add_argument("--g", help="second function for ratio-limit")
    calc.add_argument("--x0", "--x", type=float, default=0.0, dest="x0")
    calc.add_argument("--from", type=float, default=0.0, dest="a")
    calc.add_argument("--to", type=float, default=1.0, dest="b")
    calc.add_argument("--n-intervals", type=int, dest="n_intervals")

    sandwich = commands.add_parser("sandwich", help="Phi construction and sandwich grid")
    _common(sandwich)
    sandwich.add_argument("--fn", default="mono(1)")
    sandwich.add_argument("--points", type=int, default=100, dest="n_points")
    sandwich.add_argument("--u-max-sandwich", type=float, default=4.0, dest="u_max_sandwich")

    examples = commands.add_parser("examples", help="example gallery and regression matrix")
    _common(examples)
    examples.add_argument("--which", choices=["all", "4.1", "4.2", "ineq35", "matrix"], default="all")
    for name, default in (("a", 0.0), ("b", 1.0), ("c", -1.0), ("k", 2.0)):
        examples.add_argument(f"--{name}", type=float, default=default)
    examples.add_argument("--full-matrix", action="store_true", dest="full_matrix")
    return parser


def configure_logging(verbose: int) -> None:
    level = {0: get_settings().log_level, 1: "INFO"}.get(verbose, "DEBUG")
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _options(args: argparse.Namespace, *skip: str) -> dict:
    ignored = {"command", "output", "out_path", "verbose", *skip}
    return {key: value for key, value in vars(args).items() if key not in ignored}


def _run_command(args: argparse.Namespace) -> tuple[str, int]:
    match args.command:
        case "classify":
            options = _options(args)
            options["fn"] = _function_text(args.fn)
            options["sense"] = SENSES[args.sense]
            verdict = components.classify(ClassifyRequest(**options))
            if args.output == "text":
                text = f"{verdict.status.value} ({verdict.sense.value} sense, s={verdict.s}, alpha={verdict.alpha})"
                if verdict.witness:
                    text += f"\nwitness: {verdict.witness.model_dump()}"
            else:
                text = reporting.to_json(verdict)
            return text, 1 if verdict.is_violation else 0
        case "theorems":
            reports = components.run_theorems(TheoremsRequest(**_options(args)))
            failed = any(r.conclusion_status is ConclusionStatus.FALSIFIED for r in reports)
            text = reporting.traceability_table(reports) if args.output == "text" else reporting.to_json(reports)
            return text, 1 if failed else 0
        case "calc":
            options = _options(args, "operation")
            options["fn"] = _function_text(args.fn)
            result = components.calculate(args.operation, CalcRequest(**options))
            return reporting.to_json(result), 0
        case "sandwich":
            options = _options(args)
            options["fn"] = _function_text(args.fn)
            report = components.sandwich(SandwichRequest(**options))
            if args.output == "csv":
                text = reporting.to_csv(reporting.sandwich_frame(report))
            else:
                text = reporting.to_json(report)
            return text, 0 if report.holds else 1
        case "examples":
            result = components.examples(ExamplesRequest(**_options(args)))
            rows = result.get("matrix") or []
            mismatched = any(not row.matches for row in rows)
            if args.output == "csv" and rows:
                text = reporting.to_csv(reporting.regression_frame(rows))
            else:
                text = reporting.to_json(result)
            return text, 1 if mismatched else 0
    raise ValueError(f"Invalid command: {args.command}")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    configure_logging(args.verbose)
    try:
        text, code = _run_command(args)
    except (pydantic.ValidationError, FractalError, ValueError, OSError) as error:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {error}", file=sys.stderr)
        return 2
    try:
        reporting.emit(text, args.out_path)
    except OSError as error:
        print(f"error: cannot write report: {error}", file=sys.stderr)
        return 2
    return code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
