import json

import pytest

from integrations.cli.core import run

SMALL = ["--grid-n", "8", "--t-grid-n", "16", "--trials", "500", "--refine-steps", "5"]
EXAMPLE41 = "pw(u==0 -> fb(0); u>0 -> fb(1)*mono(s) + fb(-1))"


### --- Classify Components --- ###
def test_classify_member(capsys):
    assert run(["classify", "--fn", "mono(s)", *SMALL]) == 0
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["status"] == "proven_member"
    assert verdict["schema"] == "1"


def test_classify_violation_exit_code(capsys):
    assert run(["classify", "--fn", EXAMPLE41, "--sense", "2", *SMALL]) == 1
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["status"] == "violation"
    assert verdict["witness"]["margin"] > 0


def test_classify_text_output(capsys):
    assert run(["classify", "--fn", "mono(s)", "--output", "text", *SMALL]) == 0
    assert capsys.readouterr().out.startswith("proven_member (first sense")


def test_classify_reads_function_file(tmp_path, capsys):
    path = tmp_path / "f.txt"
    path.write_text("mono(s)\n")
    assert run(["classify", "--fn", str(path), *SMALL]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "proven_member"


def test_bad_expression_is_usage_error(capsys):
    assert run(["classify", "--fn", "mono(x)", *SMALL]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_alpha_is_usage_error():
    assert run(["classify", "--fn", "mono(s)", "--alpha", "2", *SMALL]) == 2


### --- Calc Components --- ###
def test_calc_integrate(capsys):
    assert run(["calc", "integrate", "--fn", "mono(1)", "--from", "0", "--to", "1"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["value"] == pytest.approx(0.7978846, abs=1e-4)


def test_calc_derive(capsys):
    assert run(["calc", "derive", "--fn", "mono(2)", "--x0", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] == pytest.approx(1.7724539, abs=1e-6)


def test_calc_ftc(capsys):
    assert run(["calc", "ftc", "--fn", "mono(1)", "--from", "0", "--x", "2"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["residual"] < 1e-6
    assert result["schema"] == "1"
    assert {"value", "base", "convergence_estimate", "levels_used", "converged"} <= set(result)


def test_calc_ftc_needs_point_past_anchor():
    assert run(["calc", "ftc", "--fn", "mono(1)"]) == 2


def test_ratio_limit_needs_second_function():
    assert run(["calc", "ratio-limit", "--fn", "mono(1)"]) == 2


### --- Theorem Suite Components --- ###
def test_theorems_traceability_table(capsys):
    assert run(["theorems", "--suite", "thm35", "--output", "text", *SMALL]) == 0
    table = capsys.readouterr().out
    assert "thm35" in table
    assert "holds" in table


def test_unknown_suite():
    assert run(["theorems", "--suite", "thm99", *SMALL]) == 2


def test_missing_corpus_is_usage_error(tmp_path, capsys):
    missing = tmp_path / "absent.txt"
    assert run(["theorems", "--suite", "thm31a", "--corpus", str(missing), *SMALL]) == 2
    assert "absent.txt" in capsys.readouterr().err


def test_calc_continuity_sees_jump(capsys):
    fn = "pw(u<=1 -> mono(s/(1-s)); u>1 -> fb(2)*mono(s/(1-s)))"
    assert run(["calc", "continuity", "--fn", fn, "--x0", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["continuous"] is False
    assert report["jump_estimate"] == pytest.approx(1.0, abs=1e-6)


### --- Sandwich and Examples Components --- ###
def test_sandwich_csv(capsys):
    assert run(["sandwich", "--points", "5", "--output", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "u,lower_value,phi_value,upper_value"
    assert len(lines) == 6


def test_examples_42(capsys):
    assert run(["examples", "--which", "4.2", *SMALL]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["example42"]["second"]["status"] == "violation"
    assert result["example42"]["continuity_at_one"]["continuous"] is False
    assert result["ineq35"]["margin"] > 0


def test_examples_bad_k():
    assert run(["examples", "--which", "4.2", "--k", "1", *SMALL]) == 2


def test_report_written_to_file(tmp_path, capsys):
    out = tmp_path / "verdict.json"
    assert run(["classify", "--fn", "mono(s)", "--out", str(out), *SMALL]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["status"] == "proven_member"


# --- Usage --- #
def test_unknown_command():
    assert run(["prove"]) == 2


def test_missing_function():
    assert run(["classify"]) == 2
