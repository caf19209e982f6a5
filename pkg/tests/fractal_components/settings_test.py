import pydantic
import pytest

from fractal_core.utils import reporting
from fractal_core.utils.settings import Settings


### --- Settings Components --- ###
def test_defaults():
    settings = Settings(_env_file=None)
    ctx = settings.context()
    assert (ctx.alpha, ctx.s, ctx.tol_violation) == (0.5, 0.5, 1e-9)
    assert settings.budget().random_trials == 100_000
    assert settings.mesh().n_intervals == 4096


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("FRACTAL_ALPHA", "0.8")
    monkeypatch.setenv("FRACTAL_GRID_N", "12")
    settings = Settings(_env_file=None)
    assert settings.context().alpha == 0.8
    assert settings.budget().grid_n == 12


def test_request_overrides_skip_unset_values():
    settings = Settings(_env_file=None)
    assert settings.context(alpha=None, s=0.25).s == 0.25
    assert settings.context(alpha=None).alpha == 0.5
    assert settings.budget(seed=3, workers=None).seed == 3


def test_invalid_override():
    with pytest.raises(pydantic.ValidationError):
        Settings(_env_file=None).context(alpha=1.5)


### --- Reporting Components --- ###
def test_json_is_key_sorted():
    text = reporting.to_json({"b": 1, "a": [Settings(_env_file=None).context()]})
    assert text.index('"a"') < text.index('"b"')
    assert '"tol_base": 1e-12' in text


def test_report_written_to_file(tmp_path):
    path = tmp_path / "report.json"
    reporting.emit("{}", str(path))
    assert path.read_text() == "{}\n"
