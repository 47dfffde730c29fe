import pytest

from matchcast.core.config import CONFIG_ENV, Settings, load_settings, read_config_file
from matchcast.core.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)
    for name in ("MATCHCAST_SEED", "MATCHCAST_MODELS", "MATCHCAST_BT__TOL"):
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    s = load_settings()
    assert s.model_list == ["mn-dir1", "mn-dir2", "bt", "poisson-lee", "poisson-biv", "trivial"]
    assert s.poisson.training_window.kind == "all"
    assert s.dirichlet.alpha == 1.0
    assert s.calibration.level == 0.95


def test_config_file_with_sections(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed=7\nmodels=bt, trivial\nbt.tol=1e-6\npoisson.window=last_n_rounds:38\n")
    s = load_settings(cfg)
    assert s.seed == 7
    assert s.model_list == ["bt", "trivial"]
    assert s.bt.tol == 1e-6
    assert str(s.poisson.training_window) == "last_n_rounds:38"


def test_flags_override_file_and_env_fallback(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed=7\n")
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    assert load_settings().seed == 7
    assert load_settings(overrides={"seed": 9, "models": None}).seed == 9


def test_environment_variables(monkeypatch):
    monkeypatch.setenv("MATCHCAST_SEED", "123")
    monkeypatch.setenv("MATCHCAST_BT__TOL", "1e-5")
    s = load_settings()
    assert s.seed == 123
    assert s.bt.tol == 1e-5


@pytest.mark.parametrize(
    "text",
    ["models=elo\n", "poisson.window=weekly\n", "bt.tol=-1\n", "a.b.c=1\n", "colour=red\n"],
)
def test_invalid_settings(tmp_path, text):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(text)
    with pytest.raises(ConfigError):
        load_settings(cfg)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "nope.cfg")


def test_describe_round_trips(tmp_path):
    s = Settings(seed=5, models="bt,external:preds.csv")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(s.describe())
    assert "poisson.window=all" in s.describe()
    assert load_settings(cfg) == s
