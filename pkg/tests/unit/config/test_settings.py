"""
Unit tests for settings and per-command run configs.
"""
import pytest
from pydantic import ValidationError

from app.config.settings import (
    AnalyzeConfig,
    ExtremalConfig,
    Settings,
    SweepConfig,
    load_run_config,
    read_config_section,
)
from app.core.domain.errors import PreconditionError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(
        "[analyze]\n"
        "a = 0\n"
        "b = 1 + 0.5*sin(t)\n"
        "init = 0, 1, 0\n"
        "horizon = 50\n"
        "rates = 50 100 200\n"
        "\n"
        "[sweep]\n"
        "size = 12\n"
        "seed = 7\n"
        "\n"
        "[extremal]\n"
        "delta = 0.5, 0.1\n",
        encoding="utf-8",
    )
    return path


@pytest.mark.unit
class TestSettings:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("WANDER_RTOL", raising=False)
        s = Settings(_env_file=None)
        assert s.rtol == 1e-9
        assert s.method == "DOP853"
        assert s.seed == 42

    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("WANDER_RTOL", "1e-7")
        monkeypatch.setenv("WANDER_SWEEP_SIZE", "5")
        s = Settings(_env_file=None)
        assert s.rtol == 1e-7
        assert s.sweep_size == 5


@pytest.mark.unit
class TestRunConfig:
    def test_file_section(self, config_file):
        values = read_config_section(config_file, "analyze")
        assert values["b"] == "1 + 0.5*sin(t)"
        assert read_config_section(config_file, "constant") == {}

    def test_layering(self, config_file, monkeypatch):
        monkeypatch.setenv("WANDER_RTOL", "1e-8")
        config = load_run_config("analyze", config_file, {"horizon": 20.0}, Settings(_env_file=None))
        assert isinstance(config, AnalyzeConfig)
        assert config.rtol == 1e-8
        assert config.b == "1 + 0.5*sin(t)"
        assert config.init == (0.0, 1.0, 0.0)
        assert config.rates == [50.0, 100.0, 200.0]
        assert config.horizon == 20.0

    def test_none_overrides_are_ignored(self, config_file):
        config = load_run_config("sweep", config_file, {"size": None, "seed": 3}, Settings(_env_file=None))
        assert isinstance(config, SweepConfig)
        assert config.size == 12
        assert config.seed == 3

    def test_delta_list(self, config_file):
        config = load_run_config("extremal", config_file, settings=Settings(_env_file=None))
        assert isinstance(config, ExtremalConfig)
        assert config.delta == [0.5, 0.1]
        assert config.atol == 1e-14
        assert config.grid_factor == 32
        assert config.max_grid_factor == 128
        assert config.restart_tolerance == 1e-5

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[sweep]\nsizee = 3\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            load_run_config("sweep", path, settings=Settings(_env_file=None))

    def test_unknown_command(self):
        with pytest.raises(PreconditionError):
            load_run_config("plot")

    def test_serializable(self):
        config = AnalyzeConfig(init="1 0 0")
        dumped = config.model_dump(mode="json")
        assert dumped["init"] == [1.0, 0.0, 0.0]
        assert AnalyzeConfig(**dumped) == config

    def test_ranges(self):
        with pytest.raises(ValidationError):
            SweepConfig(size=0)
        with pytest.raises(ValidationError):
            AnalyzeConfig(horizon=-1.0)
