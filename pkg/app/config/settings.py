import configparser
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.domain.errors import PreconditionError


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_prefix="WANDER_",
        extra="ignore",
    )

    # Integration
    rtol: float = 1e-9
    atol: float = 1e-12
    method: str = "DOP853"

    # Measurement
    quad_tol: float = 1e-9
    eps_boundary: float = 1e-12
    eps_pole: float = 1e-10
    zero_slope_factor: float = 1e-8
    samples_per_step: int = 8

    # Constant L
    polyline_segments: int = 1_000_000
    constant_tol: float = 1e-10

    # Extremal construction
    extremal_periods: int = 10
    extremal_grid_factor: int = 32
    extremal_max_grid_factor: int = 128
    extremal_mollifier_factor: float = 40.0
    track_tolerance: float = 1e-3
    restart_tolerance: float = 1e-5

    # Randomized sweep
    sweep_size: int = 100
    sweep_horizon: float = 50.0
    sweep_radius: float = 1.0
    sweep_degree: int = 2
    sweep_workers: int = 4
    seed: int = 42

    log_level: str = "INFO"


class _RunConfig(BaseModel):
    """Unknown keys are errors, so a misspelt config entry cannot pass silently."""
    model_config = ConfigDict(extra="forbid")


class ConstantConfig(_RunConfig):
    method: str = Field(default="both", pattern="^(both|quadrature|polyline)$")
    tol: float = Field(default=1e-10, gt=0.0, lt=1.0)
    segments: int = Field(default=1_000_000, ge=4)
    agreement: float = Field(default=1e-6, gt=0.0)


class AnalyzeConfig(_RunConfig):
    a: str = "0"
    b: str = "1"
    c: str = "0"
    init: Tuple[float, float, float] = (0.0, 1.0, 0.0)
    horizon: float = Field(default=20.0, gt=0.0)
    rtol: float = Field(default=1e-9, gt=0.0)
    atol: float = Field(default=1e-12, gt=0.0)
    method: str = "DOP853"
    quad_tol: float = Field(default=1e-9, gt=0.0)
    zero_slope_factor: float = Field(default=1e-8, gt=0.0)
    samples_per_step: int = Field(default=8, ge=1)
    rates: List[float] = []
    tail_fraction: float = Field(default=0.5, gt=0.0, le=1.0)

    @field_validator("init", mode="before")
    @classmethod
    def _parse_init(cls, value: Any) -> Any:
        return _split_floats(value)

    @field_validator("rates", mode="before")
    @classmethod
    def _parse_rates(cls, value: Any) -> Any:
        return _split_floats(value)


class ExtremalConfig(_RunConfig):
    delta: List[float] = [0.1]
    periods: int = Field(default=10, ge=1)
    rtol: float = Field(default=1e-10, gt=0.0)
    atol: float = Field(default=1e-14, gt=0.0)
    method: str = "DOP853"
    quad_tol: float = Field(default=1e-9, gt=0.0)
    grid_factor: int = Field(default=32, ge=2)
    max_grid_factor: int = Field(default=128, ge=2)
    mollifier_factor: float = Field(default=40.0, gt=4.0)
    track_tolerance: float = Field(default=1e-3, gt=0.0)
    restart_tolerance: float = Field(default=1e-5, gt=0.0)
    convergence_check: bool = False
    workers: int = Field(default=4, ge=1)

    @field_validator("delta", mode="before")
    @classmethod
    def _parse_delta(cls, value: Any) -> Any:
        return _split_floats(value)


class SweepConfig(_RunConfig):
    size: int = Field(default=100, ge=1)
    seed: int = Field(default=42, ge=0)
    horizon: float = Field(default=50.0, gt=0.0)
    radius: float = Field(default=1.0, gt=0.0)
    degree: int = Field(default=2, ge=0)
    rtol: float = Field(default=1e-9, gt=0.0)
    atol: float = Field(default=1e-12, gt=0.0)
    method: str = "DOP853"
    quad_tol: float = Field(default=1e-9, gt=0.0)
    workers: int = Field(default=4, ge=1)


RunConfig = Union[ConstantConfig, AnalyzeConfig, ExtremalConfig, SweepConfig]

RUN_CONFIGS: Dict[str, Type[BaseModel]] = {
    "constant": ConstantConfig,
    "analyze": AnalyzeConfig,
    "extremal": ExtremalConfig,
    "sweep": SweepConfig,
}


def _split_floats(value: Any) -> Any:
    """Accept '0, 1, 0' from config files as well as real sequences."""
    if isinstance(value, str):
        parts = [p for p in value.replace(",", " ").split() if p]
        return [float(p) for p in parts]
    return value


def settings_defaults(command: str, s: Settings) -> Dict[str, Any]:
    """Environment-level defaults that apply to a command's run config."""
    common = {"rtol": s.rtol, "atol": s.atol, "method": s.method, "quad_tol": s.quad_tol}
    if command == "constant":
        return {"tol": s.constant_tol, "segments": s.polyline_segments}
    if command == "analyze":
        return {**common, "zero_slope_factor": s.zero_slope_factor, "samples_per_step": s.samples_per_step}
    if command == "extremal":
        return {
            "periods": s.extremal_periods,
            "grid_factor": s.extremal_grid_factor,
            "max_grid_factor": s.extremal_max_grid_factor,
            "mollifier_factor": s.extremal_mollifier_factor,
            "track_tolerance": s.track_tolerance,
            "restart_tolerance": s.restart_tolerance,
            "quad_tol": s.quad_tol,
            "method": s.method,
            "workers": s.sweep_workers,
        }
    if command == "sweep":
        return {
            **common,
            "size": s.sweep_size,
            "seed": s.seed,
            "horizon": s.sweep_horizon,
            "radius": s.sweep_radius,
            "degree": s.sweep_degree,
            "workers": s.sweep_workers,
        }
    raise PreconditionError(f"unknown command {command!r}")


def read_config_section(path: Path, command: str) -> Dict[str, str]:
    """Flat `key = value` pairs from the `[command]` section of a config file."""
    parser = configparser.ConfigParser(interpolation=None)
    with open(path, encoding="utf-8") as handle:
        parser.read_file(handle)
    if not parser.has_section(command):
        return {}
    return dict(parser.items(command))


def load_run_config(
    command: str,
    config_path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    settings: Optional[Settings] = None,
) -> RunConfig:
    """Settings (environment, .env) < config file section < command-line overrides."""
    if command not in RUN_CONFIGS:
        raise PreconditionError(f"unknown command {command!r}")
    values: Dict[str, Any] = settings_defaults(command, settings or Settings())
    if config_path is not None:
        values.update(read_config_section(Path(config_path), command))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return RUN_CONFIGS[command](**values)
