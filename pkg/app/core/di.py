from typing import Union

from app.adapters.integration.scipy_integrator import ScipyIntegrator
from app.adapters.reporting import FileReportWriter, TextReportRenderer
from app.config.settings import AnalyzeConfig, ExtremalConfig, SweepConfig
from app.core.ports.integrator_port import IntegratorPort
from app.core.ports.report_port import ReportWriterPort
from app.core.services.extremal_service import ExtremalService
from app.core.services.oscillation_service import OscillationService
from app.core.services.sweep_service import SweepService


def build_integrator(method: str = "DOP853") -> IntegratorPort:
    return ScipyIntegrator(method=method)


def build_oscillation_service(config: Union[AnalyzeConfig, SweepConfig]) -> OscillationService:
    """Oscillation measurements with the tolerances of a run config."""
    extra = {}
    if isinstance(config, AnalyzeConfig):
        extra = {"slope_factor": config.zero_slope_factor, "samples_per_step": config.samples_per_step}
    return OscillationService(
        integrator=build_integrator(config.method),
        rtol=config.rtol,
        atol=config.atol,
        quad_tol=config.quad_tol,
        **extra,
    )


def build_sweep_service(config: SweepConfig) -> SweepService:
    return SweepService(build_oscillation_service(config), max_concurrent=config.workers)


def build_extremal_service(config: ExtremalConfig) -> ExtremalService:
    return ExtremalService(
        integrator=build_integrator(config.method),
        rtol=config.rtol,
        atol=config.atol,
        track_tolerance=config.track_tolerance,
        restart_tolerance=config.restart_tolerance,
        quad_tol=config.quad_tol,
        grid_factor=config.grid_factor,
        max_grid_factor=config.max_grid_factor,
        mollifier_factor=config.mollifier_factor,
        max_concurrent=config.workers,
    )


def build_report_writer() -> ReportWriterPort:
    return FileReportWriter()


def build_text_renderer() -> TextReportRenderer:
    return TextReportRenderer()
