import logging
from typing import Callable, List, Optional, Sequence

import numpy as np

from app.core.domain.models import CoefficientSpec, State3, Trajectory, require
from app.core.domain.report_models import OscillationReport, RateEstimate
from app.core.domain.sphere import region_constant, spherical_track, track_length
from app.core.domain.sphere_models import RegionConstant
from app.core.domain.wandering import wandering_length_with_error
from app.core.domain.zeros import find_zeros
from app.core.ports.integrator_port import IntegratorPort

logger = logging.getLogger(__name__)

RATE_SLACK = 0.02


def oscillation_report(
    traj: Trajectory,
    constant: Optional[RegionConstant] = None,
    quad_tol: float = 1e-9,
    slope_factor: float = 1e-8,
    samples_per_step: int = 8,
) -> OscillationReport:
    """Zero count, wandering length and the lower bound the zero count forces on the latter."""
    constant = constant or region_constant()
    L = constant.value

    zeros = find_zeros(traj, slope_factor=slope_factor, samples_per_step=samples_per_step)
    nu = len(zeros)
    gamma, gamma_err = wandering_length_with_error(traj, tol=quad_tol)
    track = spherical_track(traj, samples_per_step=samples_per_step)
    gamma_polyline = track_length(track)

    bound = 0.5 * (nu - 5) * L
    pairs = nu // 2
    return OscillationReport(
        horizon=traj.t_end,
        nu=nu,
        zeros=[z.t for z in zeros],
        multiple_zeros=[z.t for z in zeros if not z.simple],
        gamma=gamma,
        gamma_tol=max(quad_tol, gamma_err),
        bound=bound,
        margin=gamma - bound,
        intermediate_bound=(pairs - 1) * L - np.pi,
        loop_bound=(pairs - 2) * L,
        phi_drop=None if track.pole_events else float(track.phi[0] - track.phi[-1]),
        gamma_polyline=gamma_polyline,
        polyline_deviation=abs(gamma_polyline - gamma),
        pole_events=track.pole_events,
        region_constant=L,
    )


def rate_estimate(
    traj_factory: Callable[[float], Trajectory],
    horizons: Sequence[float],
    tail_fraction: float = 0.5,
    constant: Optional[RegionConstant] = None,
    quad_tol: float = 1e-9,
) -> RateEstimate:
    """
    Tail max/min of gamma/t and pi nu/t over increasing horizons.

    These are finite-horizon estimators of the upper and lower limits, not the limits.
    """
    horizons = [float(h) for h in horizons]
    require(len(horizons) >= 3, "need at least three horizons")
    require(horizons[0] > 0 and all(b > a for a, b in zip(horizons, horizons[1:])), "horizons must be positive and increasing")
    require(0.0 < tail_fraction <= 1.0, "tail fraction must lie in (0, 1]")
    constant = constant or region_constant()

    gammas: List[float] = []
    nus: List[int] = []
    for horizon in horizons:
        report = oscillation_report(traj_factory(horizon), constant, quad_tol=quad_tol)
        gammas.append(report.gamma)
        nus.append(report.nu)

    mu = [g / h for g, h in zip(gammas, horizons)]
    nu_rate = [np.pi * n / h for n, h in zip(nus, horizons)]
    tail = max(1, int(np.ceil(tail_fraction * len(horizons))))
    mu_hat, mu_check = max(mu[-tail:]), min(mu[-tail:])
    nu_hat, nu_check = max(nu_rate[-tail:]), min(nu_rate[-tail:])
    ratio = constant.ratio
    return RateEstimate(
        horizons=horizons,
        gamma_series=gammas,
        nu_series=nus,
        mu_series=mu,
        nu_rate_series=nu_rate,
        mu_hat=mu_hat,
        mu_check=mu_check,
        nu_hat=nu_hat,
        nu_check=nu_check,
        tail_fraction=tail_fraction,
        upper_rate_ok=mu_hat >= ratio * nu_hat - RATE_SLACK,
        lower_rate_ok=nu_check <= mu_check / ratio + RATE_SLACK,
    )


class OscillationService:
    """Integrates an equation through the integrator port and measures its oscillation."""

    def __init__(
        self,
        integrator: IntegratorPort,
        rtol: float = 1e-9,
        atol: float = 1e-12,
        quad_tol: float = 1e-9,
        slope_factor: float = 1e-8,
        samples_per_step: int = 8,
        constant: Optional[RegionConstant] = None,
    ):
        self.integrator = integrator
        self.rtol = rtol
        self.atol = atol
        self.quad_tol = quad_tol
        self.slope_factor = slope_factor
        self.samples_per_step = samples_per_step
        self.constant = constant

    def trajectory(self, spec: CoefficientSpec, init: State3, horizon: float) -> Trajectory:
        return self.integrator.integrate(spec, init, (0.0, horizon), self.rtol, self.atol)

    def analyze(self, spec: CoefficientSpec, init: State3, horizon: float) -> OscillationReport:
        traj = self.trajectory(spec, init, horizon)
        report = oscillation_report(
            traj, self.constant, self.quad_tol, self.slope_factor, self.samples_per_step
        )
        logger.info(
            f"{'✅' if report.holds else '❌'} nu={report.nu} gamma={report.gamma:.6f} "
            f"bound={report.bound:.6f} margin={report.margin:.6f}"
        )
        return report

    def rates(
        self, spec: CoefficientSpec, init: State3, horizons: Sequence[float], tail_fraction: float = 0.5
    ) -> RateEstimate:
        return rate_estimate(
            lambda horizon: self.trajectory(spec, init, horizon), horizons, tail_fraction, self.constant, self.quad_tol
        )
