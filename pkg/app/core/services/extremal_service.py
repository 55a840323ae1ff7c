"""
Equations whose solutions wander as little as their zeros allow.

The construction follows a curve theta = F(phi) that hugs the boundary of Omega_plus from
outside: F is a mollified copy of theta0_tilde - delta/(4 pi). Prescribing the direction
P(phi0(t), F(phi0(t))) and solving for the coefficients yields an equation with exactly two
zeros per period and wandering length per period equal to the length of the curve, so that
mu/nu approaches L/(2 pi) as delta shrinks.
"""
import asyncio
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as si

from app.core.domain.errors import ConstructionFailedError, IntegrandSignError, IntegrationError, TrackMismatchError
from app.core.domain.models import CoefficientSpec, State3, Trajectory, require
from app.core.domain.report_models import ExtremalModel, ExtremalReport, FCurve, TrackedSolution
from app.core.domain.sphere import region_constant, spherical_track, theta0_tilde
from app.core.domain.sphere_models import RegionConstant
from app.core.domain.wandering import wandering_length
from app.core.domain.zeros import find_zeros
from app.core.ports.integrator_port import IntegratorPort

logger = logging.getLogger(__name__)

MAX_DELTA = 1.0
DEFAULT_GRID_FACTOR = 32
MAX_GRID_FACTOR = 128
MIN_SEGMENTS_PER_PERIOD = 16
MAX_SEGMENTS_PER_PERIOD = 4096
ZERO_MERGE_WINDOW = 1e-6
RESIDUAL_SAMPLES = 2001


def _theta0_tilde_slope(phi: np.ndarray) -> np.ndarray:
    s, c = np.sin(phi), np.cos(phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = (2 * s * c**2 + s**3) / (c**2 + s**4)
    return np.where(c > 1e-15, inner, 0.0)


def _bump(offsets: np.ndarray, width: float) -> Tuple[np.ndarray, np.ndarray]:
    """exp(-1/(1 - u^2)) on |u| < 1 with u = offset/width, and its derivative in the offset."""
    u = offsets / width
    inside = np.abs(u) < 1.0
    value = np.zeros_like(u)
    slope = np.zeros_like(u)
    one_minus = 1.0 - u[inside] ** 2
    value[inside] = np.exp(-1.0 / one_minus)
    slope[inside] = value[inside] * (-2.0 * u[inside] / one_minus**2) / width
    return value, slope


def _mollify(delta: float, grid_factor: int, mollifier_factor: float) -> FCurve:
    width = delta / (mollifier_factor * np.pi)
    n = 1 << int(np.ceil(np.log2(2 * np.pi * grid_factor / width)))
    h = 2 * np.pi / n
    phi = np.pi + h * np.arange(n)
    target = theta0_tilde(phi) - delta / (4 * np.pi)
    target_slope = _theta0_tilde_slope(phi)

    offsets = h * np.arange(n)
    offsets[offsets > np.pi] -= 2 * np.pi
    kernel, kernel_slope = _bump(offsets, width)
    norm = float(np.sum(kernel))
    require(norm > 0.0, "mollifier is not resolved by the grid")
    spectrum = np.fft.rfft(target)
    F = np.fft.irfft(spectrum * np.fft.rfft(kernel / norm), n)
    dF = np.fft.irfft(spectrum * np.fft.rfft(kernel_slope / norm), n)

    w11 = h * float(np.sum(np.abs(F - target)) + np.sum(np.abs(dF - target_slope)))
    gap = float(np.min(theta0_tilde(phi) - F))
    ceiling = float(np.max(F) - (np.pi / 2 - delta / (8 * np.pi)))
    rate = float(np.max(np.tan(F) * np.cos(phi) - np.sin(phi) ** 2))
    if gap <= 0.0:
        raise ConstructionFailedError(f"curve touches Omega_plus (gap {gap!r})")
    if ceiling > 0.0:
        raise ConstructionFailedError(f"curve exceeds pi/2 - delta/(8 pi) by {ceiling!r}")
    if rate >= 0.0:
        raise ConstructionFailedError(f"time map not strictly decreasing (rate {rate!r})")

    phi_closed = np.append(phi, 3 * np.pi)
    F_closed = np.append(F, F[0])
    dF_closed = np.append(dF, dF[0])
    # Periodic trapezoid rule: spectrally accurate for smooth periodic integrands.
    length = h * float(np.sum(np.sqrt(dF**2 + np.cos(F) ** 2)))
    logger.debug(f"F(delta={delta}): {n} nodes, W11={w11:.2e}, gap={gap:.2e}, length={length:.8f}")
    return FCurve(
        delta=delta,
        phi_grid=phi_closed,
        F=F_closed,
        dF=dF_closed,
        grid_factor=grid_factor,
        mollifier_width=width,
        length=length,
        plain_integral=h * float(np.sum(F)),
        w11_distance=w11,
    )


def build_F(
    delta: float,
    grid_factor: int = DEFAULT_GRID_FACTOR,
    mollifier_factor: float = 40.0,
    max_grid_factor: int = MAX_GRID_FACTOR,
) -> FCurve:
    """
    Mollify theta0_tilde - delta/(4 pi) with a bump of half-width delta/(mollifier_factor pi).

    The periodic convolution runs by FFT on a grid fine enough to resolve the bump with about
    `grid_factor` nodes per half-width. The result is verified: W^1_1 distance to the target below
    delta/(16 pi), strictly below theta0_tilde, at most pi/2 - delta/(8 pi), and with a strictly
    decreasing time map. The W^1_1 distance is a grid effect, so a miss doubles the grid until
    `max_grid_factor`.
    """
    require(0.0 < delta < MAX_DELTA, f"delta must lie in (0, {MAX_DELTA}), got {delta!r}")
    require(grid_factor >= 2, "grid factor must be at least 2")
    require(max_grid_factor >= grid_factor, "grid factor cap must not be below the grid factor")
    require(mollifier_factor > 4.0, "mollifier factor must exceed 4 so the bump stays inside the margin")

    limit = delta / (16 * np.pi)
    factor = grid_factor
    while True:
        curve = _mollify(delta, factor, mollifier_factor)
        if curve.w11_distance < limit:
            return curve
        if 2 * factor > max_grid_factor:
            raise ConstructionFailedError(
                f"W11 distance {curve.w11_distance!r} not below delta/(16 pi) = {limit!r} at grid factor {factor}"
            )
        logger.warning(
            f"⚠️ delta={delta}: W11 distance {curve.w11_distance:.2e} >= {limit:.2e} at grid factor {factor}, refining to {2 * factor}"
        )
        factor *= 2


def time_reparam(curve: FCurve, periods: int = 1) -> ExtremalModel:
    """
    t(phi) = integral from pi to phi of dphi / (tan F cos phi - sin^2 phi), with T = -t(3 pi).

    The grid values come from cumulative Simpson; T is cross-checked by adaptive quadrature and
    t(pi - 2 pi k) = k T is verified period by period for k = 1..periods.
    """
    require(periods >= 1, "need at least one period")
    phi = curve.phi_grid
    rate = curve.phi_rate(phi)
    positive = np.nonzero(rate >= 0.0)[0]
    if len(positive):
        i = int(positive[0])
        raise IntegrandSignError(float(phi[i]), float(rate[i]))

    tau = si.cumulative_simpson(1.0 / rate, x=phi, initial=0.0)
    period = -float(tau[-1])

    def dt_dphi(p: float) -> float:
        return 1.0 / float(curve.phi_rate(np.array([p]))[0])

    breaks = list(np.pi + np.pi / 2 * np.arange(1, 4))
    per_period = []
    for k in range(1, periods + 1):
        lo, hi = np.pi - 2 * np.pi * k, np.pi - 2 * np.pi * (k - 1)
        value, _ = si.quad(dt_dphi, lo, hi, points=[b - 2 * np.pi * k for b in breaks], limit=2000, epsabs=1e-12, epsrel=1e-12)
        per_period.append(value)
    residuals = [abs(total - k * period) for k, total in enumerate(np.cumsum(per_period), start=1)]
    logger.debug(f"T={period!r}, quadrature T={per_period[0]!r}, max period residual {max(residuals):.2e}")
    return ExtremalModel(curve=curve, period=period, period_quad=per_period[0], tau=tau, period_residuals=residuals)


def synthesize_coefficients(model: ExtremalModel) -> ExtremalModel:
    """
    Coefficients of y''' = A y + B y' + C y'' whose solutions follow (phi0, Theta0):

        A = Theta0' cos phi0, B = Theta0' sin phi0,
        C = Theta0' tan Theta0 + sin phi0 (cos phi0 + tan Theta0),

    tabulated on one period and carried over as a = -C, b = -B, c = -A.
    """
    curve = model.curve
    s = (model.tau + model.period)[::-1]
    phi = (curve.phi_grid - 2 * np.pi)[::-1]
    theta = curve.F[::-1]
    theta_dot = curve.dF[::-1] * curve.phi_rate(phi)
    A, B, C = extremal_coefficients(phi, theta, theta_dot)
    spec = CoefficientSpec.from_table(s, -C, -B, -A, period=model.period, label=f"extremal(delta={curve.delta})")
    return model.model_copy(update={"coeffs": spec})


def extremal_coefficients(phi: np.ndarray, theta: np.ndarray, theta_dot: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    tan_theta = np.tan(theta)
    A = theta_dot * np.cos(phi)
    B = theta_dot * np.sin(phi)
    C = theta_dot * tan_theta + np.sin(phi) * (np.cos(phi) + tan_theta)
    return A, B, C


def build_model(
    delta: float,
    periods: int,
    grid_factor: int = DEFAULT_GRID_FACTOR,
    mollifier_factor: float = 40.0,
    max_grid_factor: int = MAX_GRID_FACTOR,
) -> ExtremalModel:
    return synthesize_coefficients(time_reparam(build_F(delta, grid_factor, mollifier_factor, max_grid_factor), periods))


def prescribed_direction(model: ExtremalModel, t: float) -> State3:
    """The unit state P(phi0(t), Theta0(t))."""
    phi = float(model.phi0(np.array([t]))[0])
    theta = float(model.Theta0(np.array([t]))[0])
    return State3(y=np.cos(theta) * np.cos(phi), dy=np.cos(theta) * np.sin(phi), ddy=np.sin(theta))


def track_deviation(model: ExtremalModel, traj: Trajectory) -> Tuple[float, float]:
    """Largest deviation of the solution's (phi, theta) from (phi0, Theta0), and where it occurs."""
    track = spherical_track(traj)
    reference = model.phi0(track.t)
    # unwrapping starts on the principal branch; move it onto phi0's
    phi = track.phi + 2 * np.pi * np.round((reference[0] - track.phi[0]) / (2 * np.pi))
    deviation = np.maximum(np.abs(phi - reference), np.abs(track.theta - model.Theta0(track.t)))
    i = int(np.argmax(deviation))
    return float(deviation[i]), float(track.t[i])


def follow_track(
    integrator: IntegratorPort,
    model: ExtremalModel,
    periods: int,
    rtol: float = 1e-10,
    atol: float = 1e-14,
    track_tolerance: float = 1e-3,
    restart_tolerance: float = 1e-5,
) -> TrackedSolution:
    """
    Integrate the extremal equation over `periods` periods as a chain of short segments.

    Every segment restarts on P(phi0, Theta0) with unit norm. A segment that strays more than
    `restart_tolerance` is halved down to T / MAX_SEGMENTS_PER_PERIOD; past that it is accepted
    only within `track_tolerance`. Segments never straddle a period boundary.
    """
    require(model.coeffs is not None, "model has no coefficients")
    require(0.0 < restart_tolerance <= track_tolerance, "restart tolerance must lie in (0, track tolerance]")
    T = model.period
    min_length, max_length = T / MAX_SEGMENTS_PER_PERIOD, T / MIN_SEGMENTS_PER_PERIOD
    length = max_length

    segments: List[Trajectory] = []
    period_of: List[int] = []
    jumps: List[float] = []
    hidden: List[float] = []
    worst, worst_t = 0.0, 0.0
    for k in range(periods):
        t, end = k * T, (k + 1) * T
        while t < end:
            t1 = min(t + length, end)
            if end - t1 < 0.5 * min_length:
                t1 = end
            try:
                traj = integrator.integrate(model.coeffs, prescribed_direction(model, t), (t, t1), rtol, atol)
                deviation, where = track_deviation(model, traj)
            except IntegrationError:
                if length <= min_length:
                    raise
                length = max(0.5 * length, min_length)
                continue
            if deviation > restart_tolerance and length > min_length:
                length = max(0.5 * length, min_length)
                logger.debug(f"segment at t={t:.6g} strays by {deviation:.1e}, halving to {length:.3g}")
                continue
            if deviation > track_tolerance:
                raise TrackMismatchError(deviation, where)

            if deviation > worst:
                worst, worst_t = deviation, where
            segments.append(traj)
            period_of.append(k)
            if t1 < periods * T:
                final = traj.states[-1] / np.linalg.norm(traj.states[-1])
                restart = prescribed_direction(model, t1).as_array()
                jumps.append(float(np.linalg.norm(final - restart)))
                if final[0] * restart[0] < 0.0:
                    hidden.append(t1)
            t = t1
            if deviation < restart_tolerance / 16:
                length = min(2 * length, max_length)

    tracked = TrackedSolution(
        segments=segments,
        period_of=period_of,
        max_deviation=worst,
        max_deviation_time=worst_t,
        restart_jumps=jumps,
        hidden_crossings=hidden,
    )
    logger.debug(f"delta={model.delta}: {len(segments)} segments, largest restart jump {tracked.max_restart_jump:.1e}")
    return tracked


def merge_zero_times(tracked: TrackedSolution) -> List[float]:
    """
    Zeros of all segments plus sign changes hidden in restarts, each root counted once.

    A root near a boundary can show up in both neighbouring segments, shifted by at most the restart jump.
    """
    slack = 2 * tracked.max_restart_jump
    times = sorted([z.t for traj in tracked.segments for z in find_zeros(traj)] + tracked.hidden_crossings)
    merged: List[float] = []
    for t in times:
        if merged and t - merged[-1] <= ZERO_MERGE_WINDOW * max(1.0, abs(t)) + slack:
            continue
        merged.append(t)
    return merged


def equation_residual(model: ExtremalModel, traj: Trajectory, samples: int = 2001) -> float:
    """
    Relative residual of y''' - (A y + B y' + C y'') along the solution, with y''' from central
    differences of y'' and A, B, C evaluated from the curve rather than the tabulated spec.
    """
    h = 1e-7 * max(1.0, model.period)
    ts = np.linspace(traj.t_start + h, traj.t_end - h, samples)
    states = traj.states_at(ts)
    third = (traj.states_at(ts + h)[:, 2] - traj.states_at(ts - h)[:, 2]) / (2 * h)
    A, B, C = extremal_coefficients(model.phi0(ts), model.Theta0(ts), model.Theta0_dot(ts))
    residual = third - (A * states[:, 0] + B * states[:, 1] + C * states[:, 2])
    return float(np.max(np.abs(residual) / np.linalg.norm(states, axis=1)))


def run_extremal_experiment(
    integrator: IntegratorPort,
    delta: float,
    periods: int = 10,
    rtol: float = 1e-10,
    atol: float = 1e-14,
    track_tolerance: float = 1e-3,
    quad_tol: float = 1e-9,
    grid_factor: int = DEFAULT_GRID_FACTOR,
    mollifier_factor: float = 40.0,
    constant: Optional[RegionConstant] = None,
    model: Optional[ExtremalModel] = None,
    restart_tolerance: float = 1e-5,
) -> ExtremalReport:
    """Build the model for `delta` (unless one is given), follow it over `periods` periods and measure mu/nu."""
    require(periods >= 3, f"need at least three periods, got {periods}")
    constant = constant or region_constant()
    model = model or build_model(delta, periods, grid_factor, mollifier_factor)
    horizon = periods * model.period

    tracked = follow_track(integrator, model, periods, rtol, atol, track_tolerance, restart_tolerance)
    nu = len(merge_zero_times(tracked))
    lengths = [wandering_length(traj, tol=quad_tol) for traj in tracked.segments]
    gamma = float(sum(lengths))
    gamma_one = float(sum(g for g, k in zip(lengths, tracked.period_of) if k == 0))
    samples = max(16, RESIDUAL_SAMPLES // len(tracked.segments))
    residual = max(equation_residual(model, traj, samples) for traj in tracked.segments)

    mu_est = gamma / horizon
    nu_est = np.pi * nu / horizon
    report = ExtremalReport(
        delta=model.delta,
        periods=periods,
        period=model.period,
        nu=nu,
        expected_nu=2 * periods,
        gamma=gamma,
        gamma_one_period=gamma_one,
        mu_est=mu_est,
        nu_est=nu_est,
        ratio=mu_est / nu_est if nu else float("inf"),
        floor=constant.ratio,
        ceiling=(constant.value + model.delta) / (2 * np.pi),
        max_track_deviation=tracked.max_deviation,
        max_deviation_time=tracked.max_deviation_time,
        max_restart_jump=tracked.max_restart_jump,
        segments=len(tracked.segments),
        grid_factor=model.curve.grid_factor,
        length_F=model.curve.length,
        plain_integral=model.curve.plain_integral,
        w11_distance=model.curve.w11_distance,
        period_residual=max(model.period_residuals + [abs(model.period - model.period_quad)]),
        max_equation_residual=residual,
    )
    logger.info(
        f"{'✅' if report.holds else '❌'} delta={model.delta}: T={model.period:.6f} nu={nu} ratio={report.ratio:.6f} "
        f"(floor {report.floor:.6f}), {report.segments} segments, track deviation {report.max_track_deviation:.1e}"
    )
    return report


class ExtremalService:
    def __init__(
        self,
        integrator: IntegratorPort,
        rtol: float = 1e-10,
        atol: float = 1e-14,
        track_tolerance: float = 1e-3,
        quad_tol: float = 1e-9,
        grid_factor: int = DEFAULT_GRID_FACTOR,
        mollifier_factor: float = 40.0,
        max_concurrent: int = 4,
        restart_tolerance: float = 1e-5,
        max_grid_factor: int = MAX_GRID_FACTOR,
    ):
        self.integrator = integrator
        self.rtol = rtol
        self.atol = atol
        self.track_tolerance = track_tolerance
        self.restart_tolerance = restart_tolerance
        self.quad_tol = quad_tol
        self.grid_factor = grid_factor
        self.max_grid_factor = max_grid_factor
        self.mollifier_factor = mollifier_factor
        self.max_concurrent = max_concurrent

    def build(self, delta: float, periods: int = 10, grid_factor: Optional[int] = None) -> ExtremalModel:
        factor = grid_factor or self.grid_factor
        return build_model(delta, periods, factor, self.mollifier_factor, max(factor, self.max_grid_factor))

    def run(self, delta: float, periods: int = 10, grid_factor: Optional[int] = None) -> Tuple[ExtremalModel, ExtremalReport]:
        require(periods >= 3, f"need at least three periods, got {periods}")
        model = self.build(delta, periods, grid_factor)
        report = run_extremal_experiment(
            self.integrator,
            delta,
            periods,
            self.rtol,
            self.atol,
            self.track_tolerance,
            self.quad_tol,
            model=model,
            restart_tolerance=self.restart_tolerance,
        )
        return model, report

    def convergence_gap(self, delta: float, periods: int = 10, reference: Optional[ExtremalReport] = None) -> float:
        """Change in the measured ratio when the F grid is doubled."""
        base = reference or self.run(delta, periods)[1]
        finer = self.run(delta, periods, 2 * base.grid_factor)[1]
        return abs(finer.ratio - base.ratio)

    async def run_sweep(self, deltas: Sequence[float], periods: int = 10) -> List[Tuple[ExtremalModel, ExtremalReport]]:
        """Run several deltas concurrently; results come back in the order of `deltas`."""
        semaphore = asyncio.Semaphore(self.max_concurrent)

        async def run_one(delta: float) -> Tuple[ExtremalModel, ExtremalReport]:
            async with semaphore:
                return await asyncio.to_thread(self.run, delta, periods)

        return list(await asyncio.gather(*[run_one(d) for d in deltas]))


def sweep_checks(reports: Sequence[ExtremalReport]) -> Dict[str, bool]:
    """Ratios grow with delta and stay above the floor."""
    ordered = sorted(reports, key=lambda r: r.delta, reverse=True)
    ratios = [r.ratio for r in ordered]
    return {
        "ratio_increases_with_delta": all(b < a for a, b in zip(ratios, ratios[1:])),
        "ratio_above_floor": all(r.ratio > r.floor for r in ordered),
    }
