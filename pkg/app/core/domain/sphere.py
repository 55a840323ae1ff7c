"""
Geometry of phase directions on the unit sphere.

A nonzero phase point x = (y, y', y'') is written as |x| P(phi, theta) with
P(phi, theta) = (cos theta cos phi, cos theta sin phi, sin theta). The region

    Omega = {y y'' - y'^2 > 0}

splits into Omega_plus (y'' > 0) and its mirror image Omega_minus. Along a solution phi
increases exactly while the direction is inside Omega. The boundary of Omega_plus is the
curve theta = theta0(phi), |phi| < pi/2, closed through the pole (0, 0, 1).
"""
import logging
from functools import lru_cache
from typing import Literal, Optional, Tuple

import numpy as np
from scipy import integrate as si

from app.core.domain.errors import ExpressionDomainError, OutOfHorizonError, PoleError
from app.core.domain.models import State3, Trajectory, require
from app.core.domain.sphere_models import Region, RegionConstant, SphericalPoint, SphericalTrack

logger = logging.getLogger(__name__)

EPS_BOUNDARY = 1e-12
EPS_POLE = 1e-10
FROZEN_QUAD_TOL = 1e-12
MAX_REFINEMENTS = 40

REGION_CODES = (Region.OMEGA_PLUS, Region.OMEGA_MINUS, Region.BOUNDARY, Region.OUTSIDE)


def _nearest_branch(raw: float, previous: Optional[float]) -> float:
    if previous is None:
        return raw
    return raw + 2 * np.pi * np.round((previous - raw) / (2 * np.pi))


def to_spherical(x: State3, previous_phi: Optional[float] = None, eps_pole: float = EPS_POLE) -> SphericalPoint:
    """Direction of x; phi is lifted to the branch nearest `previous_phi` when one is given."""
    norm = x.norm()
    require(norm > 0.0, "the zero state has no direction")
    if x.y**2 + x.dy**2 < (eps_pole * norm) ** 2:
        raise PoleError()
    theta = float(np.arcsin(np.clip(x.ddy / norm, -1.0, 1.0)))
    return SphericalPoint(phi=_nearest_branch(float(np.arctan2(x.dy, x.y)), previous_phi), theta=theta)


def phi_dot(x: State3, eps_pole: float = EPS_POLE) -> float:
    """Angular speed of phi along the solution through x."""
    rho2 = x.y**2 + x.dy**2
    if rho2 <= 0.0 or rho2 < (eps_pole * x.norm()) ** 2:
        raise PoleError()
    return (x.ddy * x.y - x.dy**2) / rho2


def theta0(phi: float) -> float:
    """Boundary of Omega_plus over the half-plane cos(phi) > 0."""
    c = np.cos(phi)
    if abs(c) <= 1e-15:
        raise ExpressionDomainError(f"theta0 undefined where cos(phi) = 0 (phi={phi!r})")
    return float(np.arctan(np.sin(phi) ** 2 / c))


def theta0_tilde(phi: np.ndarray) -> np.ndarray:
    """theta0 where cos(phi) > 0 and pi/2 elsewhere; Omega_plus is exactly {theta > theta0_tilde(phi)}."""
    phi = np.asarray(phi, dtype=float)
    c = np.cos(phi)
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.arctan(np.sin(phi) ** 2 / c)
    return np.where(c > 1e-15, inner, np.pi / 2)


def region_codes(points: np.ndarray, eps_boundary: float = EPS_BOUNDARY) -> np.ndarray:
    """Vectorized classification of rows of `points` (shape (n, 3)); indexes into REGION_CODES."""
    points = np.atleast_2d(points)
    y, dy, ddy = points[:, 0], points[:, 1], points[:, 2]
    q = y * ddy - dy**2
    band = eps_boundary * np.sum(points**2, axis=1)
    codes = np.full(len(points), 3)
    codes[np.abs(q) <= band] = 2
    inside = q > band
    codes[inside & (ddy > 0)] = 0
    codes[inside & (ddy <= 0)] = 1
    return codes


def classify(x: State3, eps_boundary: float = EPS_BOUNDARY) -> Region:
    require(x.norm() > 0.0, "the zero state has no direction")
    return REGION_CODES[int(region_codes(x.as_array(), eps_boundary)[0])]


def reflect_mirror(x: State3) -> State3:
    """Reflection across the plane y + y'' = 0; swaps Omega_plus and Omega_minus."""
    return State3(y=-x.ddy, dy=x.dy, ddy=-x.y)


def cone_coordinates(x: State3) -> Tuple[float, float, float]:
    """(u, v, y') with u = (y + y'')/sqrt2, v = (y - y'')/sqrt2; Omega is u^2 > v^2 + 2 y'^2."""
    s = np.sqrt(0.5)
    return s * (x.y + x.ddy), s * (x.y - x.ddy), x.dy


def in_cone(x: State3) -> bool:
    u, v, w = cone_coordinates(x)
    return u != 0.0 and u * u > v * v + 2 * w * w


def _arc(points: np.ndarray) -> np.ndarray:
    """Great-circle distances between consecutive rows of unit vectors."""
    p, q = points[:-1], points[1:]
    return np.arctan2(np.linalg.norm(np.cross(p, q), axis=1), np.einsum("ij,ij->i", p, q))


def boundary_polyline(segments: int) -> np.ndarray:
    """Vertices of the closed boundary of Omega_plus: phi in [-pi/2, pi/2], both ends at the pole."""
    phi = np.linspace(-np.pi / 2, np.pi / 2, segments + 1)
    theta = theta0_tilde(phi)
    theta[0] = theta[-1] = np.pi / 2
    ct = np.cos(theta)
    points = np.column_stack([ct * np.cos(phi), ct * np.sin(phi), np.sin(theta)])
    points[0] = points[-1] = (0.0, 0.0, 1.0)
    return points


def boundary_length(method: Literal["quadrature", "polyline"] = "quadrature", resolution: float = 1e-10) -> RegionConstant:
    """
    Length of the boundary of Omega_plus.

    `resolution` is the requested absolute/relative tolerance for the quadrature method and
    the number of polyline segments for the polyline method.
    """
    if method == "quadrature":
        require(0.0 < resolution < 1.0, f"quadrature tolerance must lie in (0, 1), got {resolution!r}")
        value, err = si.quad(
            lambda a: np.sqrt(5.0 - np.cos(a)) / (7.0 + np.cos(a)),
            0.0,
            np.pi,
            epsabs=resolution,
            epsrel=resolution,
            limit=200,
        )
        return RegionConstant(value=4 * value, error_estimate=4 * err, method="quadrature", resolution=resolution)
    if method == "polyline":
        n = int(resolution)
        require(n >= 4 and n == resolution, f"polyline needs an integer number of segments >= 4, got {resolution!r}")
        coarse = float(np.sum(_arc(boundary_polyline(n))))
        fine = float(np.sum(_arc(boundary_polyline(2 * n))))
        value = (4 * fine - coarse) / 3
        error = abs(fine - coarse) + 2 * n * np.finfo(float).eps * value
        return RegionConstant(value=value, error_estimate=error, method="polyline", resolution=n)
    raise ValueError(f"unknown method {method!r}")


@lru_cache(maxsize=1)
def region_constant() -> RegionConstant:
    """The frozen quadrature value of L, computed once per process."""
    constant = boundary_length("quadrature", FROZEN_QUAD_TOL)
    logger.debug(f"L = {constant.value!r} (+/- {constant.error_estimate:.1e})")
    return constant


def spherical_track(traj: Trajectory, samples_per_step: int = 8, eps_pole: float = EPS_POLE) -> SphericalTrack:
    """
    Spherical image of a trajectory, sampled on its step grid.

    Intervals over which phi turns by more than pi/2 are bisected until it does not, so that
    nearest-branch unwrapping is unambiguous. Samples within `eps_pole` of a pole are dropped
    and their times recorded as pole events.
    """
    ts = traj.step_grid(samples_per_step)
    min_width = 1e-12 * max(1.0, abs(traj.t_end))
    for _ in range(MAX_REFINEMENTS):
        states = traj.states_at(ts)
        raw = np.arctan2(states[:, 1], states[:, 0])
        turn = np.abs(np.mod(np.diff(raw) + np.pi, 2 * np.pi) - np.pi)
        coarse = (turn > np.pi / 2) & (np.diff(ts) > min_width)
        if not coarse.any():
            break
        ts = np.sort(np.concatenate([ts, 0.5 * (ts[:-1][coarse] + ts[1:][coarse])]))
    else:
        logger.warning(f"⚠️ phi still turns by more than pi/2 between samples after {MAX_REFINEMENTS} refinements")
        states = traj.states_at(ts)
        raw = np.arctan2(states[:, 1], states[:, 0])

    norms = np.linalg.norm(states, axis=1)
    rho2 = states[:, 0] ** 2 + states[:, 1] ** 2
    pole = rho2 < (eps_pole * norms) ** 2
    if pole.all():
        raise PoleError("trajectory stays on a pole", t=float(ts[0]))
    keep = ~pole
    return SphericalTrack(
        t=ts[keep],
        phi=np.unwrap(raw[keep]),
        theta=np.arcsin(np.clip(states[keep, 2] / norms[keep], -1.0, 1.0)),
        pole_events=[float(t) for t in ts[pole]],
    )


def _endpoint(track: SphericalTrack, t: float) -> np.ndarray:
    phi = float(np.interp(t, track.t, track.phi))
    theta = float(np.interp(t, track.t, track.theta))
    return SphericalPoint(phi=phi, theta=theta).embed()


def track_length(track: SphericalTrack, t0: Optional[float] = None, t1: Optional[float] = None) -> float:
    """Sum of great-circle distances between consecutive samples with t0 <= t <= t1."""
    lo, hi = float(track.t[0]), float(track.t[-1])
    t0 = lo if t0 is None else t0
    t1 = hi if t1 is None else t1
    slack = 1e-12 * max(1.0, abs(hi))
    if t0 < lo - slack or t1 > hi + slack or t0 > t1:
        raise OutOfHorizonError(t0 if t0 < lo - slack or t0 > t1 else t1, lo, hi)
    inner = (track.t > t0) & (track.t < t1)
    points = np.vstack([_endpoint(track, t0), track.points()[inner], _endpoint(track, t1)])
    return float(np.sum(_arc(points)))


def loop_length_bound(n_loops: int, theta_start: float, theta_end: float, constant: Optional[RegionConstant] = None) -> float:
    """Lower bound N L - |theta_end - theta_start| for a curve avoiding Omega that winds N times around the pole."""
    require(n_loops >= 1, f"number of loops must be at least 1, got {n_loops}")
    constant = constant or region_constant()
    return n_loops * constant.value - abs(theta_end - theta_start)
