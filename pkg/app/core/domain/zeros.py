"""Zeros of a solution y on its closed horizon [0, T]."""
from typing import Callable, List

import numpy as np
from pydantic import BaseModel, Field
from scipy import optimize

from app.core.domain.models import Trajectory

ArrayFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_SLOPE_FACTOR = 1e-8
DEFAULT_SAMPLES_PER_STEP = 8
DEFAULT_ENDPOINT_WINDOW = 1e-6
# touching zeros: |y| at an extremum within this many rtol * scale of zero
DEFAULT_TOUCH_FACTOR = 1e3


class Zero(BaseModel):
    """A located zero; `simple` is False when |y'| there is below the slope threshold."""
    t: float
    simple: bool
    slope: float = Field(description="y'(t) at the zero")


def _scalar(fn: ArrayFn) -> Callable[[float], float]:
    return lambda t: float(fn(np.array([t]))[0])


def locate_zeros(
    value: ArrayFn,
    slope: ArrayFn,
    grid: np.ndarray,
    atol: float,
    scale: float,
    slope_factor: float = DEFAULT_SLOPE_FACTOR,
) -> List[Zero]:
    """
    Bracket sign changes of `value` on `grid`, refine them with Brent's method, and add
    touching zeros (extrema of `value` with |value| <= atol) found through sign changes of `slope`.
    """
    grid = np.asarray(grid, dtype=float)
    span = float(grid[-1] - grid[0])
    xtol = 1e-12 * max(1.0, abs(float(grid[-1])))
    f = value(grid)
    df = slope(grid)
    f_scalar, df_scalar = _scalar(value), _scalar(slope)

    roots: List[float] = list(grid[f == 0.0])
    for i in np.nonzero(f[:-1] * f[1:] < 0.0)[0]:
        roots.append(optimize.brentq(f_scalar, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))

    no_sign_change = f[:-1] * f[1:] > 0.0
    for i in np.nonzero((df[:-1] * df[1:] < 0.0) & no_sign_change)[0]:
        t_ext = optimize.brentq(df_scalar, grid[i], grid[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
        if abs(f_scalar(t_ext)) <= atol:
            roots.append(t_ext)

    threshold = slope_factor * scale
    zeros: List[Zero] = []
    for t in sorted(roots):
        if zeros and t - zeros[-1].t <= 10 * xtol + 1e-15 * span:
            continue
        s = df_scalar(t)
        zeros.append(Zero(t=float(t), simple=abs(s) > threshold, slope=s))
    return zeros


def find_zeros(
    traj: Trajectory,
    slope_factor: float = DEFAULT_SLOPE_FACTOR,
    samples_per_step: int = DEFAULT_SAMPLES_PER_STEP,
    endpoint_window: float = DEFAULT_ENDPOINT_WINDOW,
    touch_factor: float = DEFAULT_TOUCH_FACTOR,
) -> List[Zero]:
    """
    All zeros of y on [0, T], a zero at t = 0 included.

    An extremum with |y| <= max(atol, touch_factor * rtol * scale) is a touching zero.

    A root that the integration error pushes just past T (its Newton estimate from T lies within
    `endpoint_window * max(1, T)`) is reported once, at T.
    """
    zeros = locate_zeros(
        value=lambda ts: traj.states_at(ts)[:, 0],
        slope=lambda ts: traj.states_at(ts)[:, 1],
        grid=traj.step_grid(samples_per_step),
        atol=max(traj.atol, touch_factor * traj.rtol * traj.scale),
        scale=traj.scale,
        slope_factor=slope_factor,
    )
    window = endpoint_window * max(1.0, abs(traj.t_end))
    if zeros and traj.t_end - zeros[-1].t <= window:
        return zeros
    end = traj.eval_dense(traj.t_end)
    if end.dy != 0.0 and 0.0 <= -end.y / end.dy <= window:
        zeros.append(Zero(t=traj.t_end, simple=abs(end.dy) > slope_factor * traj.scale, slope=end.dy))
    return zeros


def brute_force_count(traj: Trajectory, step: float) -> int:
    """Count sign changes of y on a uniform grid; a node where y is exactly zero counts once."""
    n = max(2, int(np.ceil((traj.t_end - traj.t_start) / step)) + 1)
    y = traj.states_at(np.linspace(traj.t_start, traj.t_end, n))[:, 0]
    return int(np.sum(y == 0.0) + np.sum(y[:-1] * y[1:] < 0.0))
