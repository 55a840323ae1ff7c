"""
Wandering length: the length of the path traced on the unit sphere by kappa = x/|x|.

    |d/dt (x/|x|)| = sqrt(|x'|^2 |x|^2 - (x, x')^2) / |x|^2

with x' taken from the equation itself rather than differentiated numerically.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from app.core.domain.errors import OutOfHorizonError, PoleError
from app.core.domain.models import CoefficientSpec, Trajectory, require

logger = logging.getLogger(__name__)

GAUSS_ORDER = 8
MAX_BISECTIONS = 60
_NODES_LO, _WEIGHTS_LO = np.polynomial.legendre.leggauss(GAUSS_ORDER)
_NODES_HI, _WEIGHTS_HI = np.polynomial.legendre.leggauss(2 * GAUSS_ORDER)


def _norm_terms(states: np.ndarray, velocity: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n2 = np.einsum("ij,ij->i", states, states)
    v2 = np.einsum("ij,ij->i", velocity, velocity)
    d = np.einsum("ij,ij->i", states, velocity)
    return n2, v2, d


def integrand(spec: CoefficientSpec, ts: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Speed of kappa at times `ts` for phase states `states` (shape (n, 3))."""
    velocity = spec.velocity(ts, states)
    n2 = np.einsum("ij,ij->i", states, states)
    if np.any(n2 <= 0.0):
        raise PoleError("degenerate norm |x| = 0", t=float(np.atleast_1d(ts)[np.argmin(n2)]))
    # |x'|^2 |x|^2 - (x, x')^2 = |x cross x'|^2; the cross product avoids the cancellation.
    return np.linalg.norm(np.cross(states, velocity), axis=1) / n2


def integrand_plus_form(spec: CoefficientSpec, ts: np.ndarray, states: np.ndarray) -> np.ndarray:
    """The variant with (x, x')^2 added instead of subtracted; it does not measure the speed of kappa."""
    velocity = spec.velocity(ts, states)
    n2, v2, d = _norm_terms(states, velocity)
    return np.sqrt(v2 * n2 + d * d) / n2


def kappa(states: np.ndarray) -> np.ndarray:
    return states / np.linalg.norm(states, axis=1, keepdims=True)


def _panels(traj: Trajectory, t0: float, t1: float) -> np.ndarray:
    """Integration panels: the integrator's own steps clipped to [t0, t1]."""
    inner = traj.t[(traj.t > t0) & (traj.t < t1)]
    return np.concatenate([[t0], inner, [t1]])


def _gauss(traj: Trajectory, lo: np.ndarray, hi: np.ndarray, nodes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    half = 0.5 * (hi - lo)
    ts = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]
    flat = ts.ravel()
    values = integrand(traj.spec, flat, traj.states_at(flat)).reshape(ts.shape)
    return half * (values @ weights)


def wandering_length_with_error(
    traj: Trajectory, t0: Optional[float] = None, t1: Optional[float] = None, tol: float = 1e-9
) -> Tuple[float, float]:
    """
    Adaptive composite Gauss-Legendre quadrature of the speed of kappa.

    Each panel compares the 8- and 16-point rules and is bisected until its share of the
    tolerance is met. Returns the value and the summed error estimate.
    """
    t0 = traj.t_start if t0 is None else float(t0)
    t1 = traj.t_end if t1 is None else float(t1)
    require(tol > 0.0, "tolerance must be positive")
    slack = 1e-12 * max(1.0, abs(traj.t_end))
    if t0 < traj.t_start - slack or t1 > traj.t_end + slack:
        raise OutOfHorizonError(t0 if t0 < traj.t_start - slack else t1, traj.t_start, traj.t_end)
    require(t0 <= t1, f"interval must be ordered, got [{t0}, {t1}]")
    if t1 == t0:
        return 0.0, 0.0

    edges = _panels(traj, t0, t1)
    lo, hi = edges[:-1], edges[1:]
    total_width = t1 - t0
    value, error = 0.0, 0.0
    for _ in range(MAX_BISECTIONS):
        coarse = _gauss(traj, lo, hi, _NODES_LO, _WEIGHTS_LO)
        fine = _gauss(traj, lo, hi, _NODES_HI, _WEIGHTS_HI)
        err = np.abs(fine - coarse)
        budget = tol * (hi - lo) / total_width
        done = (err <= budget) | (hi - lo <= 1e-13 * max(1.0, abs(t1)))
        value += float(np.sum(fine[done]))
        error += float(np.sum(err[done]))
        if done.all():
            return value, error
        mid = 0.5 * (lo[~done] + hi[~done])
        lo, hi = np.concatenate([lo[~done], mid]), np.concatenate([mid, hi[~done]])

    logger.warning(f"⚠️ wandering length did not reach tol={tol:.1e} on {len(lo)} panels")
    rest = _gauss(traj, lo, hi, _NODES_HI, _WEIGHTS_HI)
    return value + float(np.sum(rest)), error + float(np.sum(np.abs(rest)))


def wandering_length(traj: Trajectory, t0: Optional[float] = None, t1: Optional[float] = None, tol: float = 1e-9) -> float:
    return wandering_length_with_error(traj, t0, t1, tol)[0]
