"""
Perturbation that splits multiple zeros of a solution into simple ones.

At each degenerate zero t_i (y = y' = 0) the perturbation takes the value -sign y''(t_i) with
three vanishing derivatives; between consecutive t_i it is the degree-7 two-point Hermite
interpolant of that data, and it is constant outside [t_1, t_m]. Adding it with a small weight
turns each double zero into a pair of simple zeros without removing any other.
"""
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.interpolate import BPoly

from app.core.domain.errors import DegenerateZeroError
from app.core.domain.models import Trajectory, require
from app.core.domain.zeros import Zero


class Perturbation:
    """Piecewise polynomial with C3 joins; evaluates derivatives up to order 3 everywhere."""

    def __init__(self, times: Sequence[float], values: Sequence[float]):
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._poly: Optional[BPoly] = None
        if len(self.times) >= 2:
            data = [[v, 0.0, 0.0, 0.0] for v in self.values]
            self._poly = BPoly.from_derivatives(self.times, data)

    def __call__(self, t, nu: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if len(self.times) == 0:
            return np.zeros_like(t)
        if self._poly is None:
            return np.full_like(t, self.values[0] if nu == 0 else 0.0)
        inside = np.clip(t, self.times[0], self.times[-1])
        out = np.asarray(self._poly(inside, nu), dtype=float)
        if nu > 0:
            out = np.where((t < self.times[0]) | (t > self.times[-1]), 0.0, out)
        return out


def desingularize(second_derivative: Callable[[float], float], degenerate_times: Sequence[float]) -> Perturbation:
    """Build the perturbation for the given degenerate zeros of y, with y'' supplied by the caller."""
    times = [float(t) for t in degenerate_times]
    require(all(b > a for a, b in zip(times, times[1:])), "degenerate times must be strictly increasing")
    values: List[float] = []
    for t in times:
        ddy = float(second_derivative(t))
        if ddy == 0.0:
            raise DegenerateZeroError(t)
        values.append(-float(np.sign(ddy)))
    return Perturbation(times, values)


def desingularize_trajectory(traj: Trajectory, zeros: Sequence[Zero]) -> Perturbation:
    """Perturbation for the multiple zeros that `find_zeros` flagged on a trajectory."""
    degenerate = [z.t for z in zeros if not z.simple]
    return desingularize(lambda t: traj.eval_dense(t).ddy, degenerate)
