"""
Integrator adapter backed by scipy's embedded Runge-Kutta pairs.

DOP853 (order 8, 7th-order continuous extension) is the default; RK45 (order 5 with
4th-order dense output) is available for cross-checks.
"""
import logging
from typing import Tuple

import numpy as np
from scipy import integrate as si

from app.core.domain.errors import IntegrationError, StepSizeUnderflowError
from app.core.domain.models import CoefficientSpec, State3, Trajectory, require
from app.core.ports.integrator_port import IntegratorPort

logger = logging.getLogger(__name__)

SUPPORTED_METHODS = ("DOP853", "RK45")
COEFFICIENT_SAMPLES = 257


class ScipyIntegrator(IntegratorPort):
    def __init__(self, method: str = "DOP853", max_step: float = np.inf):
        require(method in SUPPORTED_METHODS, f"unsupported method {method!r}; use one of {SUPPORTED_METHODS}")
        self.method = method
        self.max_step = max_step

    def get_method_name(self) -> str:
        return self.method

    def integrate(
        self,
        spec: CoefficientSpec,
        init: State3,
        horizon: Tuple[float, float],
        rtol: float = 1e-9,
        atol: float = 1e-12,
    ) -> Trajectory:
        t0, t1 = float(horizon[0]), float(horizon[1])
        require(t1 > t0, f"horizon must be increasing, got [{t0}, {t1}]")
        require(init.norm() > 0.0, "initial state must be nonzero")
        require(rtol > 0.0 and atol > 0.0, "tolerances must be positive")

        # Surface coefficient domain errors before the solver swallows time in them.
        spec.at_array(np.linspace(t0, t1, COEFFICIENT_SAMPLES))

        sol = si.solve_ivp(
            spec.rhs,
            (t0, t1),
            init.as_array(),
            method=self.method,
            rtol=rtol,
            atol=atol,
            dense_output=True,
            max_step=self.max_step,
        )
        if sol.status == -1:
            t_fail = float(sol.t[-1]) if len(sol.t) else t0
            logger.warning(f"⚠️ Integration failed at t={t_fail}: {sol.message}")
            raise StepSizeUnderflowError(sol.message, t_fail)
        states = sol.y.T
        if not np.all(np.isfinite(states)):
            bad = int(np.argmax(~np.all(np.isfinite(states), axis=1)))
            raise StepSizeUnderflowError("solution became non-finite", float(sol.t[bad]))
        if np.min(np.linalg.norm(states, axis=1)) <= 0.0:
            raise IntegrationError("numerical solution collapsed to the zero state")

        logger.debug(f"{self.method}: {len(sol.t) - 1} steps, {sol.nfev} evaluations on [{t0}, {t1}]")
        return Trajectory(
            spec=spec,
            t=sol.t,
            states=states,
            solution=sol.sol,
            horizon=t1,
            rtol=rtol,
            atol=atol,
            method=self.method,
            nfev=int(sol.nfev),
        )


def integrate(
    spec: CoefficientSpec,
    init: State3,
    horizon: Tuple[float, float],
    rtol: float = 1e-9,
    atol: float = 1e-12,
    method: str = "DOP853",
) -> Trajectory:
    """Convenience wrapper around the default adapter."""
    return ScipyIntegrator(method).integrate(spec, init, horizon, rtol, atol)
