"""Port for numerical integrators of the third-order equation."""
from abc import ABC, abstractmethod
from typing import Tuple

from app.core.domain.models import CoefficientSpec, State3, Trajectory


class IntegratorPort(ABC):
    """
    Port for integrators producing dense trajectories.

    Implementations integrate the first-order system for (y, y', y'') on [0, T] with local
    error controlled per component by rtol/atol, and must raise StepSizeUnderflowError when
    the step size collapses.
    """

    @abstractmethod
    def integrate(
        self,
        spec: CoefficientSpec,
        init: State3,
        horizon: Tuple[float, float],
        rtol: float,
        atol: float,
    ) -> Trajectory:
        """Integrate from `init` at horizon[0] to horizon[1]."""
        pass

    @abstractmethod
    def get_method_name(self) -> str:
        pass
