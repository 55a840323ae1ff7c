import numpy as np
import pytest

from app.adapters.integration.scipy_integrator import ScipyIntegrator
from app.core.domain.models import CoefficientSpec, State3


@pytest.fixture(scope="session")
def integrator():
    return ScipyIntegrator()


@pytest.fixture(scope="session")
def sin_spec():
    """y''' + y' = 0, solved by sin t."""
    return CoefficientSpec.from_expressions("0", "1", "0", label="sin")


@pytest.fixture(scope="session")
def sin_init():
    return State3(y=0.0, dy=1.0, ddy=0.0)


@pytest.fixture(scope="session")
def sin_traj(integrator, sin_spec, sin_init):
    """sin t on [0, 20 pi]."""
    return integrator.integrate(sin_spec, sin_init, (0.0, 20 * np.pi), rtol=1e-10, atol=1e-13)
