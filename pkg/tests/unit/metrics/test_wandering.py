"""
Unit tests for the wandering length and its integrand.
"""
import numpy as np
import pytest

from app.adapters.integration.scipy_integrator import integrate
from app.core.domain.errors import OutOfHorizonError
from app.core.domain.models import CoefficientSpec, State3
from app.core.domain.wandering import (
    integrand,
    integrand_plus_form,
    kappa,
    wandering_length,
    wandering_length_with_error,
)


@pytest.fixture(scope="module")
def generic_traj():
    spec = CoefficientSpec.from_expressions("0.5", "1 + 0.3*cos(t)", "0.2")
    return integrate(spec, State3(y=1.0, dy=0.5, ddy=-0.3), (0.0, 10.0), rtol=1e-11, atol=1e-13)


def _finite_difference_speed(traj, ts, h=1e-5):
    forward = kappa(traj.states_at(ts + h))
    backward = kappa(traj.states_at(ts - h))
    return np.linalg.norm(forward - backward, axis=1) / (2 * h)


@pytest.mark.unit
class TestIntegrand:
    def test_matches_finite_differences_of_kappa(self, generic_traj):
        rng = np.random.default_rng(0)
        ts = np.sort(rng.uniform(1e-3, 10.0 - 1e-3, 1000))
        states = generic_traj.states_at(ts)
        np.testing.assert_allclose(
            integrand(generic_traj.spec, ts, states), _finite_difference_speed(generic_traj, ts), atol=1e-6
        )

    def test_plus_form_does_not(self, generic_traj):
        ts = np.linspace(0.5, 9.5, 200)
        states = generic_traj.states_at(ts)
        gap = np.abs(integrand_plus_form(generic_traj.spec, ts, states) - _finite_difference_speed(generic_traj, ts))
        assert np.max(gap) > 1e-3

    def test_sin_closed_form(self, sin_traj):
        ts = np.linspace(0.0, 2 * np.pi, 50)
        values = integrand(sin_traj.spec, ts, sin_traj.states_at(ts))
        np.testing.assert_allclose(values, np.sqrt(2) / (1 + np.sin(ts) ** 2), atol=1e-8)


@pytest.mark.unit
class TestWanderingLength:
    def test_one_period_of_sin(self, sin_traj):
        assert wandering_length(sin_traj, 0.0, 2 * np.pi) == pytest.approx(2 * np.pi, abs=1e-6)

    def test_full_horizon_of_sin(self, sin_traj):
        value, error = wandering_length_with_error(sin_traj)
        assert value == pytest.approx(20 * np.pi, abs=1e-6)
        assert error <= 1e-8

    def test_additive_over_intervals(self, generic_traj):
        whole = wandering_length(generic_traj, 0.0, 10.0)
        parts = wandering_length(generic_traj, 0.0, 3.7) + wandering_length(generic_traj, 3.7, 10.0)
        assert parts == pytest.approx(whole, abs=1e-8)

    def test_empty_interval(self, sin_traj):
        assert wandering_length_with_error(sin_traj, 1.0, 1.0) == (0.0, 0.0)

    def test_constant_solution_does_not_wander(self):
        spec = CoefficientSpec.from_expressions("0", "0", "0")
        traj = integrate(spec, State3(y=1.0, dy=0.0, ddy=0.0), (0.0, 10.0))
        assert wandering_length(traj) == 0.0

    @pytest.mark.parametrize("factor", [2.0, 3.0, -1.5])
    def test_scaling_the_solution_leaves_the_length(self, generic_traj, factor):
        scaled = integrate(
            generic_traj.spec, State3(y=1.0, dy=0.5, ddy=-0.3).scaled(factor), (0.0, 10.0), rtol=1e-11, atol=1e-13
        )
        np.testing.assert_allclose(
            scaled.states_at(np.array([4.0])), factor * generic_traj.states_at(np.array([4.0])), rtol=1e-7, atol=1e-9
        )
        assert wandering_length(scaled) == pytest.approx(wandering_length(generic_traj), abs=1e-7)

    def test_exponential_does_not_wander(self):
        # y = e^t solves y''' - y = 0; its phase direction stays at (1, 1, 1)/sqrt3
        spec = CoefficientSpec.from_expressions("0", "0", "-1")
        traj = integrate(spec, State3(y=1.0, dy=1.0, ddy=1.0), (0.0, 10.0))
        assert wandering_length(traj) <= 1e-6

    def test_outside_horizon(self, sin_traj):
        with pytest.raises(OutOfHorizonError):
            wandering_length(sin_traj, 0.0, 100.0)
