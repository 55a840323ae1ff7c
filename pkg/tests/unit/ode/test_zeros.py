"""
Unit tests for zero finding.
"""
import numpy as np
import pytest

from app.adapters.integration.scipy_integrator import integrate
from app.core.domain.models import CoefficientSpec, State3
from app.core.domain.zeros import brute_force_count, find_zeros, locate_zeros


def _poly(roots_with_multiplicity):
    """value and slope callables for prod (t - r)^m."""
    coefficients = np.poly1d([1.0])
    for root, multiplicity in roots_with_multiplicity:
        coefficients = coefficients * np.poly1d([1.0, -root]) ** multiplicity
    derivative = coefficients.deriv()
    return (lambda ts: coefficients(ts)), (lambda ts: derivative(ts))


@pytest.mark.unit
class TestFindZeros:
    def test_sin_has_twenty_one_zeros_on_closed_horizon(self, sin_traj):
        zeros = find_zeros(sin_traj)
        assert len(zeros) == 21
        np.testing.assert_allclose([z.t for z in zeros], np.pi * np.arange(21), atol=1e-7)
        assert all(z.simple for z in zeros)

    def test_zero_at_the_start_counts(self, sin_traj):
        assert find_zeros(sin_traj)[0].t == 0.0

    def test_cos_zeros(self, integrator, sin_spec):
        traj = integrator.integrate(sin_spec, State3(y=1.0, dy=0.0, ddy=-1.0), (0.0, 10.0))
        zeros = find_zeros(traj)
        np.testing.assert_allclose([z.t for z in zeros], np.pi / 2 + np.pi * np.arange(3), atol=1e-7)

    def test_constant_solution_has_no_zeros(self):
        spec = CoefficientSpec.from_expressions("0", "0", "0")
        traj = integrate(spec, State3(y=1.0, dy=0.0, ddy=0.0), (0.0, 10.0))
        assert find_zeros(traj) == []

    def test_agrees_with_brute_force_count(self):
        spec = CoefficientSpec.from_expressions("0.1", "2 + sin(t)", "0.3")
        traj = integrate(spec, State3(y=0.2, dy=1.0, ddy=-0.5), (0.0, 30.0))
        zeros = find_zeros(traj)
        assert len(zeros) == brute_force_count(traj, step=1e-3)

    def test_touching_zeros_of_one_minus_cos(self, integrator, sin_spec):
        traj = integrator.integrate(sin_spec, State3(y=0.0, dy=0.0, ddy=1.0), (0.0, 20.0))
        zeros = find_zeros(traj)
        np.testing.assert_allclose([z.t for z in zeros], 2 * np.pi * np.arange(4), atol=1e-5)
        assert not any(z.simple for z in zeros)

    def test_linear_solution_has_one_zero(self):
        spec = CoefficientSpec.from_expressions("0", "0", "0")
        traj = integrate(spec, State3(y=0.0, dy=1.0, ddy=0.0), (0.0, 5.0))
        zeros = find_zeros(traj)
        assert [z.t for z in zeros] == [0.0]
        assert zeros[0].simple

    def test_locations_settle_as_tolerances_halve(self):
        spec = CoefficientSpec.from_expressions("0.1", "2 + sin(t)", "0.3")
        init = State3(y=0.2, dy=1.0, ddy=-0.5)
        coarse = find_zeros(integrate(spec, init, (0.0, 30.0), rtol=1e-9, atol=1e-12))
        fine = find_zeros(integrate(spec, init, (0.0, 30.0), rtol=5e-10, atol=5e-13))
        assert len(coarse) == len(fine)
        np.testing.assert_allclose([z.t for z in coarse], [z.t for z in fine], atol=1e-6)


@pytest.mark.unit
class TestLocateZeros:
    def test_touching_zero_is_found_and_flagged(self):
        value, slope = _poly([(1.0, 2)])
        zeros = locate_zeros(value, slope, np.linspace(0.0, 3.0, 32), atol=1e-12, scale=1.0)
        assert len(zeros) == 1
        assert zeros[0].t == pytest.approx(1.0, abs=1e-9)
        assert not zeros[0].simple

    def test_extremum_away_from_zero_is_ignored(self):
        value, _ = _poly([(1.0, 2)])
        zeros = locate_zeros(
            lambda ts: value(ts) + 0.5, lambda ts: 2 * (ts - 1.0), np.linspace(0.0, 3.0, 32), atol=1e-12, scale=1.0
        )
        assert zeros == []

    def test_mixed_multiplicities(self):
        value, slope = _poly([(1.0, 2), (3.0, 1)])
        zeros = locate_zeros(value, slope, np.linspace(0.0, 4.0, 41 * 3), atol=1e-12, scale=1.0)
        assert [round(z.t, 8) for z in zeros] == [1.0, 3.0]
        assert [z.simple for z in zeros] == [False, True]

    def test_zero_on_a_grid_node_is_counted_once(self):
        value, slope = _poly([(0.5, 1)])
        zeros = locate_zeros(value, slope, np.array([0.0, 0.25, 0.5, 0.75, 1.0]), atol=1e-12, scale=1.0)
        assert len(zeros) == 1
        assert zeros[0].t == 0.5
