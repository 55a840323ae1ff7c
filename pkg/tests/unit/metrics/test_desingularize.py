"""
Unit tests for the perturbation that splits multiple zeros.
"""
import numpy as np
import pytest

from app.adapters.integration.scipy_integrator import integrate
from app.core.domain.desingularize import desingularize, desingularize_trajectory
from app.core.domain.errors import DegenerateZeroError, PreconditionError
from app.core.domain.models import CoefficientSpec, State3
from app.core.domain.zeros import Zero, locate_zeros

CUBIC = np.poly1d([1.0, -5.0, 7.0, -3.0])  # (t - 1)^2 (t - 3)


@pytest.mark.unit
class TestDesingularize:
    def test_double_zero_splits(self):
        perturbation = desingularize(CUBIC.deriv(2), [1.0])
        grid = np.linspace(0.0, 4.0, 401)
        np.testing.assert_allclose(perturbation(grid), 1.0)

        before = locate_zeros(CUBIC, CUBIC.deriv(), grid, atol=1e-12, scale=1.0)
        assert [z.simple for z in before] == [False, True]

        eps = 1e-3
        after = locate_zeros(
            lambda ts: CUBIC(ts) + eps * perturbation(ts),
            lambda ts: CUBIC.deriv()(ts) + eps * perturbation(ts, 1),
            grid,
            atol=1e-12,
            scale=1.0,
        )
        assert len(after) == 3
        assert all(z.simple for z in after)
        assert after[0].t < 1.0 < after[1].t

    def test_values_follow_the_curvature_sign(self):
        curvature = {1.0: 2.0, 2.0: -0.5, 4.0: 3.0}
        perturbation = desingularize(lambda t: curvature[t], [1.0, 2.0, 4.0])
        np.testing.assert_allclose(perturbation([1.0, 2.0, 4.0]), [-1.0, 1.0, -1.0])
        for nu in (1, 2, 3):
            np.testing.assert_allclose(perturbation([1.0, 2.0, 4.0], nu), 0.0, atol=1e-9)

    def test_joins_are_three_times_differentiable(self):
        curvature = {1.0: 2.0, 2.0: -0.5, 4.0: 3.0}
        perturbation = desingularize(lambda t: curvature[t], [1.0, 2.0, 4.0])
        h = 1e-9
        for t in (2.0,):
            for nu in range(4):
                left = perturbation(np.array([t - h]), nu)[0]
                right = perturbation(np.array([t + h]), nu)[0]
                assert left == pytest.approx(right, abs=1e-4)

    def test_constant_outside_the_degenerate_times(self):
        curvature = {1.0: 2.0, 2.0: -0.5}
        perturbation = desingularize(lambda t: curvature[t], [1.0, 2.0])
        np.testing.assert_allclose(perturbation([-5.0, 0.5]), -1.0)
        np.testing.assert_allclose(perturbation([2.5, 10.0]), 1.0)
        np.testing.assert_allclose(perturbation([0.0, 3.0], 1), 0.0)

    def test_no_degenerate_zeros(self):
        perturbation = desingularize(CUBIC.deriv(2), [])
        np.testing.assert_array_equal(perturbation(np.linspace(0.0, 1.0, 5)), 0.0)

    def test_flat_second_derivative_is_rejected(self):
        with pytest.raises(DegenerateZeroError):
            desingularize(lambda t: 0.0, [1.0])

    @pytest.mark.parametrize("times", [[2.0, 1.0], [1.0, 1.0]])
    def test_times_must_increase(self, times):
        with pytest.raises(PreconditionError):
            desingularize(lambda t: 1.0, times)

    def test_from_trajectory(self):
        # y = (t - 1)^2 solves y''' = 0
        spec = CoefficientSpec.from_expressions("0", "0", "0")
        traj = integrate(spec, State3(y=1.0, dy=-2.0, ddy=2.0), (0.0, 3.0))
        zeros = [Zero(t=1.0, simple=False, slope=0.0), Zero(t=2.5, simple=True, slope=3.0)]
        perturbation = desingularize_trajectory(traj, zeros)
        np.testing.assert_array_equal(perturbation.times, [1.0])
        np.testing.assert_allclose(perturbation(np.array([0.0, 3.0])), -1.0)
