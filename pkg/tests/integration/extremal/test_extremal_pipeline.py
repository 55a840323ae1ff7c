"""
Integration tests for the extremal equations: the synthesized coefficients must reproduce the
prescribed spherical track, and the measured ratio must sit just above L / (2 pi).
"""
import numpy as np
import pytest

from app.adapters.integration.scipy_integrator import ScipyIntegrator
from app.core.domain.errors import PreconditionError
from app.core.domain.sphere import region_constant
from app.core.services.extremal_service import ExtremalService, follow_track, sweep_checks

FLOOR = 0.64851
DELTAS = [0.5, 0.2, 0.1]


@pytest.fixture(scope="module")
def service():
    return ExtremalService(ScipyIntegrator(), max_concurrent=2)


@pytest.fixture(scope="module")
def runs(service):
    return {delta: service.run(delta, periods=10) for delta in DELTAS}


@pytest.mark.integration
@pytest.mark.slow
@pytest.mark.parametrize("delta", DELTAS)
class TestExtremalRun:
    def test_two_zeros_per_period(self, runs, delta):
        _, report = runs[delta]
        assert report.nu == report.expected_nu == 20

    def test_ratio_between_floor_and_ceiling(self, runs, delta):
        _, report = runs[delta]
        assert report.floor == pytest.approx(region_constant().ratio)
        assert FLOOR < report.ratio < report.ceiling + 0.01
        assert report.ceiling == pytest.approx((region_constant().value + delta) / (2 * np.pi))
        assert report.holds

    def test_one_period_wanders_the_length_of_F(self, runs, delta):
        _, report = runs[delta]
        assert report.gamma_one_period == pytest.approx(report.length_F, rel=1e-3)
        assert report.gamma == pytest.approx(10 * report.gamma_one_period, rel=1e-3)

    def test_track_is_reproduced(self, runs, delta):
        model, report = runs[delta]
        assert report.max_track_deviation <= 1e-3
        assert report.max_restart_jump <= 1e-3
        assert report.segments >= 10
        assert report.period_residual <= 1e-6 * model.period
        assert report.w11_distance < delta / (16 * np.pi)


@pytest.mark.integration
@pytest.mark.slow
class TestExtremalSweep:
    def test_ratio_grows_with_delta(self, runs):
        reports = [runs[delta][1] for delta in DELTAS]
        assert [r.ratio for r in reports] == sorted((r.ratio for r in reports), reverse=True)
        assert sweep_checks(reports) == {"ratio_increases_with_delta": True, "ratio_above_floor": True}

    async def test_sweep_keeps_the_order_of_deltas(self, service):
        runs = await service.run_sweep([0.2, 0.5], periods=3)
        assert [report.delta for _, report in runs] == [0.2, 0.5]
        assert all(report.nu == 6 for _, report in runs)

    def test_segments_stay_on_period_boundaries(self, service, runs):
        model, _ = runs[0.5]
        tracked = follow_track(service.integrator, model, periods=3)
        assert tracked.period_of == sorted(tracked.period_of)
        ends = {k: max(traj.t_end for traj, p in zip(tracked.segments, tracked.period_of) if p == k) for k in range(3)}
        for k, end in ends.items():
            assert end == pytest.approx((k + 1) * model.period)
        assert all(b.t_start == a.t_end for a, b in zip(tracked.segments, tracked.segments[1:]))

    def test_too_few_periods(self, service):
        with pytest.raises(PreconditionError):
            service.run(0.1, periods=1)
