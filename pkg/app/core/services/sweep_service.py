"""
Randomized stress test of the zero-count bound.

Each item draws coefficients a, b, c as trigonometric polynomials of a fixed degree with
coefficients uniform in [-R, R] and a random unit initial state. Item i uses the i-th child of
numpy's SeedSequence(seed) with the PCG64 generator, so a sweep reproduces exactly from its seed
on any platform.
"""
import asyncio
import logging
from typing import List, Optional, Tuple

import numpy as np

from app.core.domain.errors import IntegrationError, PoleError, WanderError
from app.core.domain.models import CoefficientSpec, State3
from app.core.domain.report_models import SweepRow, SweepSummary
from app.core.services.oscillation_service import OscillationService

logger = logging.getLogger(__name__)


def trig_polynomial(rng: np.random.Generator, degree: int, radius: float) -> str:
    """c0 + sum_k (alpha_k cos(k t) + beta_k sin(k t)) written out as an expression."""
    coefficients = rng.uniform(-radius, radius, size=2 * degree + 1)
    values = [float(v) for v in coefficients]
    terms = [f"({values[0]!r})"]
    for k in range(1, degree + 1):
        terms.append(f"({values[2 * k - 1]!r})*cos({k}*t)")
        terms.append(f"({values[2 * k]!r})*sin({k}*t)")
    return " + ".join(terms)


def random_item(seed: np.random.SeedSequence, degree: int, radius: float) -> Tuple[CoefficientSpec, State3]:
    rng = np.random.Generator(np.random.PCG64(seed))
    a, b, c = (trig_polynomial(rng, degree, radius) for _ in range(3))
    direction = rng.normal(size=3)
    init = State3.from_array(direction / np.linalg.norm(direction))
    return CoefficientSpec.from_expressions(a, b, c), init


def ensemble(seed: int, size: int, degree: int, radius: float) -> List[Tuple[CoefficientSpec, State3]]:
    children = np.random.SeedSequence(seed).spawn(size)
    return [random_item(child, degree, radius) for child in children]


def _failure_status(exc: BaseException) -> str:
    if isinstance(exc, IntegrationError):
        return "integration_error"
    if isinstance(exc, PoleError):
        return "pole_error"
    return "domain_error"


def summarize(rows: List[SweepRow]) -> SweepSummary:
    margins = [r.margin for r in rows if r.margin is not None]
    return SweepSummary(
        size=len(rows),
        completed=len(margins),
        failures=sum(r.status not in ("ok", "margin_violation") for r in rows),
        violations=sum(r.status == "margin_violation" for r in rows),
        min_margin=min(margins) if margins else None,
    )


class SweepService:
    def __init__(self, oscillation: OscillationService, max_concurrent: int = 4):
        self.oscillation = oscillation
        self.max_concurrent = max_concurrent

    def run_item(self, index: int, spec: CoefficientSpec, init: State3, horizon: float) -> SweepRow:
        try:
            report = self.oscillation.analyze(spec, init, horizon)
        except (WanderError, ValueError) as exc:
            logger.warning(f"⚠️ sweep item {index} failed: {exc}")
            return SweepRow(index=index, status=_failure_status(exc), message=str(exc))
        return SweepRow(
            index=index,
            nu=report.nu,
            gamma=report.gamma,
            bound=report.bound,
            margin=report.margin,
            status="ok" if report.holds else "margin_violation",
        )

    async def run(
        self,
        size: int,
        seed: int,
        horizon: float,
        degree: int = 2,
        radius: float = 1.0,
        items: Optional[List[Tuple[CoefficientSpec, State3]]] = None,
    ) -> Tuple[List[SweepRow], SweepSummary]:
        """Analyze every item on a worker pool; rows come back ordered by item index."""
        items = items if items is not None else ensemble(seed, size, degree, radius)
        semaphore = asyncio.Semaphore(self.max_concurrent)

        async def run_one(index: int, spec: CoefficientSpec, init: State3) -> SweepRow:
            async with semaphore:
                return await asyncio.to_thread(self.run_item, index, spec, init, horizon)

        results = await asyncio.gather(
            *[run_one(i, spec, init) for i, (spec, init) in enumerate(items)],
            return_exceptions=True,
        )

        # Anything run_item did not anticipate still becomes a row.
        rows: List[SweepRow] = []
        for i, result in enumerate(results):
            if isinstance(result, BaseException):
                logger.error(f"❌ sweep item {i} crashed: {result!r}")
                rows.append(SweepRow(index=i, status=_failure_status(result), message=repr(result)))
            else:
                rows.append(result)

        summary = summarize(rows)
        logger.info(
            f"{'✅' if summary.violations == 0 else '❌'} sweep: {summary.completed}/{summary.size} completed, "
            f"{summary.failures} failures, {summary.violations} violations, min margin {summary.min_margin}"
        )
        return rows, summary
