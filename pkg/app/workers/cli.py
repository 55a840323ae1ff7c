"""
Command-line front end.

Usage:
    python -m app.workers.cli constant                               # L by quadrature and polyline
    python -m app.workers.cli constant --method polyline --segments 10
    python -m app.workers.cli analyze --a 0 --b 1 --c 0 --init 0 1 0 --horizon 62.83185307179586
    python -m app.workers.cli analyze --b "1 + 0.5*sin(t)" --rates 50 100 200 400
    python -m app.workers.cli extremal --delta 0.1 0.5 --periods 10 --out reports/extremal.json
    python -m app.workers.cli sweep --size 100 --seed 42 --out reports/sweep.json

Exit codes: 0 every check passed, 1 a check failed, 2 bad input or a failed construction.
"""
import argparse
import asyncio
import logging
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from app.adapters.reporting import write_extremal_artifact
from app.config.settings import (
    RUN_CONFIGS,
    AnalyzeConfig,
    ConstantConfig,
    ExtremalConfig,
    Settings,
    SweepConfig,
    load_run_config,
)
from app.core.di import (
    build_extremal_service,
    build_oscillation_service,
    build_report_writer,
    build_sweep_service,
    build_text_renderer,
)
from app.core.domain.errors import WanderError
from app.core.domain.models import CoefficientSpec, State3
from app.core.domain.report_models import RunReport
from app.core.domain.sphere import boundary_length, region_constant
from app.core.services.extremal_service import sweep_checks

logger = logging.getLogger(__name__)

RATIO_SLACK = 0.01
GRID_AGREEMENT = 1e-4


def cmd_constant(config: ConstantConfig) -> RunReport:
    methods = ["quadrature", "polyline"] if config.method == "both" else [config.method]
    constants = [
        boundary_length(m, config.tol if m == "quadrature" else config.segments) for m in methods
    ]
    result: Dict[str, Any] = {
        "methods": [c.model_dump() for c in constants],
        "difference": None,
        "ratio": constants[0].ratio,
    }
    checks = {"value_in_range": all(np.pi < c.value < 2 * np.pi for c in constants)}
    if len(constants) == 2:
        quad, poly = constants
        difference = abs(quad.value - poly.value)
        result["difference"] = difference
        checks["methods_agree"] = difference <= max(
            quad.error_estimate + poly.error_estimate, config.agreement
        )
    return RunReport(
        command="constant",
        config=config.model_dump(mode="json"),
        tolerances={"tol": config.tol, "agreement": config.agreement},
        result=result,
    ).with_checks(checks)


def cmd_analyze(config: AnalyzeConfig) -> RunReport:
    service = build_oscillation_service(config)
    spec = CoefficientSpec.from_expressions(config.a, config.b, config.c)
    init = State3.from_array(config.init)

    report = service.analyze(spec, init, config.horizon)
    checks = {
        "bound_holds": report.holds,
        "intermediate_bound_holds": report.intermediate_holds,
    }
    rates = None
    if config.rates:
        estimate = service.rates(spec, init, config.rates, config.tail_fraction)
        rates = estimate.model_dump()
        checks["rate_upper_ok"] = estimate.upper_rate_ok
        checks["rate_lower_ok"] = estimate.lower_rate_ok
    return RunReport(
        command="analyze",
        config=config.model_dump(mode="json"),
        tolerances={
            "rtol": config.rtol,
            "atol": config.atol,
            "quad_tol": config.quad_tol,
            "gamma_tol": report.gamma_tol,
        },
        result={"oscillation": report.model_dump(), "rates": rates},
    ).with_checks(checks)


async def cmd_extremal(config: ExtremalConfig, out: Optional[Path] = None) -> RunReport:
    service = build_extremal_service(config)
    runs = await service.run_sweep(config.delta, config.periods)
    reports = [report for _, report in runs]

    checks: Dict[str, bool] = {}
    for report in reports:
        key = f"delta={report.delta:g}"
        checks[f"{key}: zero_count"] = report.nu == report.expected_nu
        checks[f"{key}: ratio_above_floor"] = report.ratio > report.floor
        checks[f"{key}: ratio_below_ceiling"] = report.ratio < report.ceiling + RATIO_SLACK
    if len(reports) > 1:
        checks.update(sweep_checks(reports))

    gap = None
    if config.convergence_check:
        gap = await asyncio.to_thread(service.convergence_gap, reports[0].delta, config.periods, reports[0])
        checks["grid_converged"] = gap <= GRID_AGREEMENT

    artifacts: List[str] = []
    if out is not None:
        for model, _ in runs:
            suffix = "" if len(runs) == 1 else f"-delta-{model.delta:g}"
            path = write_extremal_artifact(model, out.with_name(f"{out.stem}{suffix}.npz"))
            artifacts.append(str(path))
            logger.info(f"💾 extremal artifact written to {path}")

    return RunReport(
        command="extremal",
        config=config.model_dump(mode="json"),
        tolerances={
            "rtol": config.rtol,
            "atol": config.atol,
            "quad_tol": config.quad_tol,
            "track_tolerance": config.track_tolerance,
            "restart_tolerance": config.restart_tolerance,
        },
        result={
            "floor": region_constant().ratio,
            "runs": [r.model_dump() for r in reports],
            "convergence_gap": gap,
            "artifacts": artifacts,
        },
    ).with_checks(checks)


async def cmd_sweep(config: SweepConfig, out: Optional[Path] = None) -> RunReport:
    service = build_sweep_service(config)
    rows, summary = await service.run(
        size=config.size,
        seed=config.seed,
        horizon=config.horizon,
        degree=config.degree,
        radius=config.radius,
    )
    if out is not None:
        build_report_writer().write_rows(rows, out.with_suffix(".csv"))
    return RunReport(
        command="sweep",
        config=config.model_dump(mode="json"),
        tolerances={"rtol": config.rtol, "atol": config.atol, "quad_tol": config.quad_tol},
        result={"summary": summary.model_dump(), "rows": [r.model_dump() for r in rows]},
    ).with_checks({"no_violations": summary.violations == 0, "no_failures": summary.failures == 0})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="config file with a [command] section")
    common.add_argument("--out", type=Path, help="structured JSON report (plus CSV / .npz next to it)")
    common.add_argument("--rtol", type=float)
    common.add_argument("--atol", type=float)
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="phase-wander", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    constant = sub.add_parser("constant", parents=[common], help="boundary length L of Omega_plus")
    constant.add_argument("--method", choices=["both", "quadrature", "polyline"])
    constant.add_argument("--tol", type=float)
    constant.add_argument("--segments", type=int)

    analyze = sub.add_parser("analyze", parents=[common], help="zero count and wandering length of one solution")
    analyze.add_argument("--a")
    analyze.add_argument("--b")
    analyze.add_argument("--c")
    analyze.add_argument("--init", type=float, nargs=3, metavar=("Y", "DY", "DDY"))
    analyze.add_argument("--horizon", type=float)
    analyze.add_argument("--rates", type=float, nargs="+", metavar="T")

    extremal = sub.add_parser("extremal", parents=[common], help="synthesize and run the extremal equations")
    extremal.add_argument("--delta", type=float, nargs="+")
    extremal.add_argument("--periods", type=int)
    extremal.add_argument("--convergence-check", dest="convergence_check", action="store_true", default=None)

    sweep = sub.add_parser("sweep", parents=[common], help="randomized stress test of the zero-count bound")
    sweep.add_argument("--size", type=int)
    sweep.add_argument("--horizon", type=float)
    sweep.add_argument("--radius", type=float)
    sweep.add_argument("--degree", type=int)
    return parser


def _overrides(command: str, args: argparse.Namespace) -> Dict[str, Any]:
    """Flags that were given and that the command's run config knows about."""
    fields = RUN_CONFIGS[command].model_fields
    return {k: v for k, v in vars(args).items() if k in fields and v is not None}


def _run(args: argparse.Namespace, settings: Settings) -> RunReport:
    config = load_run_config(args.command, args.config, _overrides(args.command, args), settings)
    if args.command == "constant":
        return cmd_constant(config)
    if args.command == "analyze":
        return cmd_analyze(config)
    if args.command == "extremal":
        return asyncio.run(cmd_extremal(config, args.out))
    return asyncio.run(cmd_sweep(config, args.out))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = Settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    started = datetime.now().isoformat()
    clock = time.perf_counter()
    try:
        report = _run(args, settings)
    except (WanderError, ValidationError, ValueError, OSError) as exc:
        logger.error(f"❌ {args.command} failed: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 2

    report = report.model_copy(
        update={"timing": {"started": started, "elapsed_s": time.perf_counter() - clock}}
    )
    print(build_text_renderer().render(report))
    if args.out is not None:
        build_report_writer().write_report(report, args.out)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
