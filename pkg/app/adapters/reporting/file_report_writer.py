"""
JSON reports and CSV sweep tables.

Floats are written with 17 significant digits at most: JSON through Python's shortest
round-trip repr, CSV through format(x, ".17g"). Non-finite floats become the strings
"inf", "-inf" and "nan" so the JSON stays standard.
"""
import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, List

from app.core.domain.report_models import RunReport, SweepRow
from app.core.ports.report_port import ReportWriterPort

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("index", "nu", "gamma", "bound", "margin", "status")


def _finite(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


class FileReportWriter(ReportWriterPort):
    def write_report(self, report: RunReport, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = _finite(report.model_dump(mode="json"))
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"💾 Wrote {report.command} report to {path}")
        return path

    def write_rows(self, rows: List[SweepRow], path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(SWEEP_COLUMNS)
            for row in rows:
                writer.writerow([_cell(getattr(row, column)) for column in SWEEP_COLUMNS])
        logger.info(f"💾 Wrote {len(rows)} sweep rows to {path}")
        return path
