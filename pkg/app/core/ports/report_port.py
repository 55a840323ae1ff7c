"""Port for persisting run reports."""
from pathlib import Path
from typing import List, Protocol

from app.core.domain.report_models import RunReport, SweepRow


class ReportWriterPort(Protocol):
    def write_report(self, report: RunReport, path: Path) -> Path: ...
    def write_rows(self, rows: List[SweepRow], path: Path) -> Path: ...
