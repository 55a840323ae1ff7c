"""
Unit tests for run reports, the JSON/CSV writer and the text renderer.
"""
import csv
import json

import pytest

from app.adapters.reporting import SWEEP_COLUMNS, FileReportWriter, TextReportRenderer
from app.config.settings import ConstantConfig
from app.core.domain.report_models import RunReport, SweepRow, SweepSummary
from app.workers.cli import cmd_constant


def _report(**overrides):
    fields = dict(command="constant", config={}, tolerances={"tol": 1e-10}, result={"value": 1.0})
    fields.update(overrides)
    return RunReport(**fields)


@pytest.mark.unit
class TestRunReport:
    def test_all_checks_pass(self):
        report = _report().with_checks({"a": True, "b": True})
        assert report.status == "ok"
        assert report.exit_code == 0

    def test_failed_check(self):
        report = _report().with_checks({"a": True, "b": False})
        assert report.status == "check_failed"
        assert report.exit_code == 1

    def test_error_status(self):
        assert _report(status="error").exit_code == 2

    def test_with_checks_returns_a_copy(self):
        report = _report()
        checked = report.with_checks({"a": False})
        assert report.checks == {}
        assert checked.checks == {"a": False}


@pytest.mark.unit
class TestFileReportWriter:
    def test_json_is_sorted_and_standard(self, tmp_path):
        report = _report(result={"zeta": 1.0, "margin": float("inf"), "alpha": [float("-inf"), 2.0]})
        path = FileReportWriter().write_report(report, tmp_path / "nested" / "report.json")
        text = path.read_text(encoding="utf-8")
        payload = json.loads(text)
        assert payload["result"] == {"alpha": ["-inf", 2.0], "margin": "inf", "zeta": 1.0}
        assert payload["schema_version"] == report.schema_version
        assert list(payload) == sorted(payload)
        assert "Infinity" not in text

    def test_csv_rows(self, tmp_path):
        rows = [
            SweepRow(index=0, nu=3, gamma=12.5, bound=-4.07, margin=16.57, status="ok"),
            SweepRow(index=1, status="integration_error", message="step size underflow"),
        ]
        path = FileReportWriter().write_rows(rows, tmp_path / "sweep.csv")
        with open(path, newline="", encoding="utf-8") as handle:
            table = list(csv.reader(handle))
        assert tuple(table[0]) == SWEEP_COLUMNS
        assert table[1] == ["0", "3", "12.5", "-4.0700000000000003", "16.57", "ok"]
        assert table[2] == ["1", "", "", "", "", "integration_error"]

    def test_csv_is_deterministic(self, tmp_path):
        rows = [SweepRow(index=i, nu=i, gamma=0.1 * i, bound=0.2, margin=0.1 * i - 0.2, status="ok") for i in range(5)]
        writer = FileReportWriter()
        first = writer.write_rows(rows, tmp_path / "a.csv").read_bytes()
        second = writer.write_rows(rows, tmp_path / "b.csv").read_bytes()
        assert first == second


@pytest.mark.unit
class TestTextReportRenderer:
    def test_constant(self):
        report = cmd_constant(ConstantConfig(method="polyline", segments=1000))
        text = TextReportRenderer().render(report)
        assert "BOUNDARY LENGTH L" in text
        assert "L / (2 pi)" in text
        assert "value_in_range" in text
        assert "status: ok" in text

    def test_sweep(self):
        rows = [
            SweepRow(index=0, nu=2, gamma=5.0, bound=-12.2, margin=17.2, status="ok"),
            SweepRow(index=1, status="pole_error", message="state projects onto a pole"),
        ]
        summary = SweepSummary(size=2, completed=1, failures=1, violations=0, min_margin=17.2)
        report = RunReport(
            command="sweep",
            config={"seed": 7, "size": 2, "horizon": 10.0},
            tolerances={},
            result={"summary": summary.model_dump(), "rows": [r.model_dump() for r in rows]},
        ).with_checks({"no_violations": True, "no_failures": False})
        text = TextReportRenderer().render(report)
        assert "seed 7" in text
        assert "item 1: pole_error" in text
        assert "item 0" not in text
        assert "❌ no_failures" in text
        assert "status: check_failed" in text
