"""Human-readable summaries rendered from one jinja2 template per command."""
from pathlib import Path

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.core.domain.report_models import RunReport


def _g(value, digits: int = 10) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return format(value, f".{digits}g")
    return str(value)


class TextReportRenderer:
    def __init__(self, template_dir: Path = Path(__file__).parent / "templates"):
        self.env = Environment(
            loader=FileSystemLoader(str(template_dir)),
            undefined=StrictUndefined,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters["g"] = _g

    def render(self, report: RunReport) -> str:
        template = self.env.get_template(f"{report.command}.txt.j2")
        return template.render(report=report, result=report.result, checks=report.checks)
