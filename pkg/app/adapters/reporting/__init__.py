from app.adapters.reporting.file_report_writer import FileReportWriter, SWEEP_COLUMNS
from app.adapters.reporting.npz_artifact import write_extremal_artifact
from app.adapters.reporting.text_renderer import TextReportRenderer

__all__ = ["FileReportWriter", "SWEEP_COLUMNS", "TextReportRenderer", "write_extremal_artifact"]
