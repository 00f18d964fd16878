from report.writers import write_csv, read_csv, write_run_outputs, provenance_header
from report.tables import summarize, format_table, format_report, REFERENCE_ROWS, NOISE_LEVELS
from report.figures import plot_loss_curves
from report.pdf_generator import ParameterTableReport

__all__ = [
    "write_csv", "read_csv", "write_run_outputs", "provenance_header", "summarize",
    "format_table", "format_report", "REFERENCE_ROWS", "NOISE_LEVELS", "plot_loss_curves",
    "ParameterTableReport",
]
