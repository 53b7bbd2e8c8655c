"""Grid search, representation measurements, reports and the command line."""
from .grid import GridCellResult, GridSpec, average_by, evaluate_holdout, run_cell, run_grid
from .measure import REPRESENTATIONS, BenchConfig, BenchRecord, build_and_measure
from .report import emit_report, load_records, load_results, save_records, save_results

__all__ = [
    "BenchConfig", "BenchRecord", "GridCellResult", "GridSpec", "REPRESENTATIONS", "average_by",
    "build_and_measure", "emit_report", "evaluate_holdout", "load_records", "load_results",
    "run_cell", "run_grid", "save_records", "save_results",
]
