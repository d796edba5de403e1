# Synthetic shift data, the experiment grid, and report emission
from src.harness.generator import ShiftSpec, generate_shifted, solve_intercept, synthetic_schema
from src.harness.grid import ExperimentReport, ExperimentRow, GridConfig, GridMetadata, RetentionPoint
from src.harness.report import emit_report, report_summary
from src.harness.runner import run_grid

__all__ = [
    "ExperimentReport",
    "ExperimentRow",
    "GridConfig",
    "GridMetadata",
    "RetentionPoint",
    "ShiftSpec",
    "emit_report",
    "generate_shifted",
    "report_summary",
    "run_grid",
    "solve_intercept",
    "synthetic_schema",
]
