"""
Writes an ExperimentReport to a results directory:

- results.csv            one row per experiment
- summary.json           best row per set and overall, plus grid metadata
- retention_profile.csv  retained share per month at the best Set 4/5 keep fractions
"""
import json
import logging
from pathlib import Path
from typing import Dict, Union

import pandas as pd

from src.errors import ContractError, OutputError
from src.harness.grid import ExperimentReport, ExperimentRow, RetentionPoint

logger = logging.getLogger(__name__)

RESULT_COLUMNS = list(ExperimentRow.model_fields)
RETENTION_COLUMNS = list(RetentionPoint.model_fields)


def report_summary(report: ExperimentReport) -> dict:
    best_per_set: Dict[str, dict] = {}
    for set_id in sorted({row.set_id for row in report.rows}):
        best_per_set[str(set_id)] = report.best(set_id).model_dump()
    return {
        "n_experiments": len(report.rows),
        "best_per_set": best_per_set,
        "overall_best": report.best().model_dump(),
        "metadata": None if report.metadata is None else report.metadata.model_dump(),
    }


def emit_report(report: ExperimentReport, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Write the report files; the same report always produces the same bytes."""
    if not report.rows:
        raise ContractError("Cannot emit an empty experiment report")
    out_dir = Path(out_dir)
    paths = {
        "results": out_dir / "results.csv",
        "summary": out_dir / "summary.json",
        "retention_profile": out_dir / "retention_profile.csv",
    }

    results = pd.DataFrame([row.model_dump() for row in report.rows], columns=RESULT_COLUMNS)
    retention = pd.DataFrame([p.model_dump() for p in report.retention_profile], columns=RETENTION_COLUMNS)
    summary = json.dumps(report_summary(report), indent=2, sort_keys=True)

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        results.to_csv(paths["results"], index=False, lineterminator="\n")
        paths["summary"].write_text(summary + "\n", encoding="utf-8")
        if report.retention_profile:
            retention.to_csv(paths["retention_profile"], index=False, lineterminator="\n")
        else:
            del paths["retention_profile"]
    except OSError as e:
        raise OutputError(f"Cannot write report to {out_dir}: {e}") from e

    logger.info("Wrote %d experiment rows to %s", len(report.rows), out_dir)
    return paths
