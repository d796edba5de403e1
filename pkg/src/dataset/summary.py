"""
Per-column descriptive statistics over non-missing values.
"""
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel

from src.dataset.table import TabularDataset


class ColumnSummary(BaseModel):
    """Statistics for one numeric column; None marks an undefined moment."""

    name: str
    count: int
    missing: int
    mean: Optional[float] = None
    std: Optional[float] = None
    min: Optional[float] = None
    q25: Optional[float] = None
    q50: Optional[float] = None
    q75: Optional[float] = None
    max: Optional[float] = None

    @property
    def defined(self) -> bool:
        return self.count > 0


def summarize(ds: TabularDataset) -> Dict[str, ColumnSummary]:
    """Summaries for every numeric column (features and the binary label), in schema order."""
    summaries: Dict[str, ColumnSummary] = {}
    for spec in ds.schema.columns:
        if spec.kind != "numeric" or spec.name == ds.schema.month_column:
            continue
        values = ds.frame[spec.name].to_numpy(dtype=np.float64)
        present = values[~np.isnan(values)]
        summary = ColumnSummary(name=spec.name, count=present.size, missing=values.size - present.size)
        if present.size:
            q25, q50, q75 = np.percentile(present, [25, 50, 75])
            summary = summary.model_copy(update={
                "mean": float(present.mean()),
                # sample standard deviation; undefined for a single value
                "std": float(present.std(ddof=1)) if present.size > 1 else None,
                "min": float(present.min()),
                "q25": float(q25),
                "q50": float(q50),
                "q75": float(q75),
                "max": float(present.max()),
            })
        summaries[spec.name] = summary
    return summaries
