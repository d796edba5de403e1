"""
Small dataset builders shared by the test modules.
"""
from typing import Optional

import numpy as np

from src.dataset import ColumnSpec, FeatureSchema, TabularDataset


def numeric_schema(n_features: int, label: str = "y", month: Optional[str] = None) -> FeatureSchema:
    columns = [ColumnSpec(name=f"x{j}", kind="numeric") for j in range(n_features)]
    columns.append(ColumnSpec(name=label, kind="numeric", missing_allowed=False))
    if month:
        columns.append(ColumnSpec(name=month, kind="numeric", missing_allowed=False))
    return FeatureSchema(columns=columns, label_column=label, month_column=month)


def make_dataset(x, y, months=None, row_ids=None) -> TabularDataset:
    """Numeric dataset from a feature matrix, labels and optional month stamps."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    schema = numeric_schema(x.shape[1], month="month" if months is not None else None)
    columns = {f"x{j}": x[:, j] for j in range(x.shape[1])}
    columns["y"] = np.asarray(y, dtype=np.int8)
    if months is not None:
        columns["month"] = months
    return TabularDataset.from_columns(schema, columns, row_ids=row_ids)


def logistic_dataset(n: int, n_features: int = 3, seed: int = 0, row_offset: int = 0, months=None) -> TabularDataset:
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n_features))
    p = 1.0 / (1.0 + np.exp(-(1.5 * x[:, 0] - x[:, 1])))
    y = (rng.random(n) < p).astype(np.int8)
    return make_dataset(x, y, months=months, row_ids=np.arange(row_offset, row_offset + n))
