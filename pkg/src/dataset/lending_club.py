"""
Lending Club preprocessing: status encoding and feature transforms.
The raw column declarations live in data/schemas/lending_club.json.
"""
import logging
import re
from pathlib import Path
from typing import Dict, List

import numpy as np
import pandas as pd

from src.dataset.io import load_schema
from src.dataset.schema import ColumnSpec, FeatureSchema
from src.dataset.table import TabularDataset
from src.errors import SchemaError

logger = logging.getLogger(__name__)

# Path to data directory
DATA_DIR = Path(__file__).parent.parent.parent / "data"
SCHEMA_PATH = DATA_DIR / "schemas" / "lending_club.json"

STATUS_COLUMN = "loan_status"
STATUS_LABELS: Dict[str, int] = {"Charged Off": 1, "Fully Paid": 0}

EMP_LENGTH_YEARS: Dict[str, int] = {
    "<1year": 0,
    "1year": 1,
    **{f"{n}years": n for n in range(2, 10)},
    "10+years": 10,
}

PREPROCESS_SOURCES = ["emp_length", "fico_range_low", "fico_range_high", "annual_inc", "revol_bal"]

_YEAR = re.compile(r"(\d{4})")
_LEADING_NUMBER = re.compile(r"(\d+(?:\.\d+)?)")


def lending_club_schema() -> FeatureSchema:
    """The raw 24-feature schema (plus status and issue month)."""
    return load_schema(SCHEMA_PATH)


def encode_loan_status(ds: TabularDataset) -> TabularDataset:
    """
    Keep "Charged Off" (label 1) and "Fully Paid" (label 0) rows; drop every other status.
    """
    if not ds.schema.has_column(STATUS_COLUMN):
        raise SchemaError(f"Column '{STATUS_COLUMN}' is not in the schema")
    if ds.schema.column(STATUS_COLUMN).kind != "categorical":
        raise SchemaError(f"Column '{STATUS_COLUMN}' is already encoded")

    status = ds.frame[STATUS_COLUMN].astype(object)
    keep = status.isin(list(STATUS_LABELS)).to_numpy()
    frame = ds.frame.loc[keep].copy()
    frame[STATUS_COLUMN] = status[keep].map(STATUS_LABELS).to_numpy(dtype=np.int8)

    columns = [
        ColumnSpec(name=c.name, kind="numeric", missing_allowed=False) if c.name == STATUS_COLUMN else c
        for c in ds.schema.columns
    ]
    schema = ds.schema.replace_columns(columns, label_column=STATUS_COLUMN)
    out = TabularDataset(schema, frame)

    positives = int(out.labels.sum()) if out.n_rows else 0
    logger.info(
        "Status encoding kept %d of %d rows (%d positive, %d negative)",
        out.n_rows, ds.n_rows, positives, out.n_rows - positives,
    )
    return out


def preprocess_lending_club(ds: TabularDataset) -> TabularDataset:
    """
    Apply the feature transforms:
    emp_length text → 0..10, fico_score = mean of the range bounds,
    log_annual_inc / log_revol_bal = log10(x + 1), and text term / earliest_cr_line
    reduced to numbers. Missing values stay missing.
    """
    for name in PREPROCESS_SOURCES:
        if not ds.schema.has_column(name):
            raise SchemaError(f"Column '{name}' required for preprocessing is missing")

    frame = ds.frame.copy()
    columns: List[ColumnSpec] = []
    for spec in ds.schema.columns:
        name = spec.name
        if name == "emp_length":
            frame[name] = _emp_length(frame[name])
            columns.append(ColumnSpec(name=name, kind="numeric"))
        elif name == "fico_range_low":
            low, high = _numeric(frame["fico_range_low"]), _numeric(frame["fico_range_high"])
            frame["fico_score"] = (low + high) / 2.0
            columns.append(ColumnSpec(name="fico_score", kind="numeric"))
        elif name == "fico_range_high":
            continue
        elif name in ("annual_inc", "revol_bal"):
            new_name = f"log_{name}"
            with np.errstate(invalid="ignore", divide="ignore"):
                frame[new_name] = np.log10(_numeric(frame[name]) + 1.0)
            columns.append(ColumnSpec(name=new_name, kind="numeric"))
        elif name == "term" and spec.kind == "categorical":
            frame[name] = _first_number(frame[name], _LEADING_NUMBER)
            columns.append(ColumnSpec(name=name, kind="numeric"))
        elif name == "earliest_cr_line" and spec.kind == "categorical":
            frame[name] = _first_number(frame[name], _YEAR)
            columns.append(ColumnSpec(name=name, kind="numeric"))
        else:
            columns.append(spec)

    frame = frame.drop(columns=["fico_range_low", "fico_range_high", "annual_inc", "revol_bal"])
    schema = ds.schema.replace_columns(columns)
    out = TabularDataset(schema, frame[schema.names])
    logger.info("Preprocessed %d rows into %d model features", out.n_rows, len(out.feature_names))
    return out


def _numeric(series: pd.Series) -> np.ndarray:
    if isinstance(series.dtype, pd.CategoricalDtype):
        return pd.to_numeric(series.astype(object), errors="coerce").to_numpy(dtype=np.float64)
    return series.to_numpy(dtype=np.float64)


def _emp_length(series: pd.Series) -> np.ndarray:
    if not isinstance(series.dtype, pd.CategoricalDtype):
        return series.to_numpy(dtype=np.float64)
    keys = series.astype(object).map(lambda v: v.replace(" ", "") if isinstance(v, str) else v)
    return keys.map(EMP_LENGTH_YEARS).to_numpy(dtype=np.float64)


def _first_number(series: pd.Series, pattern: re.Pattern) -> np.ndarray:
    def extract(value):
        if not isinstance(value, str):
            return np.nan
        match = pattern.search(value)
        return float(match.group(1)) if match else np.nan

    return series.astype(object).map(extract).to_numpy(dtype=np.float64)
