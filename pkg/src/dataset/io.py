"""
CSV ingestion and dataset persistence.
"""
import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from src.dataset.schema import FeatureSchema, MonthStamp
from src.dataset.table import ROW_ID, TabularDataset, to_categorical
from src.errors import EmptyInputError, OutputError, ParseError, SchemaError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_schema(path: PathLike) -> FeatureSchema:
    """Read a schema JSON document."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        return FeatureSchema.model_validate_json(text)
    except ValidationError as e:
        raise SchemaError(f"Invalid schema {path}: {e}") from e


def load_csv(path: PathLike, schema: FeatureSchema) -> TabularDataset:
    """
    Load a UTF-8, comma-separated CSV with a header row and apply the schema.

    Empty cells become missing. A ``row_id`` column, when present and not declared
    in the schema, supplies the row identifiers; otherwise rows are numbered 0..n-1.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"CSV not found: {path}")

    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise EmptyInputError(f"{path} is empty") from e

    for name in schema.names:
        if name not in raw.columns:
            raise SchemaError(f"Column '{name}' missing from {path.name}")
    if raw.empty:
        raise EmptyInputError(f"{path} has a header but no data rows")

    if ROW_ID in raw.columns and not schema.has_column(ROW_ID):
        row_ids = _parse_row_ids(raw[ROW_ID])
    else:
        row_ids = np.arange(len(raw), dtype=np.int64)

    data = {name: _parse_column(raw[name], schema, name) for name in schema.names}
    frame = pd.DataFrame(data, index=pd.Index(row_ids, name=ROW_ID))
    ds = TabularDataset(schema, frame)
    logger.info("Loaded %s: %d rows, %d features", path.name, ds.n_rows, len(ds.feature_names))
    return ds


def _parse_row_ids(cells: pd.Series) -> np.ndarray:
    ids = pd.to_numeric(cells, errors="coerce")
    if ids.isna().any():
        bad = int(np.flatnonzero(ids.isna().to_numpy())[0])
        raise ParseError("Unparseable row_id", row=bad + 1, column=ROW_ID)
    return ids.to_numpy(dtype=np.int64)


def _parse_column(cells: pd.Series, schema: FeatureSchema, name: str):
    spec = schema.column(name)
    stripped = cells.str.strip()
    empty = (stripped == "").to_numpy()

    required = not spec.missing_allowed or (name == schema.label_column and spec.kind == "numeric")
    if empty.any() and required and name != schema.month_column:
        raise ParseError("Missing value not allowed", row=int(np.flatnonzero(empty)[0]) + 1, column=name)

    if name == schema.month_column:
        return _parse_months(stripped, empty, name)

    if spec.kind == "numeric":
        # "13.5%" style exports parse as the bare number
        values = _parse_floats(stripped.str.rstrip("%").where(~empty))
        bad = np.isnan(values) & ~empty
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise ParseError(f"Cannot parse '{cells.iloc[row]}' as a number", row=row + 1, column=name)
        if name == schema.label_column:
            if not np.isin(values, [0.0, 1.0]).all():
                raise SchemaError(f"Label column '{name}' must hold 0/1 values")
            return values.astype(np.int8)
        return values

    return to_categorical(stripped.where(~empty, "").tolist())


def _parse_floats(text: pd.Series) -> np.ndarray:
    """Decimal text to float64, rounded exactly; unparseable cells come back as NaN."""
    try:
        return text.astype(np.float64).to_numpy()
    except ValueError:
        # pd.to_numeric may be one ulp off; here it only locates the bad cells
        return pd.to_numeric(text, errors="coerce").to_numpy(dtype=np.float64)


def _parse_months(stripped: pd.Series, empty: np.ndarray, name: str) -> np.ndarray:
    if empty.any():
        raise ParseError("Missing month stamp", row=int(np.flatnonzero(empty)[0]) + 1, column=name)
    cache: Dict[str, int] = {}
    ordinals = np.empty(len(stripped), dtype=np.int64)
    for i, text in enumerate(stripped.tolist()):
        if text not in cache:
            try:
                cache[text] = MonthStamp.parse(text).ordinal
            except ParseError as e:
                raise ParseError(str(e), row=i + 1, column=name) from e
        ordinals[i] = cache[text]
    return ordinals


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".schema.json")


def save_dataset(ds: TabularDataset, path: PathLike) -> Path:
    """Write the dataset as CSV (row_id first, months as YYYY-MM) plus a schema sidecar."""
    path = Path(path)
    frame = ds.frame[ds.schema.names].copy()
    if ds.has_months:
        frame[ds.schema.month_column] = [str(m) for m in ds.month_stamps()]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=True, index_label=ROW_ID, na_rep="", encoding="utf-8")
        _sidecar(path).write_text(ds.schema.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write dataset to {path}: {e}") from e
    logger.info("Saved %d rows to %s", ds.n_rows, path)
    return path


def load_dataset(path: PathLike) -> TabularDataset:
    """Read a dataset written by ``save_dataset``."""
    path = Path(path)
    sidecar = _sidecar(path)
    if not sidecar.exists():
        raise FileNotFoundError(f"Schema sidecar not found: {sidecar}")
    return load_csv(path, load_schema(sidecar))
