"""
TabularDataset: an immutable, column-major table with a schema.

Storage is a pandas DataFrame indexed by ``row_id``:
- numeric columns are float64 with NaN for missing,
- categorical columns use ``pd.Categorical`` (the category dictionary; code -1 is missing),
- the label column is int8 in {0, 1} once encoded (raw text before encoding),
- the month column holds month ordinals (see ``MonthStamp.ordinal``).
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.dataset.schema import FeatureSchema, MonthStamp
from src.errors import ContractError, SchemaError

logger = logging.getLogger(__name__)

ROW_ID = "row_id"


@dataclass(frozen=True, eq=False)
class TabularDataset:
    schema: FeatureSchema
    frame: pd.DataFrame

    def __post_init__(self):
        frame = self.frame
        missing = [name for name in self.schema.names if name not in frame.columns]
        if missing:
            raise SchemaError(f"Frame lacks declared columns: {missing}")
        if not frame.index.is_unique:
            raise ContractError("row_ids must be unique")
        frame.index.name = ROW_ID
        for spec in self.schema.feature_columns:
            series = frame[spec.name]
            if spec.kind == "categorical" and not isinstance(series.dtype, pd.CategoricalDtype):
                raise SchemaError(f"Column '{spec.name}' is declared categorical but not stored as one")
            if spec.kind == "numeric" and not pd.api.types.is_float_dtype(series.dtype):
                raise SchemaError(f"Column '{spec.name}' is declared numeric but not stored as float")
        if self.label_is_binary:
            values = frame[self.schema.label_column]
            if values.isna().any() or not values.isin([0, 1]).all():
                raise SchemaError(f"Label column '{self.schema.label_column}' must be binary")

    # ---- shape and accessors -------------------------------------------------

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    def __len__(self) -> int:
        return self.n_rows

    @property
    def row_ids(self) -> np.ndarray:
        return self.frame.index.to_numpy(dtype=np.int64)

    @property
    def feature_names(self) -> List[str]:
        return self.schema.feature_names

    @property
    def label_is_binary(self) -> bool:
        return self.schema.column(self.schema.label_column).kind == "numeric"

    @property
    def labels(self) -> Optional[np.ndarray]:
        """Binary labels, or None while the label column still holds raw text."""
        if not self.label_is_binary:
            return None
        return self.frame[self.schema.label_column].to_numpy(dtype=np.int8)

    @property
    def has_months(self) -> bool:
        return self.schema.month_column is not None

    @property
    def months(self) -> Optional[np.ndarray]:
        """Month ordinals per row, or None when the schema has no month column."""
        if not self.has_months:
            return None
        return self.frame[self.schema.month_column].to_numpy(dtype=np.int64)

    def require_months(self) -> np.ndarray:
        months = self.months
        if months is None:
            raise SchemaError("Dataset has no month column")
        return months

    def month_stamps(self) -> List[MonthStamp]:
        return [MonthStamp.from_ordinal(m) for m in self.require_months()]

    def categories(self, name: str) -> List[str]:
        return [str(c) for c in self.frame[name].cat.categories]

    # ---- row selection (row_ids are always preserved) ---------------------------

    def take(self, row_ids: Iterable[int]) -> "TabularDataset":
        ids = np.asarray(list(row_ids) if not isinstance(row_ids, np.ndarray) else row_ids, dtype=np.int64)
        unknown = np.setdiff1d(ids, self.row_ids)
        if unknown.size:
            raise ContractError(f"Unknown row_ids: {unknown[:10].tolist()}")
        return TabularDataset(self.schema, self.frame.loc[ids])

    def filter(self, mask: np.ndarray) -> "TabularDataset":
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.n_rows,):
            raise ContractError("Mask length does not match the dataset")
        return TabularDataset(self.schema, self.frame.loc[mask])

    def sorted_by_row_id(self) -> "TabularDataset":
        return TabularDataset(self.schema, self.frame.sort_index(kind="mergesort"))

    def with_schema(self, schema: FeatureSchema, frame: Optional[pd.DataFrame] = None) -> "TabularDataset":
        return TabularDataset(schema, self.frame if frame is None else frame)

    # ---- combination ---------------------------------------------------------

    @staticmethod
    def concat_frames(frames: Sequence[pd.DataFrame], categorical: Sequence[str]) -> pd.DataFrame:
        """Concatenate frames, merging category dictionaries (union, first-seen order)."""
        merged = pd.concat([frame.astype({name: object for name in categorical}) for frame in frames], axis=0)
        for name in categorical:
            categories = _union_categories([frame[name] for frame in frames])
            merged[name] = pd.Categorical(merged[name].to_numpy(), categories=categories)
        return merged

    @classmethod
    def from_columns(
        cls,
        schema: FeatureSchema,
        columns: Dict[str, Sequence],
        row_ids: Optional[Sequence[int]] = None,
    ) -> "TabularDataset":
        """Build a dataset from plain Python/numpy columns (numeric → float, categorical → strings)."""
        n = len(next(iter(columns.values()))) if columns else 0
        index = pd.Index(np.arange(n) if row_ids is None else np.asarray(row_ids, dtype=np.int64), name=ROW_ID)
        data = {}
        for spec in schema.columns:
            if spec.name not in columns:
                raise SchemaError(f"Missing column '{spec.name}'")
            values = columns[spec.name]
            if spec.name == schema.month_column:
                data[spec.name] = np.asarray(
                    [v.ordinal if isinstance(v, MonthStamp) else MonthStamp.parse(str(v)).ordinal for v in values],
                    dtype=np.int64,
                )
            elif spec.kind == "numeric" and spec.name == schema.label_column:
                data[spec.name] = np.asarray(values, dtype=np.int8)
            elif spec.kind == "numeric":
                data[spec.name] = np.asarray(values, dtype=np.float64)
            else:
                data[spec.name] = to_categorical(values)
        return cls(schema, pd.DataFrame(data, index=index))


def to_categorical(values: Sequence) -> pd.Categorical:
    """Categorical with categories in first-appearance order; None/NaN/"" become missing."""
    cleaned = [None if _is_missing(v) else str(v) for v in values]
    categories = list(dict.fromkeys(v for v in cleaned if v is not None))
    return pd.Categorical(cleaned, categories=categories)


def _is_missing(value) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and np.isnan(value):
        return True
    return isinstance(value, str) and value == ""


def _union_categories(parts: Sequence[pd.Series]) -> List[str]:
    categories: Dict[str, None] = {}
    for part in parts:
        for category in part.cat.categories:
            categories.setdefault(category, None)
    return list(categories)


def month_counts(ds: TabularDataset) -> Dict[MonthStamp, int]:
    """Row count per month, in chronological order."""
    months = ds.require_months()
    values, counts = np.unique(months, return_counts=True)
    return {MonthStamp.from_ordinal(v): int(c) for v, c in zip(values, counts)}


def split_by_month(ds: TabularDataset, first_test_month: MonthStamp) -> tuple:
    """Rows strictly before ``first_test_month`` and rows at/after it."""
    months = ds.require_months()
    before = months < first_test_month.ordinal
    train, test = ds.filter(before), ds.filter(~before)
    logger.info(
        "Split at %s: %d train rows, %d test rows", first_test_month, train.n_rows, test.n_rows
    )
    return train, test
