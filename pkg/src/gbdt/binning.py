"""
Feature encoding and histogram binning.

Model inputs are a float matrix: numeric features as-is, categorical features as
codes into the training dictionary. NaN marks a missing value or an unseen category.
Binning maps each column onto at most ``max_bins`` bins plus one shared missing bin.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from src.dataset.table import TabularDataset
from src.errors import SchemaError


@dataclass(frozen=True)
class FeatureSpace:
    """Feature names, kinds and category dictionaries fixed at training time."""

    names: List[str]
    kinds: List[str]
    categories: Dict[str, List[str]]

    @classmethod
    def from_dataset(cls, ds: TabularDataset, max_bins: int) -> "FeatureSpace":
        names, kinds, categories = [], [], {}
        for spec in ds.schema.feature_columns:
            names.append(spec.name)
            kinds.append(spec.kind)
            if spec.kind == "categorical":
                # categories beyond the bin budget are treated like unseen ones
                categories[spec.name] = ds.categories(spec.name)[:max_bins]
        return cls(names, kinds, categories)

    @property
    def is_categorical(self) -> np.ndarray:
        return np.array([kind == "categorical" for kind in self.kinds], dtype=bool)

    def encode(self, ds: TabularDataset) -> np.ndarray:
        """Float matrix of shape (n_rows, n_features) in model feature order."""
        matrix = np.empty((ds.n_rows, len(self.names)), dtype=np.float64)
        for j, (name, kind) in enumerate(zip(self.names, self.kinds)):
            if name not in ds.frame.columns or name not in ds.schema.feature_names:
                raise SchemaError(f"Feature '{name}' missing from dataset")
            if ds.schema.column(name).kind != kind:
                raise SchemaError(f"Feature '{name}' has kind {ds.schema.column(name).kind}, model expects {kind}")
            column = ds.frame[name]
            if kind == "numeric":
                matrix[:, j] = column.to_numpy(dtype=np.float64)
            else:
                codes = pd.Categorical(column.astype(object), categories=self.categories[name]).codes
                matrix[:, j] = np.where(codes < 0, np.nan, codes)
        return matrix


def numeric_thresholds(values: np.ndarray, max_bins: int) -> np.ndarray:
    """
    Ascending bin upper bounds. With at most ``max_bins`` distinct values every gap
    between neighbours gets a midpoint threshold, so binned splits equal exact ones.
    """
    present = values[~np.isnan(values)]
    distinct = np.unique(present)
    if distinct.size <= 1:
        return np.empty(0, dtype=np.float64)
    if distinct.size <= max_bins:
        return (distinct[:-1] + distinct[1:]) / 2.0
    quantiles = np.linspace(0.0, 1.0, max_bins + 1)[1:-1]
    return np.unique(np.quantile(present, quantiles, method="midpoint"))


@dataclass(frozen=True)
class BinnedMatrix:
    codes: np.ndarray                          # (n_rows, n_features) uint16
    n_bins: np.ndarray                         # non-missing bins per feature
    thresholds: List[Optional[np.ndarray]]     # None for categorical features
    is_categorical: np.ndarray
    missing_bin: int

    @property
    def n_features(self) -> int:
        return self.codes.shape[1]

    @property
    def stride(self) -> int:
        return self.missing_bin + 1


def bin_matrix(matrix: np.ndarray, space: FeatureSpace, max_bins: int) -> BinnedMatrix:
    """Bin a training matrix; the missing bin is index ``max_bins`` for every feature."""
    n_rows, n_features = matrix.shape
    codes = np.empty((n_rows, n_features), dtype=np.uint16)
    n_bins = np.zeros(n_features, dtype=np.int64)
    thresholds: List[Optional[np.ndarray]] = []
    is_categorical = space.is_categorical

    for j in range(n_features):
        column = matrix[:, j]
        missing = np.isnan(column)
        if is_categorical[j]:
            n_bins[j] = len(space.categories[space.names[j]])
            thresholds.append(None)
            binned = np.where(missing, max_bins, np.nan_to_num(column, nan=0.0))
        else:
            cuts = numeric_thresholds(column, max_bins)
            n_bins[j] = cuts.size + 1
            thresholds.append(cuts)
            binned = np.where(missing, max_bins, np.searchsorted(cuts, np.nan_to_num(column), side="left"))
        codes[:, j] = binned.astype(np.uint16)

    return BinnedMatrix(codes, n_bins, thresholds, is_categorical, max_bins)
