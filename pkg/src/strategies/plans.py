"""
Training plans: which rows train and validate each fold, with optional weights.

A plan is a pure description built from a dataset (and, for the shift-aware
strategies, an adversarial report). ``execute_plan`` turns it into models.

Strategies:
- baseline:        stratified k-fold over all rows
- chrono-cv:       drop rows before a start month, k-fold the rest
- chrono-holdout:  train on [range_start, valid_start), validate on [valid_start, end]
- weighted:        baseline folds, each row weighted by its P(test)
- filtered:        keep the most test-like rows only, k-fold them
- augmented:       k-fold the most test-like rows, add the rest to every fold's training side
"""
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.adversarial import AdversarialReport
from src.dataset.schema import MonthStamp
from src.dataset.table import TabularDataset
from src.errors import ContractError, EmptyInputError, EmptySelectionError, OutputError, SchemaError
from src.folds import stratified_folds

logger = logging.getLogger(__name__)


class PlanFold(BaseModel):
    model_config = ConfigDict(frozen=True)

    train_rows: List[int]
    valid_rows: List[int]


class TrainingPlan(BaseModel):
    """Folds of row_ids plus optional per-row training weights."""

    model_config = ConfigDict(frozen=True)

    folds: List[PlanFold] = Field(min_length=1)
    weights: Optional[Dict[int, float]] = None
    strategy_tag: str
    param_tag: str = ""

    @model_validator(mode="after")
    def _check_folds(self) -> "TrainingPlan":
        for i, fold in enumerate(self.folds):
            if not fold.valid_rows:
                raise ValueError(f"fold {i} has no validation rows")
            overlap = set(fold.train_rows) & set(fold.valid_rows)
            if overlap:
                raise ValueError(f"fold {i} trains and validates on rows {sorted(overlap)[:10]}")
            if self.weights is not None:
                uncovered = [r for r in fold.train_rows if r not in self.weights]
                if uncovered:
                    raise ValueError(f"fold {i} has unweighted training rows {uncovered[:10]}")
        if self.weights is not None and any(w < 0 for w in self.weights.values()):
            raise ValueError("weights must be nonnegative")
        return self

    @property
    def k(self) -> int:
        return len(self.folds)

    def valid_row_union(self) -> List[int]:
        return sorted({r for fold in self.folds for r in fold.valid_rows})


def _labels(train: TabularDataset) -> np.ndarray:
    labels = train.labels
    if labels is None:
        raise SchemaError(f"Label column '{train.schema.label_column}' is not encoded as 0/1")
    return labels


def _cv_folds(row_ids: np.ndarray, labels: np.ndarray, k: int, seed: int) -> List[PlanFold]:
    return [
        PlanFold(train_rows=train_ids.tolist(), valid_rows=valid_ids.tolist())
        for train_ids, valid_ids in stratified_folds(row_ids, labels, k, seed)
    ]


def baseline_cv_plan(train: TabularDataset, k: int = 5, seed: int = 42) -> TrainingPlan:
    if train.n_rows == 0:
        raise EmptyInputError("Cannot plan folds over an empty dataset")
    folds = _cv_folds(train.row_ids, _labels(train), k, seed)
    return TrainingPlan(folds=folds, strategy_tag="baseline", param_tag="all")


def chrono_cv_plan(train: TabularDataset, start: MonthStamp, k: int = 5, seed: int = 42) -> TrainingPlan:
    """Rows issued before ``start`` are dropped; the remainder is k-folded."""
    keep = train.require_months() >= start.ordinal
    if not keep.any():
        raise EmptySelectionError(f"No rows at or after {start}")
    folds = _cv_folds(train.row_ids[keep], _labels(train)[keep], k, seed)
    logger.debug("chrono-cv from %s keeps %d of %d rows", start, int(keep.sum()), train.n_rows)
    return TrainingPlan(folds=folds, strategy_tag="chrono-cv", param_tag=start.compact())


def chrono_holdout_plan(train: TabularDataset, range_start: MonthStamp, valid_start: MonthStamp) -> TrainingPlan:
    """One fold: train on [range_start, valid_start), validate on [valid_start, end]."""
    tag = f"{range_start.compact()}/{valid_start.compact()}"
    if not range_start < valid_start:
        raise EmptySelectionError(f"Range start {range_start} must precede validation start {valid_start}")
    months = train.require_months()
    train_mask = (months >= range_start.ordinal) & (months < valid_start.ordinal)
    valid_mask = months >= valid_start.ordinal
    if not train_mask.any():
        raise EmptySelectionError(f"No training rows in [{range_start}, {valid_start})")
    if not valid_mask.any():
        raise EmptySelectionError(f"No validation rows at or after {valid_start}")
    fold = PlanFold(
        train_rows=np.sort(train.row_ids[train_mask]).tolist(),
        valid_rows=np.sort(train.row_ids[valid_mask]).tolist(),
    )
    return TrainingPlan(folds=[fold], strategy_tag="chrono-holdout", param_tag=tag)


def _report_scores(train: TabularDataset, report: AdversarialReport) -> np.ndarray:
    scores = report.scores_for(train.row_ids)
    gaps = train.row_ids[np.isnan(scores)]
    if gaps.size:
        raise ContractError(f"Adversarial report has no score for row_ids {gaps[:20].tolist()}")
    return scores


def weighted_plan(train: TabularDataset, report: AdversarialReport, k: int = 5, seed: int = 42) -> TrainingPlan:
    """Baseline folds; each training row weighted by its out-of-fold P(test)."""
    scores = _report_scores(train, report)
    folds = baseline_cv_plan(train, k, seed).folds
    weights = {int(r): float(s) for r, s in zip(train.row_ids, scores)}
    return TrainingPlan(folds=folds, weights=weights, strategy_tag="weighted", param_tag="p_test")


def retained_count(n: int, keep_fraction: float) -> int:
    """ceil(keep_fraction * n) on the decimal value of keep_fraction."""
    if not 0.0 < keep_fraction <= 1.0:
        raise ContractError(f"keep_fraction must lie in (0, 1], got {keep_fraction}")
    return math.ceil(Fraction(keep_fraction).limit_denominator(10**6) * n)


def split_by_score(
    train: TabularDataset, report: AdversarialReport, keep_fraction: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    (retained, discarded) row_ids: the ceil(keep_fraction * n) rows with the
    highest P(test), ties broken by ascending row_id. Both sorted ascending.
    """
    n_keep = retained_count(train.n_rows, keep_fraction)
    ids = train.row_ids
    order = np.lexsort((ids, -_report_scores(train, report)))
    return np.sort(ids[order[:n_keep]]), np.sort(ids[order[n_keep:]])


def _retained_folds(
    train: TabularDataset, retained: np.ndarray, k: int, seed: int
) -> List[PlanFold]:
    if retained.size < k:
        raise ContractError(f"Only {retained.size} rows retained, fewer than k={k}")
    labels = train.frame.loc[retained, train.schema.label_column].to_numpy(dtype=np.int8)
    return _cv_folds(retained, labels, k, seed)


def _keep_tag(keep_fraction: float) -> str:
    return f"keep={keep_fraction:.2f}"


def filtered_cv_plan(
    train: TabularDataset, report: AdversarialReport, keep_fraction: float, k: int = 5, seed: int = 42
) -> TrainingPlan:
    """k-fold over the most test-like rows; the rest are discarded."""
    retained, discarded = split_by_score(train, report, keep_fraction)
    folds = _retained_folds(train, retained, k, seed)
    logger.debug("filtered keep=%.2f retains %d rows, discards %d", keep_fraction, retained.size, discarded.size)
    return TrainingPlan(folds=folds, strategy_tag="filtered", param_tag=_keep_tag(keep_fraction))


def augmented_cv_plan(
    train: TabularDataset, report: AdversarialReport, keep_fraction: float, k: int = 5, seed: int = 42
) -> TrainingPlan:
    """k-fold over the most test-like rows; the other rows join every fold's training side only."""
    retained, extra = split_by_score(train, report, keep_fraction)
    folds = [
        PlanFold(train_rows=sorted(fold.train_rows + extra.tolist()), valid_rows=fold.valid_rows)
        for fold in _retained_folds(train, retained, k, seed)
    ]
    return TrainingPlan(folds=folds, strategy_tag="augmented", param_tag=_keep_tag(keep_fraction))


def retained_share_by_month(
    train: TabularDataset, report: AdversarialReport, keep_fraction: float
) -> Dict[MonthStamp, float]:
    """Fraction of each month's rows kept by the top-``keep_fraction`` selection."""
    retained, _ = split_by_score(train, report, keep_fraction)
    months = train.require_months()
    kept = np.isin(train.row_ids, retained)
    shares = {}
    for month in np.unique(months):
        in_month = months == month
        shares[MonthStamp.from_ordinal(int(month))] = float(kept[in_month].mean())
    return shares


def save_plan(plan: TrainingPlan, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(plan.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write plan to {path}: {e}") from e
    return path


def load_plan(path: Union[str, Path]) -> TrainingPlan:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return TrainingPlan.model_validate_json(text)
    except ValidationError as e:
        raise ContractError(f"Invalid plan file {path}: {e}") from e
