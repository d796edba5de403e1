"""
Adversarial validation: train a classifier to tell training rows from test rows.

If the origin classifier cannot beat chance (AUC near 0.5) the two samples are
consistent; an AUC near 1 means the training data has drifted away from the
test period. The out-of-fold probability that a training row "looks like test"
drives the weighting and filtering strategies in ``src.strategies``.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from src.config import get_settings
from src.dataset.schema import ColumnSpec, FeatureSchema
from src.dataset.table import ROW_ID, TabularDataset
from src.errors import ContractError, DegenerateLabelError, EmptyInputError, FoldError, OutputError, SchemaError
from src.folds import stratified_folds
from src.gbdt import BoostParams, fit, predict_score
from src.metrics import auc

logger = logging.getLogger(__name__)

ORIGIN_LABEL = "is_test"
SOURCE_ROW_ID = "source_row_id"
SOURCE = "source"
EARLY_STOPPING_FOLDS = 5

Verdict = Literal["consistent", "shifted"]


def verdict(adv_auc: float, threshold: Optional[float] = None) -> Verdict:
    """``shifted`` iff ``adv_auc >= threshold`` (default from settings, 0.7)."""
    if threshold is None:
        threshold = get_settings().verdict_threshold
    if not 0.0 <= adv_auc <= 1.0:
        raise ContractError(f"adv_auc must lie in [0, 1], got {adv_auc}")
    return "shifted" if adv_auc >= threshold else "consistent"


def build_adversarial_dataset(train: TabularDataset, test: TabularDataset) -> TabularDataset:
    """
    Stack train and test feature columns under a new binary label ``is_test``.

    The original target and month columns are dropped. Rows are ordered by
    (original row_id, origin) and renumbered 0..n-1; the original row_id and
    the source ("train"/"test") stay in the frame as metadata columns.
    """
    if not train.schema.features_match(test.schema):
        raise SchemaError("Train and test declare different feature columns")

    features = train.schema.feature_columns
    names = [spec.name for spec in features]
    categorical = [spec.name for spec in features if spec.kind == "categorical"]

    parts = []
    for ds, source, origin in ((train, "train", 0), (test, "test", 1)):
        part = ds.frame[names].copy()
        part[ORIGIN_LABEL] = np.int8(origin)
        part[SOURCE_ROW_ID] = ds.row_ids
        part[SOURCE] = source
        parts.append(part.reset_index(drop=True))

    frame = TabularDataset.concat_frames(parts, categorical)
    frame = frame.sort_values([SOURCE_ROW_ID, ORIGIN_LABEL], kind="mergesort").reset_index(drop=True)
    frame.index.name = ROW_ID

    schema = FeatureSchema(
        columns=list(features) + [ColumnSpec(name=ORIGIN_LABEL, kind="numeric", missing_allowed=False)],
        label_column=ORIGIN_LABEL,
    )
    combined = TabularDataset(schema, frame)
    logger.info(
        "Adversarial dataset: %d rows (%d train, %d test)", combined.n_rows, train.n_rows, test.n_rows
    )
    return combined


@dataclass(frozen=True)
class AdversarialReport:
    per_row: pd.Series               # train row_id -> out-of-fold P(test)
    test_scores: pd.Series           # test row_id -> out-of-fold P(test)
    fold_assignment: pd.Series       # train row_id -> held-out fold
    adv_auc: float
    threshold: float
    verdict: Verdict
    k: int
    seed: int
    fold_aucs: List[float] = field(default_factory=list)

    def scores_for(self, row_ids) -> np.ndarray:
        return self.per_row.reindex(np.asarray(row_ids, dtype=np.int64)).to_numpy(dtype=np.float64)


def early_stopping_split(
    labels: np.ndarray, train_ids: np.ndarray, seed: int
) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    Carve a stratified slice out of a fold's training rows for early stopping.

    None when either side would hold a single source; the fold then trains for
    the full round budget.
    """
    if train_ids.size < 2 * EARLY_STOPPING_FOLDS:
        return None
    fit_ids, stop_ids = stratified_folds(train_ids, labels[train_ids], EARLY_STOPPING_FOLDS, seed)[0]
    if np.unique(labels[fit_ids]).size < 2 or np.unique(labels[stop_ids]).size < 2:
        return None
    return fit_ids, stop_ids


def _fit_fold(
    fold: int,
    combined: TabularDataset,
    train_ids: np.ndarray,
    valid_ids: np.ndarray,
    params: BoostParams,
    seed: int,
) -> Tuple[int, np.ndarray, np.ndarray, int]:
    fold_valid = combined.take(valid_ids)
    if np.unique(fold_valid.labels).size < 2:
        raise FoldError("held-out rows come from a single source", fold)
    # the held-out rows never steer early stopping
    inner = early_stopping_split(combined.labels, train_ids, seed + fold)
    try:
        if inner is None:
            model = fit(combined.take(train_ids), None, params)
        else:
            fit_ids, stop_ids = inner
            model = fit(combined.take(fit_ids), combined.take(stop_ids), params)
    except DegenerateLabelError as e:
        raise FoldError(str(e), fold) from e
    return fold, valid_ids, predict_score(model, fold_valid), model.best_iteration


def adversarial_validate(
    train: TabularDataset,
    test: TabularDataset,
    params: Optional[BoostParams] = None,
    k: int = 5,
    seed: Optional[int] = None,
    threshold: Optional[float] = None,
    n_jobs: Optional[int] = None,
) -> AdversarialReport:
    """
    Stratified k-fold origin classification; every row is scored by the fold
    model that did not see it. Each fold model early-stops on a stratified fifth
    of its own training rows, so held-out rows play no part in choosing it.
    """
    if train.n_rows == 0 or test.n_rows == 0:
        raise EmptyInputError("Adversarial validation needs nonempty train and test sets")
    params = params or BoostParams()
    seed = params.seed if seed is None else seed
    threshold = get_settings().verdict_threshold if threshold is None else threshold
    n_jobs = get_settings().n_jobs if n_jobs is None else n_jobs

    combined = build_adversarial_dataset(train, test)
    labels = combined.labels
    folds = stratified_folds(combined.row_ids, labels, k, seed)

    results = Parallel(n_jobs=n_jobs)(
        delayed(_fit_fold)(fold, combined, train_ids, valid_ids, params, seed)
        for fold, (train_ids, valid_ids) in enumerate(folds)
    )

    oof = np.empty(combined.n_rows, dtype=np.float64)
    fold_of = np.empty(combined.n_rows, dtype=np.int64)
    fold_aucs = []
    for fold, valid_ids, scores, best_iteration in sorted(results, key=lambda r: r[0]):
        oof[valid_ids] = scores
        fold_of[valid_ids] = fold
        fold_aucs.append(auc(labels[valid_ids], scores))
        logger.info("Adversarial fold %d: best_iteration=%d, AUC=%.4f", fold, best_iteration, fold_aucs[-1])

    adv_auc = auc(labels, oof)
    decision = verdict(adv_auc, threshold)
    logger.info("Adversarial AUC %.4f (threshold %.2f): %s", adv_auc, threshold, decision)

    frame = combined.frame
    is_train = frame[SOURCE].to_numpy() == "train"
    source_ids = frame[SOURCE_ROW_ID].to_numpy(dtype=np.int64)
    per_row = pd.Series(oof[is_train], index=pd.Index(source_ids[is_train], name=ROW_ID)).sort_index()
    test_scores = pd.Series(oof[~is_train], index=pd.Index(source_ids[~is_train], name=ROW_ID)).sort_index()
    assignment = pd.Series(fold_of[is_train], index=pd.Index(source_ids[is_train], name=ROW_ID)).sort_index()

    return AdversarialReport(
        per_row=per_row,
        test_scores=test_scores,
        fold_assignment=assignment,
        adv_auc=adv_auc,
        threshold=threshold,
        verdict=decision,
        k=k,
        seed=seed,
        fold_aucs=fold_aucs,
    )


# ---- persistence -------------------------------------------------------------


class ReportSummary(BaseModel):
    """The JSON half of a saved report; per-row scores live in the CSV sidecar."""

    adv_auc: float
    threshold: float
    verdict: Verdict
    k: int
    seed: int
    fold_aucs: List[float] = Field(default_factory=list)
    n_train: int
    n_test: int
    scores_csv: str


def _scores_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}.scores.csv")


def save_report(report: AdversarialReport, path: Union[str, Path]) -> Path:
    """Write ``<path>`` (JSON summary) and ``<stem>.scores.csv`` (row_id, source, p_test, fold)."""
    path = Path(path)
    sidecar = _scores_path(path)
    summary = ReportSummary(
        adv_auc=report.adv_auc,
        threshold=report.threshold,
        verdict=report.verdict,
        k=report.k,
        seed=report.seed,
        fold_aucs=report.fold_aucs,
        n_train=len(report.per_row),
        n_test=len(report.test_scores),
        scores_csv=sidecar.name,
    )
    scores = pd.concat(
        [
            pd.DataFrame({"source": "train", "p_test": report.per_row, "fold": report.fold_assignment}),
            pd.DataFrame({"source": "test", "p_test": report.test_scores, "fold": -1}),
        ]
    )
    scores.index.name = ROW_ID
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(summary.model_dump_json(indent=2), encoding="utf-8")
        scores.to_csv(sidecar, float_format="%.17g")
    except OSError as e:
        raise OutputError(f"Cannot write adversarial report to {path}: {e}") from e
    logger.info("Saved adversarial report to %s", path)
    return path


def load_report(path: Union[str, Path]) -> AdversarialReport:
    path = Path(path)
    summary = ReportSummary.model_validate_json(path.read_text(encoding="utf-8"))
    scores = pd.read_csv(path.with_name(summary.scores_csv), index_col=ROW_ID, float_precision="round_trip")
    train_rows = scores[scores["source"] == "train"]
    test_rows = scores[scores["source"] == "test"]
    return AdversarialReport(
        per_row=train_rows["p_test"].astype(np.float64).sort_index(),
        test_scores=test_rows["p_test"].astype(np.float64).sort_index(),
        fold_assignment=train_rows["fold"].astype(np.int64).sort_index(),
        adv_auc=summary.adv_auc,
        threshold=summary.threshold,
        verdict=summary.verdict,
        k=summary.k,
        seed=summary.seed,
        fold_aucs=summary.fold_aucs,
    )
