"""
Executes a TrainingPlan: one model per fold, test scored by the fold ensemble.
"""
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel

from src.config import get_settings
from src.dataset.table import TabularDataset
from src.errors import DegenerateLabelError, FoldError, OutputError, SchemaError
from src.gbdt import BoostedModel, BoostParams, fit, predict_score
from src.metrics import auc, ks_statistic, psi_from_scores
from src.strategies.plans import PlanFold, TrainingPlan

logger = logging.getLogger(__name__)


class StrategyOutcome(BaseModel):
    per_fold_valid_auc: List[float]
    per_fold_best_iteration: List[int]
    mean_valid_auc: float
    test_auc: float
    test_ks: float
    valid_test_psi: float
    models: List[BoostedModel]
    plan: TrainingPlan

    def summary(self) -> dict:
        """Everything except the fitted models."""
        return self.model_dump(exclude={"models"})


def ensemble_predict(models: Sequence[BoostedModel], ds: TabularDataset) -> np.ndarray:
    """Arithmetic mean of the models' probabilities."""
    return np.mean([predict_score(model, ds) for model in models], axis=0)


def _run_fold(index: int, fold: PlanFold, plan: TrainingPlan, train: TabularDataset, params: BoostParams):
    fold_train = train.take(fold.train_rows)
    fold_valid = train.take(fold.valid_rows)
    if np.unique(fold_valid.labels).size < 2:
        raise FoldError("validation labels hold a single class", index)
    weights = None
    if plan.weights is not None:
        weights = np.array([plan.weights[r] for r in fold.train_rows], dtype=np.float64)
    try:
        model = fit(fold_train, fold_valid, params, weights=weights)
    except DegenerateLabelError as e:
        raise FoldError(str(e), index) from e
    valid_scores = predict_score(model, fold_valid)
    return index, model, valid_scores, auc(fold_valid.labels, valid_scores)


def execute_plan(
    plan: TrainingPlan,
    train: TabularDataset,
    test: TabularDataset,
    params: Optional[BoostParams] = None,
    n_jobs: Optional[int] = None,
) -> StrategyOutcome:
    """
    Fit every fold with early stopping on its validation rows, then score the
    test set with the mean of the fold models. Validation AUC is unweighted.
    """
    params = params or BoostParams()
    n_jobs = get_settings().n_jobs if n_jobs is None else n_jobs
    test_labels = test.labels
    if test_labels is None:
        raise SchemaError(f"Test label column '{test.schema.label_column}' is not encoded as 0/1")

    results = Parallel(n_jobs=n_jobs)(
        delayed(_run_fold)(i, fold, plan, train, params) for i, fold in enumerate(plan.folds)
    )
    results = sorted(results, key=lambda r: r[0])
    models = [model for _, model, _, _ in results]
    valid_aucs = [float(score) for _, _, _, score in results]
    for i, model, _, score in results:
        logger.info("Fold %d: best_iteration=%d, valid AUC=%.4f", i, model.best_iteration, score)

    test_scores = ensemble_predict(models, test)
    pooled_valid = np.concatenate([scores for _, _, scores, _ in results])
    outcome = StrategyOutcome(
        per_fold_valid_auc=valid_aucs,
        per_fold_best_iteration=[model.best_iteration for model in models],
        mean_valid_auc=float(np.mean(valid_aucs)),
        test_auc=auc(test_labels, test_scores),
        test_ks=ks_statistic(test_labels, test_scores),
        valid_test_psi=psi_from_scores(pooled_valid, test_scores),
        models=models,
        plan=plan,
    )
    logger.info(
        "%s [%s]: mean valid AUC %.4f, test AUC %.4f",
        plan.strategy_tag, plan.param_tag, outcome.mean_valid_auc, outcome.test_auc,
    )
    return outcome


def save_outcome(outcome: StrategyOutcome, path: Union[str, Path], include_models: bool = False) -> Path:
    path = Path(path)
    exclude = None if include_models else {"models"}
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(outcome.model_dump_json(indent=2, exclude=exclude), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write outcome to {path}: {e}") from e
    return path
