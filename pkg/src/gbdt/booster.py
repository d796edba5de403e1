"""
Gradient-boosted trees for binary classification with logistic loss.

``fit`` grows trees on weighted gradients g = (p - y) * w and hessians
h = p * (1 - p) * w, with optional row bagging, per-tree column sampling and
early stopping on validation AUC. Models are plain pydantic objects: immutable
after fit and serializable to JSON.

JSON layout::

    {
      "feature_names": ["x0", "grade", ...],
      "feature_kinds": ["numeric", "categorical", ...],
      "categories": {"grade": ["A", "B", ...]},
      "base_score": -1.0986,
      "best_iteration": 37,
      "trees": [{"nodes": [{"feature": 0, "threshold": 0.5, "missing_left": false,
                            "left": 1, "right": 2, "gain": 3.2, ...}, ...]}, ...],
      "params": {...},
      "valid_auc_history": [0.61, 0.63, ...]
    }
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit

from src.dataset.table import TabularDataset
from src.errors import ContractError, DegenerateLabelError, OutputError, SchemaError
from src.gbdt.binning import FeatureSpace, bin_matrix
from src.gbdt.grower import TreeGrower
from src.gbdt.params import BoostParams
from src.gbdt.tree import Tree
from src.metrics import auc

logger = logging.getLogger(__name__)

PROBABILITY_EPS = 1e-15


class BoostedModel(BaseModel):
    """A fitted ensemble. Prediction uses ``trees[:best_iteration]``."""

    model_config = ConfigDict(frozen=True)

    feature_names: List[str]
    feature_kinds: List[str]
    categories: Dict[str, List[str]] = Field(default_factory=dict)
    base_score: float
    best_iteration: int = Field(ge=0)
    trees: List[Tree] = Field(default_factory=list)
    params: BoostParams = Field(default_factory=BoostParams)
    valid_auc_history: List[float] = Field(default_factory=list)

    @property
    def feature_space(self) -> FeatureSpace:
        return FeatureSpace(self.feature_names, self.feature_kinds, self.categories)

    @property
    def active_trees(self) -> List[Tree]:
        return self.trees[: self.best_iteration]

    def raw_score(self, matrix: np.ndarray) -> np.ndarray:
        raw = np.full(matrix.shape[0], self.base_score, dtype=np.float64)
        for tree in self.active_trees:
            raw += tree.predict(matrix)
        return raw


def _to_probability(raw: np.ndarray) -> np.ndarray:
    return np.clip(expit(raw), PROBABILITY_EPS, 1.0 - PROBABILITY_EPS)


def _check_weights(weights, n_rows: int) -> np.ndarray:
    if weights is None:
        return np.ones(n_rows, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (n_rows,):
        raise ContractError(f"Got {weights.size} weights for {n_rows} training rows")
    if not np.isfinite(weights).all() or (weights < 0).any():
        raise ContractError("Weights must be finite and nonnegative")
    if weights.sum() == 0:
        raise ContractError("Weights are all zero")
    return weights


def _require_labels(ds: TabularDataset, role: str) -> np.ndarray:
    labels = ds.labels
    if labels is None:
        raise SchemaError(f"{role} label column '{ds.schema.label_column}' is not encoded as 0/1")
    return labels


def fit(
    train: TabularDataset,
    valid: Optional[TabularDataset] = None,
    params: Optional[BoostParams] = None,
    weights=None,
) -> BoostedModel:
    """
    Fit a boosted model on ``train``.

    With ``valid``, training stops once validation AUC has not improved for
    ``early_stopping_rounds`` rounds; ``best_iteration`` marks the best round.
    Without it, every round is kept.
    """
    params = params or BoostParams()
    y = _require_labels(train, "Training").astype(np.float64)
    w = _check_weights(weights, train.n_rows)

    positive_mass = float(w[y == 1].sum())
    negative_mass = float(w[y == 0].sum())
    if positive_mass == 0 or negative_mass == 0:
        raise DegenerateLabelError("Training labels (with weights) hold a single class")
    base_rate = positive_mass / (positive_mass + negative_mass)
    base_score = float(np.log(base_rate / (1.0 - base_rate)))

    space = FeatureSpace.from_dataset(train, params.max_bins)
    matrix = space.encode(train)
    binned = bin_matrix(matrix, space, params.max_bins)
    n_rows, n_features = matrix.shape

    valid_matrix = valid_labels = valid_raw = None
    if valid is not None:
        valid_labels = _require_labels(valid, "Validation")
        if np.unique(valid_labels).size < 2:
            raise DegenerateLabelError("Validation labels hold a single class")
        valid_matrix = space.encode(valid)
        valid_raw = np.full(valid.n_rows, base_score)

    rng = np.random.default_rng(params.seed)
    n_columns = max(1, int(round(params.colsample_bytree * n_features))) if n_features else 0
    bag = np.arange(n_rows)
    raw = np.full(n_rows, base_score)
    trees: List[Tree] = []
    history: List[float] = []
    best_auc, best_iteration = -np.inf, 0

    for iteration in range(params.num_boost_round):
        if params.bagging_enabled and iteration % params.subsample_freq == 0:
            bag_size = max(1, int(round(params.subsample * n_rows)))
            bag = np.sort(rng.choice(n_rows, size=bag_size, replace=False))
        if n_columns < n_features:
            features = np.sort(rng.choice(n_features, size=n_columns, replace=False))
        else:
            features = np.arange(n_features)

        p = expit(raw)
        gradients = (p - y) * w
        hessians = p * (1.0 - p) * w
        tree = TreeGrower(binned, gradients, hessians, bag, features, params).grow()
        trees.append(tree)
        raw += tree.predict(matrix)

        if valid is not None:
            valid_raw += tree.predict(valid_matrix)
            score = auc(valid_labels, valid_raw)
            history.append(score)
            if score > best_auc:
                best_auc, best_iteration = score, iteration + 1
            elif iteration + 1 - best_iteration >= params.early_stopping_rounds:
                logger.debug("Early stopping at round %d, best round %d", iteration + 1, best_iteration)
                break

        if params.verbose_every and (iteration + 1) % params.verbose_every == 0:
            if valid is not None:
                logger.debug("Round %d: valid AUC %.5f (best %.5f)", iteration + 1, history[-1], best_auc)
            else:
                logger.debug("Round %d", iteration + 1)

    if valid is None:
        best_iteration = len(trees)

    logger.info(
        "Fitted %d trees on %d rows x %d features (best_iteration=%d)",
        len(trees), n_rows, n_features, best_iteration,
    )
    return BoostedModel(
        feature_names=space.names,
        feature_kinds=space.kinds,
        categories=space.categories,
        base_score=base_score,
        best_iteration=best_iteration,
        trees=trees,
        params=params,
        valid_auc_history=history,
    )


def predict_score(model: BoostedModel, ds: TabularDataset) -> np.ndarray:
    """Probability of the positive class per row of ``ds``, in row order."""
    matrix = model.feature_space.encode(ds)
    return _to_probability(model.raw_score(matrix))


def feature_importance(model: BoostedModel) -> Dict[str, float]:
    """Total split gain per feature over the trees used for prediction."""
    importance = {name: 0.0 for name in model.feature_names}
    for tree in model.active_trees:
        for node in tree.nodes:
            if not node.is_leaf:
                importance[model.feature_names[node.feature]] += node.gain
    return importance


def save_model(model: BoostedModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(model.model_dump_json(indent=2), encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write model to {path}: {e}") from e
    return path


def load_model(path: Union[str, Path]) -> BoostedModel:
    return BoostedModel.model_validate_json(Path(path).read_text(encoding="utf-8"))
