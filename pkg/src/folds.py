"""
Stratified k-fold assignment keyed on row_ids.

Rows are put in ascending row_id order before shuffling, so the assignment
depends only on (row_ids, labels, k, seed) and never on the input row order.
When every class is smaller than k the split falls back to a seeded,
unstratified KFold.
"""
import logging
from typing import List, Tuple

import numpy as np
from sklearn.model_selection import KFold, StratifiedKFold

from src.errors import ContractError

logger = logging.getLogger(__name__)


def stratified_folds(row_ids, labels, k: int, seed: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(train_row_ids, valid_row_ids) per fold, each sorted ascending."""
    row_ids = np.asarray(row_ids, dtype=np.int64)
    labels = np.asarray(labels)
    n = row_ids.size
    if k < 2:
        raise ContractError(f"k must be at least 2, got {k}")
    if k > n:
        raise ContractError(f"k={k} exceeds the {n} available rows")

    order = np.argsort(row_ids, kind="stable")
    ids, y = row_ids[order], labels[order]
    _, class_counts = np.unique(y, return_counts=True)
    if class_counts.max() < k:
        # no class can fill k folds
        logger.debug("Class counts %s below k=%d, using plain KFold", class_counts.tolist(), k)
        splitter = KFold(n_splits=k, shuffle=True, random_state=seed)
    else:
        splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return [(ids[train_idx], ids[valid_idx]) for train_idx, valid_idx in splitter.split(ids.reshape(-1, 1), y)]


def fold_assignment(row_ids, labels, k: int, seed: int) -> dict:
    """row_id -> index of the fold that holds it out."""
    assignment = {}
    for fold, (_, valid_ids) in enumerate(stratified_folds(row_ids, labels, k, seed)):
        for row_id in valid_ids:
            assignment[int(row_id)] = fold
    return assignment
