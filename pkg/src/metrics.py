"""
Ranking and stability metrics: AUC, KS statistic, Population Stability Index.
"""
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import rankdata

from src.errors import ContractError, DegenerateLabelError

PSI_FLOOR = 1e-6


class ScoredSample(BaseModel):
    """One scored observation."""

    label: int = Field(ge=0, le=1)
    score: float
    weight: float = Field(default=1.0, ge=0.0)


def samples_to_arrays(samples: Sequence[ScoredSample]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    labels = np.array([s.label for s in samples], dtype=np.int8)
    scores = np.array([s.score for s in samples], dtype=np.float64)
    weights = np.array([s.weight for s in samples], dtype=np.float64)
    return labels, scores, weights


def _check_inputs(labels, scores, weights) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise ContractError("labels and scores must have the same length")
    if not np.isfinite(scores).all():
        raise ContractError("scores must be finite")
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != labels.shape:
            raise ContractError("weights must align with labels")
        if (weights < 0).any():
            raise ContractError("weights must be nonnegative")
    positive = labels == 1
    pos_mass = positive.sum() if weights is None else weights[positive].sum()
    neg_mass = (~positive).sum() if weights is None else weights[~positive].sum()
    if pos_mass == 0 or neg_mass == 0:
        raise DegenerateLabelError("Both classes must be present")
    return labels.astype(np.int8), scores, weights


def auc(labels, scores, weights=None) -> float:
    """
    Probability that a random positive outranks a random negative, ties counted 1/2.

    Unweighted: Mann-Whitney U from midranks. Weighted: each positive-negative
    pair counts with the product of the two weights.
    """
    labels, scores, weights = _check_inputs(labels, scores, weights)
    positive = labels == 1

    if weights is None:
        n_pos = int(positive.sum())
        n_neg = labels.size - n_pos
        ranks = rankdata(scores, method="average")
        u_statistic = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
        return float(u_statistic / (n_pos * n_neg))

    # group tied scores; negatives strictly below win, ties count half
    _, group = np.unique(scores, return_inverse=True)
    pos_w = np.bincount(group, weights=weights * positive)
    neg_w = np.bincount(group, weights=weights * ~positive)
    neg_below = np.cumsum(neg_w) - neg_w
    wins = np.sum(pos_w * (neg_below + 0.5 * neg_w))
    return float(wins / (pos_w.sum() * neg_w.sum()))


def auc_of_samples(samples: Sequence[ScoredSample]) -> float:
    labels, scores, weights = samples_to_arrays(samples)
    return auc(labels, scores, None if np.all(weights == 1.0) else weights)


def ks_statistic(labels, scores, weights=None) -> float:
    """Largest gap between the empirical score CDFs of positives and negatives."""
    labels, scores, weights = _check_inputs(labels, scores, weights)
    if weights is None:
        weights = np.ones_like(scores)
    positive = labels == 1

    _, group = np.unique(scores, return_inverse=True)
    pos_cdf = np.cumsum(np.bincount(group, weights=weights * positive))
    neg_cdf = np.cumsum(np.bincount(group, weights=weights * ~positive))
    return float(np.max(np.abs(pos_cdf / pos_cdf[-1] - neg_cdf / neg_cdf[-1])))


def ks_of_samples(samples: Sequence[ScoredSample]) -> float:
    labels, scores, weights = samples_to_arrays(samples)
    return ks_statistic(labels, scores, None if np.all(weights == 1.0) else weights)


def psi(expected, actual) -> float:
    """
    Population Stability Index, sum over bins of (a - e) * ln(a / e).

    Both inputs are histograms of fractions over the same bins. Bins are floored at
    1e-6 before the log so empty bins give a finite value. Each term keeps its sign
    when the arguments are swapped, so the value is symmetric in them.
    """
    expected = np.asarray(expected, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if expected.shape != actual.shape or expected.ndim != 1:
        raise ContractError(f"Bin count mismatch: {expected.shape} vs {actual.shape}")
    for name, hist in (("expected", expected), ("actual", actual)):
        if (hist < 0).any() or not np.isclose(hist.sum(), 1.0, atol=1e-6):
            raise ContractError(f"{name} fractions must be nonnegative and sum to 1")
    e = np.maximum(expected, PSI_FLOOR)
    a = np.maximum(actual, PSI_FLOOR)
    return float(np.sum((a - e) * np.log(a / e)))


def psi_from_scores(expected_scores, actual_scores, n_bins: int = 10) -> float:
    """PSI over equal-frequency bins cut on the expected sample."""
    expected_scores = np.asarray(expected_scores, dtype=np.float64)
    actual_scores = np.asarray(actual_scores, dtype=np.float64)
    if expected_scores.size == 0 or actual_scores.size == 0:
        raise ContractError("Both score samples must be nonempty")
    if n_bins < 1:
        raise ContractError("n_bins must be positive")

    inner_edges = np.unique(np.quantile(expected_scores, np.linspace(0, 1, n_bins + 1)[1:-1]))
    expected_bins = np.searchsorted(inner_edges, expected_scores, side="right")
    actual_bins = np.searchsorted(inner_edges, actual_scores, side="right")
    size = inner_edges.size + 1
    e = np.bincount(expected_bins, minlength=size) / expected_scores.size
    a = np.bincount(actual_bins, minlength=size) / actual_scores.size
    return psi(e, a)
