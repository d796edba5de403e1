"""
TreeGrower builds one regression tree fitting a Newton step on the gradients
and hessians of the training rows.

Splits are evaluated on gradient/hessian histograms and chosen best-first
(highest gain leaf is split next) until ``num_leaves`` or ``max_depth`` stops
growth. Split gain is G_L^2/(H_L+l2) + G_R^2/(H_R+l2) - G^2/(H+l2).
"""
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import List, Optional

import numpy as np

from src.gbdt.binning import BinnedMatrix
from src.gbdt.params import BoostParams
from src.gbdt.tree import Tree, TreeNode

# categorical features with more present categories fall back to one-vs-rest
MAX_SORTED_CATEGORIES = 32


@dataclass
class SplitInfo:
    gain: float
    feature: int                         # index into the full feature list
    bin_threshold: Optional[int]         # numeric: bins <= bin_threshold go left
    categories: Optional[np.ndarray]     # categorical: these codes go left
    missing_left: bool


class _GrowingNode:
    def __init__(self, rows: np.ndarray, depth: int, histogram: np.ndarray):
        self.rows = rows
        self.depth = depth
        self.histogram = histogram       # (3, n_allowed, stride): gradients, hessians, counts
        self.split: Optional[SplitInfo] = None
        self.left: Optional[int] = None
        self.right: Optional[int] = None


def _score(g: np.ndarray, h: np.ndarray, l2: float) -> np.ndarray:
    denominator = h + l2
    return np.divide(g * g, denominator, out=np.zeros(np.broadcast(g, denominator).shape), where=denominator > 0)


class TreeGrower:
    """Grows a single tree on ``rows`` restricted to ``features`` (sorted, ascending)."""

    def __init__(
        self,
        binned: BinnedMatrix,
        gradients: np.ndarray,
        hessians: np.ndarray,
        rows: np.ndarray,
        features: np.ndarray,
        params: BoostParams,
    ):
        self.binned = binned
        self.gradients = gradients
        self.hessians = hessians
        self.rows = rows
        self.features = np.asarray(features, dtype=np.int64)
        self.params = params
        self._codes = binned.codes[:, self.features].astype(np.int64)
        self._offsets = np.arange(self.features.size, dtype=np.int64) * binned.stride
        self._n_bins = binned.n_bins[self.features]
        self._is_categorical = binned.is_categorical[self.features]

    # ---- histograms ----------------------------------------------------------

    def _histogram(self, rows: np.ndarray) -> np.ndarray:
        n_features = self.features.size
        size = n_features * self.binned.stride
        flat = (self._codes[rows] + self._offsets).ravel()
        g = np.bincount(flat, weights=np.repeat(self.gradients[rows], n_features), minlength=size)
        h = np.bincount(flat, weights=np.repeat(self.hessians[rows], n_features), minlength=size)
        c = np.bincount(flat, minlength=size).astype(np.float64)
        return np.stack([g, h, c]).reshape(3, n_features, self.binned.stride)

    # ---- split finding -------------------------------------------------------

    def _find_split(self, node: _GrowingNode) -> Optional[SplitInfo]:
        params = self.params
        if node.depth >= params.max_depth or node.rows.size < 2 * params.min_data_in_leaf:
            return None

        hist = node.histogram
        missing = self.binned.missing_bin
        totals = hist.sum(axis=2)                 # (3, n_features)
        parent = _score(totals[0], totals[1], params.l2_reg)

        gains = np.full(self.features.size, -np.inf)
        candidates: List[Optional[SplitInfo]] = [None] * self.features.size

        numeric = np.flatnonzero(~self._is_categorical)
        if numeric.size:
            self._numeric_splits(hist[:, numeric], totals[:, numeric], parent[numeric], numeric, gains, candidates)
        for j in np.flatnonzero(self._is_categorical):
            candidate = self._categorical_split(hist[:, j], totals[:, j], parent[j], j, missing)
            if candidate is not None:
                gains[j] = candidate.gain
                candidates[j] = candidate

        best = int(np.argmax(gains))
        if not np.isfinite(gains[best]) or gains[best] <= 0.0:
            return None
        return candidates[best]

    def _valid(self, left_h, left_c, right_h, right_c) -> np.ndarray:
        params = self.params
        return (
            (left_c >= params.min_data_in_leaf)
            & (right_c >= params.min_data_in_leaf)
            & (left_h >= params.min_sum_hessian_in_leaf)
            & (right_h >= params.min_sum_hessian_in_leaf)
        )

    def _variant_gain(self, left_g, left_h, left_c, total, parent, allowed) -> np.ndarray:
        right_g, right_h, right_c = total[0] - left_g, total[1] - left_h, total[2] - left_c
        ok = allowed & self._valid(left_h, left_c, right_h, right_c)
        l2 = self.params.l2_reg
        gain = _score(left_g, left_h, l2) + _score(right_g, right_h, l2) - parent
        return np.where(ok, gain, -np.inf)

    def _numeric_splits(self, hist, totals, parent, local, gains, candidates) -> None:
        missing = self.binned.missing_bin
        left = np.cumsum(hist[:, :, :missing], axis=2)          # bins <= k
        miss = hist[:, :, missing][:, :, None]
        total = totals[:, :, None]
        allowed = np.arange(missing)[None, :] < (self._n_bins[local] - 1)[:, None]
        parent = parent[:, None]

        gain_right = self._variant_gain(left[0], left[1], left[2], total, parent, allowed)
        gain_left = self._variant_gain(left[0] + miss[0], left[1] + miss[1], left[2] + miss[2], total, parent, allowed)
        missing_left = gain_left > gain_right
        gain = np.where(missing_left, gain_left, gain_right)

        best_k = np.argmax(gain, axis=1)
        for i, j in enumerate(local):
            k = int(best_k[i])
            if np.isfinite(gain[i, k]):
                gains[j] = gain[i, k]
                candidates[j] = SplitInfo(
                    gain=float(gain[i, k]),
                    feature=int(self.features[j]),
                    bin_threshold=k,
                    categories=None,
                    missing_left=bool(missing_left[i, k]),
                )

    def _categorical_split(self, hist, totals, parent, j, missing) -> Optional[SplitInfo]:
        n_categories = int(self._n_bins[j])
        g, h, c = hist[0, :n_categories], hist[1, :n_categories], hist[2, :n_categories]
        present = np.flatnonzero(c > 0)
        if present.size < 2:
            return None

        if present.size <= MAX_SORTED_CATEGORIES:
            ratio = np.divide(g[present], h[present], out=np.zeros(present.size), where=h[present] > 0)
            order = present[np.argsort(ratio, kind="stable")]
            left_g, left_h, left_c = (np.cumsum(a[order])[:-1] for a in (g, h, c))
            left_sets = [np.sort(order[: i + 1]) for i in range(order.size - 1)]
        else:
            left_g, left_h, left_c = g[present], h[present], c[present]
            left_sets = [present[i : i + 1] for i in range(present.size)]

        allowed = np.ones(left_g.size, dtype=bool)
        miss = hist[:, missing]
        gain_right = self._variant_gain(left_g, left_h, left_c, totals, parent, allowed)
        gain_left = self._variant_gain(left_g + miss[0], left_h + miss[1], left_c + miss[2], totals, parent, allowed)
        missing_left = gain_left > gain_right
        gain = np.where(missing_left, gain_left, gain_right)

        best = int(np.argmax(gain))
        if not np.isfinite(gain[best]):
            return None
        return SplitInfo(
            gain=float(gain[best]),
            feature=int(self.features[j]),
            bin_threshold=None,
            categories=left_sets[best],
            missing_left=bool(missing_left[best]),
        )

    # ---- growth --------------------------------------------------------------

    def _goes_left(self, node: _GrowingNode) -> np.ndarray:
        split = node.split
        column = self.binned.codes[node.rows, split.feature].astype(np.int64)
        is_missing = column == self.binned.missing_bin
        if split.categories is not None:
            left = np.isin(column, split.categories)
        else:
            left = column <= split.bin_threshold
        return np.where(is_missing, split.missing_left, left)

    def _leaf_value(self, rows: np.ndarray) -> float:
        g = float(self.gradients[rows].sum())
        h = float(self.hessians[rows].sum())
        denominator = h + self.params.l2_reg
        if denominator <= 0.0:
            return 0.0
        return -self.params.learning_rate * g / denominator

    def grow(self) -> Tree:
        root = _GrowingNode(self.rows, 0, self._histogram(self.rows))
        root.split = self._find_split(root)
        nodes = [root]
        heap = []
        if root.split is not None:
            heappush(heap, (-root.split.gain, 0))
        n_leaves = 1

        while heap and n_leaves < self.params.num_leaves:
            _, index = heappop(heap)
            node = nodes[index]
            go_left = self._goes_left(node)
            left_rows, right_rows = node.rows[go_left], node.rows[~go_left]

            # build the smaller child's histogram, derive the other by subtraction
            if left_rows.size <= right_rows.size:
                left_hist = self._histogram(left_rows)
                right_hist = node.histogram - left_hist
            else:
                right_hist = self._histogram(right_rows)
                left_hist = node.histogram - right_hist

            for rows, hist in ((left_rows, left_hist), (right_rows, right_hist)):
                child = _GrowingNode(rows, node.depth + 1, hist)
                child.split = self._find_split(child)
                nodes.append(child)
                if child.split is not None:
                    heappush(heap, (-child.split.gain, len(nodes) - 1))
            node.left, node.right = len(nodes) - 2, len(nodes) - 1
            node.histogram = None
            n_leaves += 1

        return Tree(nodes=[self._finalize(node) for node in nodes])

    def _finalize(self, node: _GrowingNode) -> TreeNode:
        if node.left is None:
            return TreeNode(value=self._leaf_value(node.rows), n_rows=int(node.rows.size))
        split = node.split
        threshold = None
        if split.bin_threshold is not None:
            threshold = float(self.binned.thresholds[split.feature][split.bin_threshold])
        return TreeNode(
            feature=split.feature,
            threshold=threshold,
            categories=None if split.categories is None else [int(c) for c in split.categories],
            missing_left=split.missing_left,
            left=node.left,
            right=node.right,
            gain=split.gain,
            n_rows=int(node.rows.size),
        )
