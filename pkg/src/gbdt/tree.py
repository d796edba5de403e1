"""
Decision tree representation and routing.
"""
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field


class TreeNode(BaseModel):
    """
    A split node or a leaf.

    Numeric splits send ``x <= threshold`` left; categorical splits send codes in
    ``categories`` left. Missing values (and unseen categories) follow ``missing_left``.
    Leaf values already include the learning rate.
    """

    feature: Optional[int] = None
    threshold: Optional[float] = None
    categories: Optional[List[int]] = None
    missing_left: bool = False
    left: Optional[int] = None
    right: Optional[int] = None
    value: float = 0.0
    gain: float = 0.0
    n_rows: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def goes_left(self, column: np.ndarray) -> np.ndarray:
        missing = np.isnan(column)
        if self.categories is not None:
            left = np.isin(column, np.asarray(self.categories, dtype=np.float64))
        else:
            with np.errstate(invalid="ignore"):
                left = column <= self.threshold
        return np.where(missing, self.missing_left, left)


class Tree(BaseModel):
    """Nodes in creation order; the root is node 0."""

    nodes: List[TreeNode] = Field(default_factory=list)

    @property
    def n_leaves(self) -> int:
        return sum(node.is_leaf for node in self.nodes)

    def depth(self) -> int:
        def walk(index: int) -> int:
            node = self.nodes[index]
            if node.is_leaf:
                return 0
            return 1 + max(walk(node.left), walk(node.right))

        return walk(0) if self.nodes else 0

    def predict(self, matrix: np.ndarray) -> np.ndarray:
        """Leaf value per row."""
        out = np.zeros(matrix.shape[0], dtype=np.float64)
        stack = [(0, np.arange(matrix.shape[0]))]
        while stack:
            index, rows = stack.pop()
            node = self.nodes[index]
            if node.is_leaf:
                out[rows] = node.value
                continue
            if rows.size == 0:
                continue
            left = node.goes_left(matrix[rows, node.feature])
            stack.append((node.left, rows[left]))
            stack.append((node.right, rows[~left]))
        return out
