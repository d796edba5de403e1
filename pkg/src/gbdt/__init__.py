# Histogram gradient-boosted trees (logistic loss)
from src.gbdt.booster import BoostedModel, feature_importance, fit, load_model, predict_score, save_model
from src.gbdt.params import BoostParams, load_params
from src.gbdt.tree import Tree, TreeNode

__all__ = [
    "BoostParams",
    "BoostedModel",
    "Tree",
    "TreeNode",
    "feature_importance",
    "fit",
    "load_model",
    "load_params",
    "predict_score",
    "save_model",
]
