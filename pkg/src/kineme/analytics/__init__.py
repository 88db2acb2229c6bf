"""Metrics, labels, decision fusion, explanations and the PCA baseline."""
from .baseline import PCARegression, pca_linreg
from .explain import ExplainReport, ExplainRow, percentile_explain
from .fusion import ALPHA_GRID, DecisionFusion, FusionResult, fuse_decisions
from .labels import TraitLabels, aggregate_video, binarize_median
from .metrics import MetricsReport, eval_metrics, f1_score, pearson

__all__ = [
    "PCARegression", "pca_linreg", "ExplainReport", "ExplainRow", "percentile_explain",
    "ALPHA_GRID", "DecisionFusion", "FusionResult", "fuse_decisions",
    "TraitLabels", "aggregate_video", "binarize_median",
    "MetricsReport", "eval_metrics", "f1_score", "pearson",
]
