"""Experiment harness: metrics, cross-validated link prediction, pair analysis."""
from .analysis import (PairRecord, PairTable, band_spearman, local_scaling_kernel,
                       pair_analysis)
from .linkpred import (ALPHA_GRID, FoldSplit, LinkPredictionReport, kfold_edge_split,
                       run_link_prediction, select_params)
from .metrics import ari, aupr, auc, nmi, retrieval_accuracy
from .synthetic import gnm_graph, planted_partition

__all__ = [
    "ALPHA_GRID", "FoldSplit", "LinkPredictionReport", "PairRecord", "PairTable",
    "ari", "aupr", "auc", "band_spearman", "gnm_graph", "kfold_edge_split",
    "local_scaling_kernel", "nmi", "pair_analysis", "planted_partition",
    "retrieval_accuracy", "run_link_prediction", "select_params",
]
