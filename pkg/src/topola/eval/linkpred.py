"""Cross-validated link prediction for RWR, TRWR and CNRWR."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .._rng import component_rng, make_rng
from ..core import _lam, cn_matrix, lambda_grid, singular_transform
from ..diffusion import (RestartSolver, RwrParams, bipartite_block,
                         transition_matrix)
from ..netcore import as_array, is_symmetric
from ..spectral import full_svd
from .metrics import aupr, auc

ALPHA_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
LAMBDA_EXPONENTS = tuple(range(-3, 4))
METHODS = ("rwr", "trwr", "cnrwr")


@dataclass(frozen=True, eq=False)
class FoldSplit:
    fold_id: int
    train_edges: np.ndarray  # (e, 2) cell coordinates
    test_edges: np.ndarray
    seed: object = None


def _is_undirected(a, directed):
    if directed is None:
        return a.shape[0] == a.shape[1] and is_symmetric(a)
    return not directed


def positive_cells(A, directed=None) -> np.ndarray:
    """Cells holding positive edges: upper triangle when undirected, every cell otherwise.

    Self-pairs are never counted.
    """
    a = as_array(A)
    mask = a != 0
    if a.shape[0] == a.shape[1]:
        np.fill_diagonal(mask, False)
        if _is_undirected(a, directed):
            mask = np.triu(mask, k=1)
    return np.argwhere(mask)


def kfold_edge_split(A, k=10, seed=None, directed=None) -> list[FoldSplit]:
    """Uniform random partition of the positive cells into k balanced folds."""
    cells = positive_cells(A, directed)
    if k < 2:
        raise ValueError("need at least two folds")
    if len(cells) < k:
        raise ValueError(f"{len(cells)} positive edges cannot fill {k} folds")
    perm = make_rng(seed).permutation(len(cells))
    chunks = np.array_split(perm, k)
    folds = []
    for fid, test_idx in enumerate(chunks):
        train_mask = np.ones(len(cells), dtype=bool)
        train_mask[test_idx] = False
        folds.append(FoldSplit(fid, cells[train_mask], cells[np.sort(test_idx)], seed))
    return folds


def remove_edges(A, edges, undirected) -> np.ndarray:
    train = np.array(as_array(A), dtype=float, copy=True)
    if len(edges):
        train[edges[:, 0], edges[:, 1]] = 0.0
        if undirected:
            train[edges[:, 1], edges[:, 0]] = 0.0
    return train


def candidate_cells(train, undirected) -> np.ndarray:
    """Cells that can be ranked: absent from training, never self-pairs."""
    mask = train == 0
    if train.shape[0] == train.shape[1]:
        np.fill_diagonal(mask, False)
        if undirected:
            mask = np.triu(mask, k=1)
    return np.argwhere(mask)


def cell_scores(S, cells, undirected) -> np.ndarray:
    s = S[cells[:, 0], cells[:, 1]]
    if undirected:
        s = 0.5 * (s + S[cells[:, 1], cells[:, 0]])
    return s


def mask_training(S, train, undirected=None) -> np.ndarray:
    """Copy of ``S`` with training edges and self-pairs set to -inf."""
    S = np.array(S, dtype=float, copy=True)
    train = as_array(train)
    S[train != 0] = -np.inf
    if S.shape[0] == S.shape[1]:
        np.fill_diagonal(S, -np.inf)
    return S


class FoldScorer:
    """Scores one training matrix under varying (alpha, lambda), caching the expensive parts."""

    def __init__(self, train, method, normalization="column"):
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        self.train = train
        self.method = method
        self.bipartite = train.shape[0] != train.shape[1]
        walk = bipartite_block(train) if self.bipartite else train
        self.W = transition_matrix(walk, normalization)
        self._solvers = {}
        self._svd = full_svd(train) if method == "trwr" else None
        if method == "rwr":
            self._p0 = train
        elif method == "cnrwr":
            self._p0 = cn_matrix(train) @ train

    def initial_state(self, lam=None):
        if self.method == "trwr":
            svd = self._svd
            return (svd.U * singular_transform(svd.S, lam)) @ svd.Vt
        return self._p0

    def scores(self, alpha, lam=None) -> np.ndarray:
        solver = self._solvers.get(alpha)
        if solver is None:
            solver = self._solvers[alpha] = RestartSolver(self.W, alpha)
        P0 = self.initial_state(lam)
        if self.bipartite:
            n = self.train.shape[0]
            return solver.solve(bipartite_block(P0))[:n, n:]
        return solver.solve(P0)


def evaluate_scores(S, train, test_edges, undirected, neg_sample=None, rng=None):
    """(AUC, AUPR) of held-out edges against every absent non-self cell."""
    cells = candidate_cells(train, undirected)
    label_grid = np.zeros(train.shape, dtype=bool)
    label_grid[test_edges[:, 0], test_edges[:, 1]] = True
    if undirected:
        label_grid[test_edges[:, 1], test_edges[:, 0]] = True
    labels = label_grid[cells[:, 0], cells[:, 1]]
    if not labels.any():
        raise ValueError("fold has no test positives among the candidates")
    if neg_sample is not None and (~labels).sum() > neg_sample:
        neg = np.flatnonzero(~labels)
        keep = np.sort(np.concatenate([np.flatnonzero(labels),
                                       make_rng(rng).choice(neg, size=neg_sample, replace=False)]))
        cells, labels = cells[keep], labels[keep]
    s = cell_scores(S, cells, undirected)
    y = labels.astype(int)
    return auc(s, y), aupr(s, y)


def select_params(train, method, undirected, alpha_grid=ALPHA_GRID,
                  lambda_exponents=LAMBDA_EXPONENTS, normalization="column",
                  alpha=None, lam=None, seed=None, val_frac=0.1, metric="auc"):
    """Grid search over alpha (and lambda for TRWR) on an inner validation split.

    Fixed values passed as ``alpha`` / ``lam`` are not searched. The best
    validation ``metric`` (aupr or auc) wins; ties keep the earliest grid point.
    """
    pick = {"auc": 0, "aupr": 1}[metric]
    rng = make_rng(seed)
    cells = positive_cells(train, directed=not undirected)
    n_val = max(1, int(round(val_frac * len(cells))))
    val = cells[np.sort(rng.permutation(len(cells))[:n_val])]
    inner = remove_edges(train, val, undirected)
    alphas = [alpha] if alpha is not None else list(alpha_grid)
    if method == "trwr":
        lams = [lam] if lam is not None else lambda_grid(inner, lambda_exponents)
    else:
        lams = [None]
    scorer = FoldScorer(inner, method, normalization)
    best, best_key = None, None
    for a in alphas:
        for lm in lams:
            val_score = evaluate_scores(scorer.scores(a, lm), inner, val, undirected)[pick]
            if best is None or val_score > best:
                best, best_key = val_score, (a, lm)
    return best_key


@dataclass
class LinkPredictionReport:
    method: str
    params: dict
    folds: list = field(default_factory=list)

    def _stat(self, key):
        vals = np.array([f[key] for f in self.folds], dtype=float)
        std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        return float(vals.mean()), std

    @property
    def auc_mean(self):
        return self._stat("auc")[0]

    @property
    def auc_std(self):
        return self._stat("auc")[1]

    @property
    def aupr_mean(self):
        return self._stat("aupr")[0]

    @property
    def aupr_std(self):
        return self._stat("aupr")[1]

    def to_dict(self):
        return {"method": self.method, "params": self.params, "folds": self.folds,
                "auc_mean": self.auc_mean, "auc_std": self.auc_std,
                "aupr_mean": self.aupr_mean, "aupr_std": self.aupr_std}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data):
        return cls(data["method"], data["params"], list(data["folds"]))


def run_link_prediction(A, method, rwr_params: RwrParams | None = None, topo_params=None,
                        k=10, seed=0, mask_train=False, directed=None,
                        normalization=None, alpha_grid=ALPHA_GRID,
                        lambda_exponents=LAMBDA_EXPONENTS, neg_sample=None,
                        select_metric="auc") -> LinkPredictionReport:
    """k-fold link prediction.

    ``method`` is one of rwr / trwr / cnrwr or a callable mapping a training
    matrix to a score matrix. Missing ``rwr_params`` (or ``topo_params`` for
    trwr) are chosen per fold on an inner 10% validation split. Training
    positives and self-pairs never enter the ranking; ``mask_train`` is
    recorded for provenance only, since that exclusion is unconditional.
    """
    a = as_array(A)
    undirected = _is_undirected(a, directed)
    if normalization is None:
        normalization = rwr_params.normalization if rwr_params is not None else "column"
    lam = _lam(topo_params) if topo_params is not None else None
    alpha = rwr_params.alpha if rwr_params is not None else None
    custom = callable(method)
    name = getattr(method, "__name__", "custom") if custom else method
    if not custom and method not in METHODS:
        raise ValueError(f"unknown method {method!r}")

    folds = kfold_edge_split(a, k, component_rng(seed, "folds"), directed=not undirected)
    report = LinkPredictionReport(name, {
        "alpha": alpha, "lambda": lam if (custom or method == "trwr") else None,
        "normalization": normalization, "seed": seed, "folds": k,
        "mask_train": bool(mask_train), "negatives": "all" if neg_sample is None else int(neg_sample),
        "undirected": bool(undirected), "select_metric": select_metric,
    })
    for fold in folds:
        train = remove_edges(a, fold.test_edges, undirected)
        t = fold.test_edges
        if np.any(train[t[:, 0], t[:, 1]] != 0) or (undirected and np.any(train[t[:, 1], t[:, 0]] != 0)):
            raise AssertionError("test edges leaked into the training matrix")
        entry = {"fold": fold.fold_id}
        if custom:
            S = np.asarray(method(train), dtype=float)
        else:
            f_alpha, f_lam = alpha, lam
            needs_lam = method == "trwr" and lam is None
            if alpha is None or needs_lam:
                f_alpha, f_lam = select_params(
                    train, method, undirected, alpha_grid, lambda_exponents, normalization,
                    alpha=alpha, lam=lam, seed=component_rng(seed, "inner", fold.fold_id),
                    metric=select_metric)
                entry["alpha"] = f_alpha
                if method == "trwr":
                    entry["lambda"] = f_lam
            S = FoldScorer(train, method, normalization).scores(f_alpha, f_lam)
        fold_auc, fold_aupr = evaluate_scores(
            S, train, fold.test_edges, undirected, neg_sample,
            rng=component_rng(seed, "inner", 1000 + fold.fold_id))
        entry["auc"] = fold_auc
        entry["aupr"] = fold_aupr
        report.folds.append(entry)
    return report
