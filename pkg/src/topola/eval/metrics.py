"""Ranking, clustering and retrieval metrics."""
from __future__ import annotations

import numpy as np
from scipy.stats import rankdata


def _scores_labels(scores, labels):
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape:
        raise ValueError(f"{s.size} scores for {y.size} labels")
    if not np.all(np.isin(y, (0, 1))):
        raise ValueError("labels must be 0/1")
    return s, y.astype(bool)


def auc(scores, labels) -> float:
    """ROC AUC as the Mann-Whitney statistic; ties count one half."""
    s, y = _scores_labels(scores, labels)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positive and negative labels")
    ranks = rankdata(s, method="average")
    u = ranks[y].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def ranking_order(scores) -> np.ndarray:
    """Indices sorted by score descending, ties by index ascending."""
    s = np.asarray(scores, dtype=float).ravel()
    return np.lexsort((np.arange(s.size), -s))


def aupr(scores, labels) -> float:
    """Average precision: mean precision at the rank of every positive."""
    s, y = _scores_labels(scores, labels)
    n_pos = int(y.sum())
    if n_pos == 0:
        raise ValueError("AUPR needs at least one positive label")
    hits = y[ranking_order(s)]
    ranks = np.flatnonzero(hits) + 1
    precision = np.arange(1, n_pos + 1) / ranks
    return float(precision.mean())


def contingency(a, b) -> np.ndarray:
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.size != b.size:
        raise ValueError(f"partitions have {a.size} and {b.size} elements")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max(initial=-1) + 1, bi.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def _comb2(x):
    x = np.asarray(x, dtype=float)
    return x * (x - 1) / 2.0


def ari(partition_a, partition_b) -> float:
    """Adjusted Rand index from the contingency table.

    Returns 1.0 when the index is undefined (both partitions trivial in the
    same way), since the partitions then coincide.
    """
    table = contingency(partition_a, partition_b)
    n = int(table.sum())
    index = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    pairs = _comb2(n)
    if pairs == 0:
        return 1.0
    expected = sum_a * sum_b / pairs
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(partition_a, partition_b) -> float:
    """Mutual information normalized by the larger of the two entropies.

    Both partitions constant gives 1; exactly one constant gives 0.
    """
    table = contingency(partition_a, partition_b)
    n = table.sum()
    ha = _entropy(table.sum(axis=1), n)
    hb = _entropy(table.sum(axis=0), n)
    denom = max(ha, hb)
    if denom == 0:
        return 1.0
    if ha == 0 or hb == 0:
        return 0.0
    rows = table.sum(axis=1, keepdims=True)
    cols = table.sum(axis=0, keepdims=True)
    nz = table > 0
    joint = table[nz] / n
    mi = np.sum(joint * np.log(table[nz] * n / (rows * cols)[nz]))
    return float(min(max(mi / denom, 0.0), 1.0))


def retrieval_accuracy(similarity, classes, k=None):
    """Per-query ``H_q / min(k, N_q)`` and its mean.

    Each query ranks every other item by similarity (descending, ties by
    index). ``N_q`` is the number of other items sharing the query's class.
    ``k=None`` retrieves ``N_q`` items per query.
    """
    S = np.asarray(similarity, dtype=float)
    classes = np.asarray(classes)
    n = S.shape[0]
    if S.shape != (n, n) or classes.size != n:
        raise ValueError("similarity must be n x n with one class per row")
    if n < 2:
        raise ValueError("retrieval needs at least two items")
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    per_query = np.empty(n)
    for q in range(n):
        others = np.delete(np.arange(n), q)
        same = classes[others] == classes[q]
        n_q = int(same.sum())
        if n_q == 0:
            raise ValueError(f"query {q} has no other member of its class")
        kk = n_q if k is None else k
        order = others[ranking_order(S[q, others])]
        top = order[:kk]
        hits = int(np.sum(classes[top] == classes[q]))
        per_query[q] = hits / min(kk, n_q)
    return per_query, float(per_query.mean())
