import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topola.eval.metrics import ari, aupr, auc, contingency, nmi, ranking_order, retrieval_accuracy


def auc_pairs(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


def aupr_sweep(scores, labels):
    """Precision at every cut of the stable (score desc, index asc) ranking, averaged over hits."""
    order = sorted(range(len(scores)), key=lambda k: (-scores[k], k))
    total = sum(labels)
    hits, acc = 0, 0.0
    for cut in range(1, len(order) + 1):
        if labels[order[cut - 1]]:
            hits += 1
            acc += hits / cut
    return acc / total


def ari_pairs(a, b):
    """Adjusted Rand index from pair counting over all element pairs."""
    n = len(a)
    pairs = list(itertools.combinations(range(n), 2))
    same_a = [a[i] == a[j] for i, j in pairs]
    same_b = [b[i] == b[j] for i, j in pairs]
    both = sum(x and y for x, y in zip(same_a, same_b))
    sa, sb, m = sum(same_a), sum(same_b), len(pairs)
    if m == 0:
        return 1.0
    expected = sa * sb / m
    top = (sa + sb) / 2
    return 1.0 if top == expected else (both - expected) / (top - expected)


def nmi_direct(a, b):
    n = len(a)
    pa = {x: a.count(x) / n for x in set(a)}
    pb = {y: b.count(y) / n for y in set(b)}
    joint = {}
    for x, y in zip(a, b):
        joint[(x, y)] = joint.get((x, y), 0) + 1 / n
    ha = -sum(p * math.log(p) for p in pa.values())
    hb = -sum(p * math.log(p) for p in pb.values())
    mi = sum(p * math.log(p / (pa[x] * pb[y])) for (x, y), p in joint.items())
    if max(ha, hb) == 0:
        return 1.0
    if min(ha, hb) == 0:
        return 0.0
    return mi / max(ha, hb)


def test_auc_basic():
    assert auc([0.9, 0.1], [1, 0]) == 1.0
    assert auc([0.1, 0.9], [1, 0]) == 0.0
    assert auc([0.3] * 5, [1, 0, 1, 0, 0]) == 0.5


def test_auc_eight_items():
    s = [0.9, 0.8, 0.8, 0.5, 0.4, 0.4, 0.2, 0.1]
    y = [1, 0, 1, 1, 0, 1, 0, 0]
    assert auc(s, y) == pytest.approx(auc_pairs(s, y), abs=1e-12)
    assert auc(s, y) == pytest.approx(13 / 16)


def test_auc_single_class():
    with pytest.raises(ValueError):
        auc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        auc([0.1, 0.2], [1, 2])


def test_aupr_basic():
    assert aupr([0.9, 0.5, 0.1], [1, 0, 0]) == 1.0
    assert aupr([0.9, 0.5, 0.1, 0.0], [0, 0, 0, 1]) == 0.25
    with pytest.raises(ValueError):
        aupr([0.1, 0.2], [0, 0])


def test_aupr_ten_items():
    s = [0.95, 0.9, 0.7, 0.7, 0.6, 0.5, 0.5, 0.3, 0.2, 0.1]
    y = [1, 0, 1, 0, 1, 0, 1, 0, 0, 1]
    assert aupr(s, y) == pytest.approx(aupr_sweep(s, y), abs=1e-12)


def test_aupr_tie_break_by_index():
    # tied pair: the lower index ranks first
    assert aupr([0.5, 0.5], [1, 0]) == 1.0
    assert aupr([0.5, 0.5], [0, 1]) == 0.5
    np.testing.assert_array_equal(ranking_order([0.5, 0.9, 0.5]), [1, 0, 2])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 1.0]), st.booleans()),
                min_size=2, max_size=60))
def test_ranking_metrics_match_oracles(items):
    s = [x for x, _ in items]
    y = [int(b) for _, b in items]
    if 0 < sum(y) < len(y):
        assert abs(auc(s, y) - auc_pairs(s, y)) <= 1e-12
    if sum(y):
        assert abs(aupr(s, y) - aupr_sweep(s, y)) <= 1e-12


def test_ari_hand_case():
    X = [1, 1, 1, 2, 2, 2]
    Y = [1, 1, 2, 2, 2, 2]
    assert ari(X, Y) == pytest.approx(12 / 37, abs=1e-15)
    assert ari_pairs(X, Y) == pytest.approx(12 / 37, abs=1e-15)


def test_ari_identity_and_relabel():
    a = [0, 0, 1, 1, 2]
    assert ari(a, a) == 1.0
    assert ari(a, [7, 7, 3, 3, 9]) == pytest.approx(1.0)
    assert ari([0] * 4, [0] * 4) == 1.0
    assert ari([0, 1, 2], [5, 6, 7]) == 1.0
    with pytest.raises(ValueError):
        ari([0, 1], [0])


def test_contingency_table():
    np.testing.assert_array_equal(contingency(["a", "a", "b"], [1, 2, 2]), [[1, 1], [0, 1]])


def test_nmi_cases():
    a = [0, 0, 1, 1, 2, 2]
    assert nmi(a, a) == pytest.approx(1.0)
    assert nmi(list(range(6)), [0] * 6) == 0.0
    assert nmi([0] * 6, [1] * 6) == 1.0
    b = [0, 1, 1, 1, 2, 0]
    assert nmi(a, b) == pytest.approx(nmi_direct(a, b), abs=1e-12)
    with pytest.raises(ValueError):
        nmi([0, 1], [0])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 4), min_size=n, max_size=n),
    st.lists(st.integers(0, 4), min_size=n, max_size=n))))
def test_partition_metrics_match_oracles(pair):
    a, b = pair
    assert abs(ari(a, b) - ari_pairs(a, b)) <= 1e-12
    assert abs(nmi(a, b) - nmi_direct(a, b)) <= 1e-12
    assert ari(a, b) <= 1.0 + 1e-12
    assert 0.0 <= nmi(a, b) <= 1.0
    relabel = [10 - x for x in b]
    assert abs(ari(a, b) - ari(a, relabel)) <= 1e-12
    assert abs(nmi(a, b) - nmi(a, relabel)) <= 1e-12


def test_retrieval_perfect():
    classes = [0, 0, 0, 1, 1]
    S = np.equal.outer(classes, classes).astype(float)
    per, mean = retrieval_accuracy(S, classes, k=1)
    assert mean == 1.0 and np.all(per == 1.0)


def test_retrieval_none_found():
    classes = [0, 0, 1, 1]
    S = 1.0 - np.equal.outer(classes, classes)
    per, mean = retrieval_accuracy(S, classes, k=1)
    assert mean == 0.0


def test_retrieval_five_items():
    classes = ["a", "a", "a", "b", "b"]
    S = np.array([[0, 0.9, 0.1, 0.8, 0.2],
                  [0.9, 0, 0.3, 0.4, 0.1],
                  [0.1, 0.3, 0, 0.7, 0.6],
                  [0.8, 0.4, 0.7, 0, 0.5],
                  [0.2, 0.1, 0.6, 0.5, 0]])
    per, mean = retrieval_accuracy(S, classes, k=2)
    # q0: top2 {1,3} -> 1 hit of min(2,2); q1: {0,3} -> 1/2; q2: {3,4} -> 0/2
    # q3: {0,2} -> 0/min(2,1); q4: {2,3} -> 1/1
    np.testing.assert_allclose(per, [0.5, 0.5, 0.0, 0.0, 1.0])
    assert mean == pytest.approx(0.4)
    per_default, _ = retrieval_accuracy(S, classes)
    np.testing.assert_allclose(per_default, [0.5, 0.5, 0.0, 0.0, 0.0])


def test_retrieval_errors():
    with pytest.raises(ValueError):
        retrieval_accuracy(np.eye(3), [0, 0, 1], k=0)
    with pytest.raises(ValueError):
        retrieval_accuracy(np.eye(3), [0, 0, 1], k=1)
