"""Exact walk counting and the loop-free / loop-decorated path census.

These are brute-force oracles for the even-hop expansion of d_topo and are
meant for small graphs only.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .netcore import as_array

MAX_ENUM_NODES = 20
_INT64_MAX = np.iinfo(np.int64).max


class EnumerationLimit(ValueError):
    pass


def _int_matrix(A) -> np.ndarray:
    a = as_array(A)
    if a.shape[0] != a.shape[1]:
        raise ValueError("walk counting needs a square matrix")
    if np.any(a < 0) or np.any(a != np.round(a)):
        raise ValueError("walk counting needs a non-negative integer matrix")
    return a.astype(np.int64)


def walk_matrix(A, n: int) -> np.ndarray:
    """``A^n`` in exact int64 arithmetic; raises OverflowError past 2^63 - 1."""
    if n < 1:
        raise ValueError("hop count must be >= 1")
    a = _int_matrix(A)
    col_sums = a.sum(axis=0)
    max_col = int(col_sums.max(initial=0))
    result = a.copy()
    for _ in range(n - 1):
        # every entry of result @ a is bounded by max(result) * max column sum
        if max_col and int(result.max(initial=0)) > _INT64_MAX // max_col:
            raise OverflowError(f"walk counts for {n} hops exceed the int64 range")
        result = result @ a
    return result


def walk_count(A, n: int, i: int, j: int) -> int:
    """Number of n-hop walks from i to j."""
    a = _int_matrix(A)
    size = a.shape[0]
    if not (0 <= i < size and 0 <= j < size):
        raise IndexError(f"node index out of range for {size} nodes")
    return int(walk_matrix(a, n)[i, j])


def _adjacency_lists(A):
    a = _int_matrix(A)
    if a.shape[0] > MAX_ENUM_NODES:
        raise EnumerationLimit(f"simple-path enumeration limited to {MAX_ENUM_NODES} nodes, "
                               f"got {a.shape[0]}")
    if np.any(a > 1):
        raise ValueError("simple-path enumeration needs a 0/1 matrix")
    return [np.flatnonzero(row).tolist() for row in a]


def simple_path_counts(A, source: int, max_len: int) -> np.ndarray:
    """counts[l, t] = number of simple paths with l edges from source to t."""
    nbrs = _adjacency_lists(A)
    size = len(nbrs)
    counts = np.zeros((max_len + 1, size), dtype=np.int64)
    on_path = [False] * size
    on_path[source] = True
    stack = [(source, 0, iter(nbrs[source]))]
    while stack:
        node, depth, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            if node != source:
                on_path[node] = False
            continue
        if on_path[nxt]:
            continue
        counts[depth + 1, nxt] += 1
        if depth + 1 < max_len:
            on_path[nxt] = True
            stack.append((nxt, depth + 1, iter(nbrs[nxt])))
    return counts


def loop_free_paths(A, length: int, i: int, j: int) -> int:
    """Simple paths (no repeated vertex) with exactly ``length`` edges from i to j."""
    if length < 1:
        raise ValueError("path length must be >= 1")
    return int(simple_path_counts(A, i, length)[length, j])


@dataclass(frozen=True)
class PathCensus:
    """Split of the n-hop walks between i and j.

    ``a[l]`` is the number of loop-free paths of length l (l = 1..n). ``b``
    counts even loop-free paths padded with back-and-forth steps at the two
    endpoints, excluding the undecorated length-n paths which already sit in
    ``a[n]``. ``c`` is the remainder.
    """

    n: int
    i: int
    j: int
    total: int
    a: dict = field(default_factory=dict)
    b: int = 0
    c: int = 0
    degree_i: int = 0
    degree_j: int = 0

    @property
    def a_n(self) -> int:
        return self.a.get(self.n, 0)

    def as_dict(self):
        return {"n": self.n, "i": self.i, "j": self.j, "total": self.total,
                "a": {str(k): v for k, v in self.a.items()}, "a_n": self.a_n,
                "b": self.b, "c": self.c, "degree_i": self.degree_i, "degree_j": self.degree_j}


def decorated_count(n: int, a_by_len, kappa_i: int, kappa_j: int) -> int:
    """Endpoint-decorated walks: sum over t < n/2 of sum_h k_i^h k_j^(n/2-t-h) |a_2t|."""
    half = n // 2
    total = 0
    for t in range(1, half):
        extra = half - t
        weight = sum(kappa_i ** h * kappa_j ** (extra - h) for h in range(extra + 1))
        total += weight * int(a_by_len.get(2 * t, 0))
    return total


def census_from_counts(n, i, j, total, path_counts_from_i, degrees) -> PathCensus:
    a = {l: int(path_counts_from_i[l, j]) for l in range(1, n + 1)}
    ki, kj = int(degrees[i]), int(degrees[j])
    b = decorated_count(n, a, ki, kj)
    return PathCensus(n=n, i=i, j=j, total=int(total), a=a, b=b,
                      c=int(total) - a[n] - b, degree_i=ki, degree_j=kj)


def path_census(A, n: int, i: int, j: int) -> PathCensus:
    if n < 2 or n % 2:
        raise ValueError("path census needs an even hop count >= 2")
    a = _int_matrix(A)
    counts = simple_path_counts(a, i, n)
    total = walk_matrix(a, n)[i, j]
    return census_from_counts(n, i, j, total, counts, a.sum(axis=1))
