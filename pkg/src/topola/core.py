"""TopoLa distance and the NR / fastNR / CN network enhancements.

All closed forms are evaluated through the SVD of ``A``; the regularized
inverse ``(AA^T + lam I)^-1`` is never formed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .netcore import as_array
from .spectral import (DEFAULT_BLOCK, DEFAULT_POWER, full_svd, randqb_fp,
                       singular_values, truncate_to_svd)


class SeriesDivergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TopoLaParams:
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not (math.isfinite(lam) and lam > 0):
            raise ValueError(f"lambda must be positive and finite, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)


def _lam(params) -> float:
    if isinstance(params, TopoLaParams):
        return params.lam
    return TopoLaParams(params).lam


@dataclass(frozen=True, eq=False)
class TopoLaDistanceMatrix:
    values: np.ndarray
    lam: float

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def shape(self):
        return self.values.shape


def singular_transform(sigma, lam):
    """Enhanced singular value ``sigma^3 / (sigma^2 + lam)``; works on arrays."""
    lam = _lam(lam)
    s = np.asarray(sigma, dtype=float)
    if np.any(s < 0):
        raise ValueError("singular values must be non-negative")
    out = s * (s * s) / (s * s + lam)
    return float(out) if out.ndim == 0 else out


def distance_eigenvalues(sigma, lam):
    s2 = np.asarray(sigma, dtype=float) ** 2
    return s2 / (s2 + _lam(lam))


def topola_distance(A, lam) -> TopoLaDistanceMatrix:
    """``AA^T (lam I + AA^T)^-1`` from the left singular factors of ``A``."""
    lam = _lam(lam)
    svd = full_svd(A)
    g = distance_eigenvalues(svd.S, lam)
    D = (svd.U * g) @ svd.U.T
    D = 0.5 * (D + D.T)
    return TopoLaDistanceMatrix(D, lam)


def topola_series(A, lam, terms: int) -> np.ndarray:
    """Partial Neumann sum ``sum_{t=1..terms} (-1)^(t+1) (AA^T)^t / lam^t``.

    Only meaningful as an oracle when ``sigma_max^2 < lam``.
    """
    lam = _lam(lam)
    if terms < 1:
        raise ValueError("terms must be >= 1")
    a = as_array(A)
    M = a @ a.T
    smax2 = float(singular_values(a)[0]) ** 2
    if smax2 >= lam:
        warnings.warn(f"series diverges: sigma_max^2={smax2:.4g} >= lambda={lam:.4g}",
                      SeriesDivergenceWarning, stacklevel=2)
    term = M / lam
    total = term.copy()
    for _ in range(terms - 1):
        term = -(term @ M) / lam
        total += term
    return total


def nr_enhance(A, lam) -> np.ndarray:
    """Network reconstruction ``A* = D_topo A`` (singular values mapped, vectors kept)."""
    lam = _lam(lam)
    svd = full_svd(A)
    return (svd.U * singular_transform(svd.S, lam)) @ svd.Vt


def fastnr_enhance(A, lam, rank=None, tol=None, block=DEFAULT_BLOCK,
                   power=DEFAULT_POWER, seed=None) -> np.ndarray:
    """NR applied to a randomized low-rank approximation of ``A``.

    Rank mode keeps exactly ``rank`` singular triplets; tolerance mode keeps
    every column the sketch needed to reach ``tol``.
    """
    lam = _lam(lam)
    qb = randqb_fp(A, rank=rank, tol=tol, block=block, power=power, seed=seed)
    k = rank if rank is not None else min(qb.B.shape)
    svd = truncate_to_svd(qb, k)
    return (svd.U * singular_transform(svd.S, lam)) @ svd.Vt


def cn_matrix(A) -> np.ndarray:
    """``AA^T``; on a 0/1 symmetric graph entry (i, j) counts common neighbours."""
    a = as_array(A)
    return a @ a.T


def lambda_grid(A, exponents=range(-3, 4)) -> list[float]:
    """Candidate lambdas ``10^g * median(sigma)^2``.

    Zero singular values are dropped before taking the median so rank
    deficient graphs still get a usable scale.
    """
    s = singular_values(A)
    if s.size == 0 or s[0] == 0:
        raise ValueError("lambda grid needs a nonzero matrix")
    s = s[s > 1e-13 * s[0]]
    scale = float(np.median(s)) ** 2
    return [scale * 10.0 ** g for g in exponents]


def theorem3_max_violation(A, lam) -> float:
    """Largest ``(D[r,i]-D[r,j])^2 - ||A_r||^2/lam * ||A_i - A_j||^2`` over all r, i, j.

    Row r of ``D_topo`` is the ridge solution regressing row r of ``A`` on all
    rows, so this is predicted to be <= 0 up to rounding.
    """
    lam = _lam(lam)
    a = as_array(A)
    D = topola_distance(a, lam).values
    sq = np.sum(a * a, axis=1)
    # ||A_i - A_j||^2 from the Gram matrix; clip tiny negatives from cancellation
    gram = a @ a.T
    row_dist = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0)
    worst = -math.inf
    for r in range(a.shape[0]):
        diff = D[r][:, None] - D[r][None, :]
        v = diff * diff - (sq[r] / lam) * row_dist
        worst = max(worst, float(v.max()))
    return worst


def gap_bound(gap, h_norm) -> float:
    """Uniform sin-theta bound ``min(2||H|| / gap, 1)``."""
    if gap <= 0:
        return 1.0
    return min(2.0 * h_norm / gap, 1.0)


def perturbation_bounds(sigma_prev, sigma_k, h_norm, lam):
    """(original, enhanced) sin-theta bounds for the subspace cut after ``sigma_prev``."""
    orig = gap_bound(sigma_prev - sigma_k, h_norm)
    f_prev, f_k = singular_transform([sigma_prev, sigma_k], lam)
    return orig, gap_bound(f_prev - f_k, h_norm)


def triangle_violations(D, tol=1e-12) -> int:
    """Count ordered triples where ``1 - D`` breaks the triangle inequality.

    Diagnostic only; nothing guarantees this is zero.
    """
    dist = 1.0 - np.asarray(D, dtype=float)
    count = 0
    for k in range(dist.shape[0]):
        via = dist[:, k][:, None] + dist[k, :][None, :]
        count += int(np.sum(dist > via + tol))
    return count
