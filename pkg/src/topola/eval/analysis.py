"""Feature-to-similarity ingestion and the node-pair degree/similarity study."""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import spearmanr

from ..core import topola_distance
from ..netcore import AdjacencyMatrix, _atomic_write, as_array, format_float

EPS_FLOOR = 1e-12
DEFAULT_BANDS = (0.05, 0.10, 0.15)
DEFAULT_BAND_WIDTH = 0.005


def local_scaling_kernel(X, k=20, sigma=0.5, metric="euclidean") -> AdjacencyMatrix:
    """Gaussian similarity with per-point scale ``eps_i`` = mean distance to k nearest neighbours.

    ``G[i, j] = exp(-d_ij^2 / (sigma^2 (eps_i + eps_j)^2))``. A point whose
    k neighbours all coincide with it gets ``eps`` clamped to 1e-12.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if k < 1 or k >= n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    d = cdist(X, X, metric=metric)
    nn = np.sort(np.where(np.eye(n, dtype=bool), np.inf, d), axis=1)[:, :k]
    eps = nn.mean(axis=1)
    clamped = eps < EPS_FLOOR
    if np.any(clamped):
        warnings.warn(f"{int(clamped.sum())} point(s) have zero local scale; clamped to {EPS_FLOOR}",
                      RuntimeWarning, stacklevel=2)
        eps = np.maximum(eps, EPS_FLOOR)
    scale = sigma ** 2 * (eps[:, None] + eps[None, :]) ** 2
    G = np.exp(-(d * d) / scale)
    G = 0.5 * (G + G.T)
    np.fill_diagonal(G, 1.0)
    return AdjacencyMatrix(G, symmetric=True)


@dataclass(frozen=True)
class PairRecord:
    i: int
    j: int
    cn: int
    union: int
    jaccard: float
    dtopo: float
    band: float | None = None


@dataclass(frozen=True, eq=False)
class PairTable:
    """Column-oriented pair records, one row per unordered pair with a non-empty union."""

    i: np.ndarray
    j: np.ndarray
    cn: np.ndarray
    union: np.ndarray
    jaccard: np.ndarray
    dtopo: np.ndarray
    band: np.ndarray  # band centre or NaN
    lam: float

    def __len__(self):
        return self.i.size

    def records(self):
        for r in range(len(self)):
            band = None if np.isnan(self.band[r]) else float(self.band[r])
            yield PairRecord(int(self.i[r]), int(self.j[r]), int(self.cn[r]), int(self.union[r]),
                             float(self.jaccard[r]), float(self.dtopo[r]), band)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "cn", "union", "jaccard", "dtopo", "band"])
        for r in range(len(self)):
            band = "" if np.isnan(self.band[r]) else format_float(self.band[r])
            w.writerow([int(self.i[r]), int(self.j[r]), int(self.cn[r]), int(self.union[r]),
                        format_float(self.jaccard[r]), format_float(self.dtopo[r]), band])
        return buf.getvalue()

    def save_csv(self, path):
        _atomic_write(path, self.to_csv())


def pair_analysis(A, lam, bands=DEFAULT_BANDS, band_width=DEFAULT_BAND_WIDTH) -> PairTable:
    a = as_array(A)
    if a.shape[0] != a.shape[1] or not np.array_equal(a, a.T):
        raise ValueError("pair analysis needs a symmetric 0/1 matrix")
    if not np.all(np.isin(a, (0.0, 1.0))):
        raise ValueError("pair analysis needs a 0/1 matrix")
    n = a.shape[0]
    deg = a.sum(axis=1)
    cn = a @ a
    D = topola_distance(a, lam).values
    iu, ju = np.triu_indices(n, k=1)
    cn_p = np.rint(cn[iu, ju]).astype(np.int64)
    union = np.rint(deg[iu] + deg[ju]).astype(np.int64) - cn_p
    keep = union > 0
    iu, ju, cn_p, union = iu[keep], ju[keep], cn_p[keep], union[keep]
    jac = cn_p / union
    band = np.full(jac.shape, np.nan)
    for centre in bands:
        band[np.abs(jac - centre) <= band_width + 1e-15] = centre
    return PairTable(iu, ju, cn_p, union, jac, D[iu, ju], band, float(lam))


def band_spearman(table: PairTable, x="dtopo", y="union") -> dict:
    """Spearman correlation (average ranks for ties) between two columns within each band."""
    out = {}
    for centre in np.unique(table.band[~np.isnan(table.band)]):
        sel = table.band == centre
        xs, ys = getattr(table, x)[sel], getattr(table, y)[sel]
        if sel.sum() < 3 or np.ptp(xs) == 0 or np.ptp(ys) == 0:
            rho = float("nan")
        else:
            rho = float(spearmanr(xs, ys).statistic)
        out[float(centre)] = {"rho": rho, "pairs": int(sel.sum())}
    return out
