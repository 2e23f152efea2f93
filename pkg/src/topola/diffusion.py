"""Random walk with restart closed forms: RWR, TRWR and CNRWR."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import _lam, cn_matrix, nr_enhance
from .netcore import as_array

NORMALIZATIONS = ("column", "row", "symmetric")


@dataclass(frozen=True)
class RwrParams:
    alpha: float
    normalization: str = "column"

    def __post_init__(self):
        alpha = float(self.alpha)
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True, eq=False)
class DiffusionResult:
    scores: np.ndarray
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.scores)):
            raise ArithmeticError(f"{self.method} produced non-finite scores")


def transition_matrix(A, normalization="column") -> np.ndarray:
    """Transition matrix of a square non-negative ``A``.

    column: columns sum to one; row: rows sum to one; symmetric:
    ``D_r^-1/2 A D_c^-1/2``. Empty columns (rows for ``row``) become uniform;
    under ``symmetric`` they stay zero.
    """
    a = as_array(A)
    if a.shape[0] != a.shape[1]:
        raise ValueError("transition matrix needs a square matrix")
    if np.any(a < 0):
        raise ValueError("transition matrix needs non-negative weights")
    n = a.shape[0]
    if normalization == "column":
        s = a.sum(axis=0)
        W = np.divide(a, s, out=np.zeros_like(a), where=s > 0)
        W[:, s == 0] = 1.0 / n
    elif normalization == "row":
        s = a.sum(axis=1)
        W = np.divide(a, s[:, None], out=np.zeros_like(a), where=s[:, None] > 0)
        W[s == 0, :] = 1.0 / n
    elif normalization == "symmetric":
        r = a.sum(axis=1)
        c = a.sum(axis=0)
        ri = np.divide(1.0, np.sqrt(r), out=np.zeros_like(r), where=r > 0)
        ci = np.divide(1.0, np.sqrt(c), out=np.zeros_like(c), where=c > 0)
        W = ri[:, None] * a * ci[None, :]
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return W


def bipartite_block(A) -> np.ndarray:
    """Square ``[[0, A], [A^T, 0]]`` form of a rectangular matrix."""
    a = as_array(A)
    n, m = a.shape
    out = np.zeros((n + m, n + m))
    out[:n, n:] = a
    out[n:, :n] = a.T
    return out


class RestartSolver:
    """LU factorization of ``I - alpha W`` reused across right-hand sides."""

    def __init__(self, W, alpha):
        W = np.asarray(W, dtype=float)
        self.alpha = float(alpha)
        system = np.eye(W.shape[0]) - self.alpha * W
        try:
            self._lu = scipy.linalg.lu_factor(system, check_finite=True)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise ArithmeticError(f"restart system is singular: {exc}") from exc
        if np.any(np.diag(self._lu[0]) == 0):
            raise ArithmeticError("restart system is singular")

    def solve(self, P0) -> np.ndarray:
        return (1.0 - self.alpha) * scipy.linalg.lu_solve(self._lu, np.asarray(P0, dtype=float))


def rwr_closed_form(W, P0, alpha, method="rwr", params=None) -> DiffusionResult:
    """Stationary ``(1 - alpha) (I - alpha W)^-1 P0`` by direct LU solve."""
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha!r}")
    P0 = np.asarray(P0, dtype=float)
    if P0.ndim == 1:
        P0 = P0[:, None]
    scores = RestartSolver(W, alpha).solve(P0)
    rec = {"alpha": float(alpha)}
    rec.update(params or {})
    return DiffusionResult(scores, method, rec)


def _diffuse(A, P0_fn, rwr_params: RwrParams, method, extra=None):
    a = as_array(A)
    rec = {"alpha": rwr_params.alpha, "normalization": rwr_params.normalization}
    rec.update(extra or {})
    if a.shape[0] == a.shape[1]:
        W = transition_matrix(a, rwr_params.normalization)
        return rwr_closed_form(W, P0_fn(a), rwr_params.alpha, method, rec)
    # bipartite: walk on the square block form, enhance the rectangular block
    n = a.shape[0]
    W = transition_matrix(bipartite_block(a), rwr_params.normalization)
    P0 = bipartite_block(P0_fn(a))
    full = rwr_closed_form(W, P0, rwr_params.alpha, method, rec)
    return DiffusionResult(full.scores[:n, n:], method, full.params)


def rwr(A, rwr_params: RwrParams) -> DiffusionResult:
    """Plain RWR with the network itself as the initial state."""
    return _diffuse(A, lambda a: a, rwr_params, "rwr")


def trwr(A, rwr_params: RwrParams, topo_params) -> DiffusionResult:
    """RWR started from the NR-enhanced network ``D_topo A``."""
    lam = _lam(topo_params)
    return _diffuse(A, lambda a: nr_enhance(a, lam), rwr_params, "trwr", {"lambda": lam})


def cnrwr(A, rwr_params: RwrParams) -> DiffusionResult:
    """RWR started from the common-neighbour enhanced network ``AA^T A``."""
    return _diffuse(A, lambda a: cn_matrix(a) @ a, rwr_params, "cnrwr")


def rwr_iterate(W, P0, alpha, steps=500) -> np.ndarray:
    """Fixed-point iteration ``P_t = (1 - alpha) P0 + alpha W P_{t-1}`` from ``P0``."""
    W = np.asarray(W, dtype=float)
    P0 = np.asarray(P0, dtype=float)
    P = P0.copy()
    for _ in range(steps):
        P = (1.0 - alpha) * P0 + alpha * (W @ P)
    return P
