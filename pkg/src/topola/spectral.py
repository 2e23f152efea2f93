"""Spectral primitives: SVD, fixed-precision randomized QB, sin-theta, conditioning."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._rng import make_rng
from .netcore import as_array

DEFAULT_BLOCK = 16
DEFAULT_POWER = 1
COND_RTOL = 1e-13
ORTHO_TOL = 1e-8


class SpectralError(ArithmeticError):
    """A factorization failed to converge or a spectral contract was violated."""


class ToleranceNotReached(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class SvdFactors:
    U: np.ndarray
    S: np.ndarray
    Vt: np.ndarray

    @property
    def k(self) -> int:
        return self.S.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.S) @ self.Vt


@dataclass(frozen=True, eq=False)
class QbFactors:
    """``A ~= Q @ B`` with orthonormal ``Q``.

    ``converged`` is False when tolerance mode exhausted the full rank without
    reaching the requested error.
    """

    Q: np.ndarray
    B: np.ndarray
    achieved_error: float
    converged: bool = True

    @property
    def rank(self) -> int:
        return self.Q.shape[1]


def full_svd(A) -> SvdFactors:
    """Thin SVD with k = min(n, m), singular values non-increasing."""
    a = as_array(A)
    try:
        U, S, Vt = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        try:
            U, S, Vt = scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise SpectralError(f"SVD did not converge: {exc}") from exc
    return SvdFactors(U, S, Vt)


def singular_values(A) -> np.ndarray:
    return scipy.linalg.svdvals(as_array(A))


def _orth(Y):
    Q, _ = np.linalg.qr(Y)
    return Q


def _project_out(Qi, Q):
    if Q.shape[1] == 0:
        return Qi
    # two passes: a single Gram-Schmidt sweep loses orthogonality when Qi is
    # nearly inside span(Q), which happens once the numerical rank is exhausted
    for _ in range(2):
        Qi = Qi - Q @ (Q.T @ Qi)
    return Qi


def randqb_fp(A, rank=None, tol=None, block=DEFAULT_BLOCK, power=DEFAULT_POWER, seed=None):
    """Blocked randomized QB factorization with Frobenius error tracking.

    Give exactly one of ``rank`` (columns wanted, rounded up to whole blocks)
    or ``tol`` (absolute Frobenius tolerance on ``A - QB``). The running error
    is ``||A||_F^2 - ||B||_F^2``; in tolerance mode the stop is confirmed with
    the explicit residual because the tracker cancels catastrophically once
    ``tol`` approaches ``sqrt(eps) * ||A||_F``. ``achieved_error`` is always
    the explicit residual norm.
    """
    a = as_array(A)
    if (rank is None) == (tol is None):
        raise ValueError("give exactly one of rank or tol")
    if block < 1:
        raise ValueError("block size must be >= 1")
    if power < 0:
        raise ValueError("power iterations must be >= 0")
    n, m = a.shape
    full = min(n, m)
    if rank is not None:
        if rank < 1 or rank > full:
            raise ValueError(f"rank {rank} outside [1, {full}]")
        target = min(math.ceil(rank / block) * block, full)
    else:
        if not tol > 0:
            raise ValueError("tolerance must be positive")
        target = full

    rng = make_rng(seed)
    Q = np.zeros((n, 0))
    B = np.zeros((0, m))
    err2 = float(np.sum(a * a))
    tol2 = None if tol is None else tol * tol
    explicit = None
    converged = True

    while Q.shape[1] < target:
        b = min(block, target - Q.shape[1])
        omega = rng.standard_normal((m, b))
        Qi = _orth(a @ omega - Q @ (B @ omega))
        for _ in range(power):
            Qh = _orth(a.T @ Qi - B.T @ (Q.T @ Qi))
            Qi = _orth(a @ Qh - Q @ (B @ Qh))
        Qi = _orth(_project_out(Qi, Q))
        Bi = Qi.T @ a
        Q = np.hstack([Q, Qi])
        B = np.vstack([B, Bi])
        err2 = max(err2 - float(np.sum(Bi * Bi)), 0.0)
        if tol2 is not None and err2 < tol2:
            explicit = float(np.linalg.norm(a - Q @ B))
            if explicit <= tol:
                break
            err2 = explicit * explicit

    # the tracker's floor is about sqrt(eps) * ||A||_F, too coarse to report
    if explicit is None or explicit > (tol or 0.0):
        explicit = float(np.linalg.norm(a - Q @ B))
    if tol is not None and explicit > tol:
        converged = False
        warnings.warn(f"tolerance {tol:g} not reached at full rank {Q.shape[1]} "
                      f"(residual {explicit:g})", ToleranceNotReached, stacklevel=2)
    return QbFactors(Q, B, explicit, converged)


def truncate_to_svd(qb: QbFactors, k: int) -> SvdFactors:
    """Top-k SVD of ``Q @ B`` via the SVD of the small matrix ``B``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > min(qb.B.shape):
        raise ValueError(f"k={k} exceeds available rank {min(qb.B.shape)}")
    Ub, S, Vt = np.linalg.svd(qb.B, full_matrices=False)
    return SvdFactors(qb.Q @ Ub[:, :k], S[:k], Vt[:k, :])


def _check_orthonormal(U, name):
    gram = U.T @ U
    dev = np.max(np.abs(gram - np.eye(gram.shape[0])), initial=0.0)
    if dev > ORTHO_TOL:
        raise ValueError(f"{name} is not column-orthonormal (max deviation {dev:.2e})")


def sin_theta(U1, U2) -> float:
    """Largest principal-angle sine between span(U1) and span(U2).

    Computed as ``||(I - U1 U1^T) U2||_2``, which keeps accuracy for tiny angles.
    """
    U1 = np.asarray(U1, dtype=float)
    U2 = np.asarray(U2, dtype=float)
    if U1.ndim == 1:
        U1 = U1[:, None]
    if U2.ndim == 1:
        U2 = U2[:, None]
    if U1.shape != U2.shape:
        raise ValueError(f"shape mismatch {U1.shape} vs {U2.shape}")
    _check_orthonormal(U1, "U1")
    _check_orthonormal(U2, "U2")
    resid = U2 - U1 @ (U1.T @ U2)
    val = float(np.linalg.norm(resid, 2)) if resid.size else 0.0
    return min(max(val, 0.0), 1.0)


def condition_number(A) -> float:
    """sigma_max / sigma_min, or +inf when sigma_min <= 1e-13 * sigma_max."""
    s = singular_values(A)
    if s.size == 0 or s[0] == 0:
        raise ValueError("condition number of an all-zero matrix is undefined")
    smin = s[-1]
    if smin <= COND_RTOL * s[0]:
        return math.inf
    return float(s[0] / smin)
