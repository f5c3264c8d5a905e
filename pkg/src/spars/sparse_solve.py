"""Thresholded rank and greedy sparse least squares.

``sparse_lsq`` returns a solution ``X`` of ``A X ~= Y`` together with a
residual certificate ``(alpha, beta, ||(I - Q) Y||_F)`` where ``Q`` projects
onto the span of the selected columns of ``A``.  The certificate satisfies

    ||A X - Y||_F <= alpha * delta + beta * ||(I - Q) Y||_F

exactly in floating point as stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from .errors import RankDeficiencyError, ShapeError

# singular values below this fraction of s_max are exact zeros
RELATIVE_ZERO = 1e-12


@dataclass(frozen=True)
class ThresholdedRank:
    delta: float
    singular_values: np.ndarray
    rank: int


@dataclass(frozen=True)
class SparseSolveReport:
    solution: np.ndarray
    nnz: int
    residual_frobenius: float
    delta: float
    certificate_alpha: float
    certificate_beta: float
    projected_residual: float
    supports: tuple = ()
    residual_history: tuple = ()

    def certificate_holds(self) -> bool:
        bound = self.certificate_alpha * self.delta + self.certificate_beta * self.projected_residual
        return self.residual_frobenius <= bound


def thresholded_rank(A, delta: float) -> ThresholdedRank:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        raise ShapeError("thresholded rank of an empty matrix")
    if delta <= 0:
        raise ValueError("delta must be positive")
    s = np.linalg.svd(A, compute_uv=False)
    if s.size and s[0] > 0:
        s = np.where(s < RELATIVE_ZERO * s[0], 0.0, s)
    return ThresholdedRank(float(delta), s, int(np.count_nonzero(s > delta)))


def omp_column(A, y, delta, limit, col_norms=None):
    """Orthogonal matching pursuit for one right-hand side.

    Returns ``(coefficients, support, residual_norm_history)``.  Stops once
    the residual is at most ``delta * ||y||`` or ``limit`` columns are in use.
    Ties in the correlation go to the lowest column index.
    """
    m, n = A.shape
    if col_norms is None:
        col_norms = np.linalg.norm(A, axis=0)
    usable = col_norms > 0
    inv_norms = np.where(usable, 1.0 / np.where(usable, col_norms, 1.0), 0.0)

    x = np.zeros(n)
    support: list[int] = []
    resid = y.copy()
    rnorm = float(np.linalg.norm(resid))
    history = [rnorm]
    target = delta * float(np.linalg.norm(y))
    while rnorm > target and len(support) < limit:
        corr = np.abs(A.T @ resid) * inv_norms
        corr[~usable] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 0.0:
            break
        trial = support + [j]
        q, r = np.linalg.qr(A[:, trial])
        if abs(r[-1, -1]) <= RELATIVE_ZERO * col_norms[j] * 1e2:
            # numerically inside the span of the current support
            usable[j] = False
            continue
        coef = solve_triangular(r, q.T @ y)
        new_resid = y - A[:, trial] @ coef
        new_norm = float(np.linalg.norm(new_resid))
        if new_norm > rnorm:
            usable[j] = False
            continue
        support = trial
        usable[j] = False
        resid = new_resid
        rnorm = new_norm
        x[:] = 0.0
        x[support] = coef
        history.append(rnorm)
    return x, support, history


def _projection_residual(A, Y, cols):
    if not cols:
        return float(np.linalg.norm(Y))
    q, r = np.linalg.qr(A[:, cols])
    d = np.abs(np.diag(r))
    keep = d > RELATIVE_ZERO * max(d.max(), 1e-300)
    q = q[:, keep]
    return float(np.linalg.norm(Y - q @ (q.T @ Y)))


def _certificate(residual, projected, delta):
    alpha = max(0.0, (residual - projected) / delta)
    while alpha * delta + projected < residual:
        alpha = float(np.nextafter(alpha, np.inf))
    return alpha


def sparse_lsq(A, Y, delta: float, max_nnz_per_column: Optional[int] = None) -> SparseSolveReport:
    """Column-wise OMP solution of ``A X ~= Y`` with per-column support <= rk_delta(A)."""
    A = np.asarray(A, dtype=float)
    Y = np.asarray(Y, dtype=float)
    vector_rhs = Y.ndim == 1
    if A.ndim != 2:
        raise ShapeError(f"A must be 2-D, got shape {A.shape}")
    if vector_rhs:
        Y = Y[:, None]
    if Y.ndim != 2 or Y.shape[0] != A.shape[0]:
        raise ShapeError(f"A has {A.shape[0]} rows but Y has shape {Y.shape}")
    if delta <= 0:
        raise ValueError("delta must be positive")

    r = thresholded_rank(A, delta).rank
    if r == 0:
        raise RankDeficiencyError(f"rk_delta(A) = 0 for delta={delta}")
    limit = r if max_nnz_per_column is None else min(r, int(max_nnz_per_column))

    n, p = A.shape[1], Y.shape[1]
    X = np.zeros((n, p))
    col_norms = np.linalg.norm(A, axis=0)
    supports = []
    histories = []
    for k in range(p):
        x, support, hist = omp_column(A, Y[:, k], delta, limit, col_norms)
        X[:, k] = x
        supports.append(tuple(support))
        histories.append(tuple(hist))

    residual = float(np.linalg.norm(A @ X - Y))
    union = sorted(set().union(*supports)) if supports else []
    projected = _projection_residual(A, Y, union)
    alpha = _certificate(residual, projected, delta)
    if vector_rhs:
        X = X[:, 0]
    return SparseSolveReport(
        solution=X,
        nnz=int(np.count_nonzero(X)),
        residual_frobenius=residual,
        delta=float(delta),
        certificate_alpha=alpha,
        certificate_beta=1.0,
        projected_residual=projected,
        supports=tuple(supports),
        residual_history=tuple(histories),
    )


def sparsify_matrix(H, A, delta: float) -> SparseSolveReport:
    """Sparse ``A_hat`` (L x M) with ``H^T A_hat ~= H^T A`` and at most ``M * rk_delta(H)`` nonzeros.

    ``H`` is an L x K trajectory matrix (or anything with a ``data`` attribute
    holding one).
    """
    H = np.asarray(getattr(H, "data", H), dtype=float)
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if H.shape[0] != A.shape[0]:
        raise ShapeError(f"H has {H.shape[0]} rows but A has {A.shape[0]}")
    Ht = H.T
    return sparse_lsq(Ht, Ht @ A, delta)
