"""Sparse linear autoregressor and its companion matrix form.

Coefficients are stored most-recent-first, ``c[0]`` multiplying ``x_t``::

    x_{t+1} ~ c_1 x_t + c_2 x_{t-1} + ... + c_L x_{t-L+1}
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import RangeError, ShapeError
from .signal_core import WindowVector, as_series, hankel
from .sparse_solve import SparseSolveReport, sparse_lsq

# above this exponent powers go through an eigendecomposition
DIRECT_POWER_LIMIT = 64


@dataclass(frozen=True)
class ArCoefficients:
    c: np.ndarray
    L: int
    nnz: int
    delta: float
    report: Optional[SparseSolveReport] = field(default=None, compare=False, repr=False)

    @classmethod
    def from_values(cls, c, delta: float = 0.0) -> "ArCoefficients":
        c = np.asarray(c, dtype=float).ravel()
        return cls(c, c.size, int(np.count_nonzero(c)), float(delta))


@dataclass(frozen=True)
class CompanionMatrix:
    data: np.ndarray

    @property
    def L(self) -> int:
        return self.data.shape[0]


def ar_system(train, L: int):
    """Design matrix and right-hand side of the lag-``L`` regression.

    Columns of the design are ordered most-recent-first (column ``i`` holds
    the ``x_{t-i}`` samples), so the solution vector is directly ``(c_1..c_L)``.
    """
    s = as_series(train)
    n = len(s)
    if L < 1:
        raise RangeError(f"lag L={L} must be positive")
    if n < L + 2:
        raise RangeError(f"need at least L+2={L + 2} samples, got {n}")
    H = hankel(s.values[:-1], L).data
    design = H[::-1].T
    rhs = s.values[L:]
    return design, rhs


def fit_ar(train, L: int, delta: float) -> ArCoefficients:
    """Sparse least-squares fit of the lag-``L`` linear autoregressor."""
    design, rhs = ar_system(train, L)
    rep = sparse_lsq(design, rhs, delta)
    c = rep.solution
    return ArCoefficients(c, L, int(np.count_nonzero(c)), float(delta), rep)


def fit_dense_ar(train, L: int) -> ArCoefficients:
    """Ordinary (minimum-norm) least squares on the same system."""
    design, rhs = ar_system(train, L)
    c, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    return ArCoefficients(c, L, int(np.count_nonzero(c)), 0.0)


def companion(coeffs: ArCoefficients) -> CompanionMatrix:
    L = coeffs.L
    C = np.zeros((L, L))
    if L > 1:
        C[np.arange(L - 1), np.arange(1, L)] = 1.0
    C[-1, :] = coeffs.c[::-1]
    return CompanionMatrix(C)


def _window_entries(w, L):
    e = w.entries if isinstance(w, WindowVector) else np.asarray(w, dtype=float).ravel()
    if e.size != L:
        raise ShapeError(f"window of length {e.size} for a lag-{L} model")
    return e


def predict_linear(coeffs: ArCoefficients, w) -> float:
    e = _window_entries(w, coeffs.L)
    return float(coeffs.c @ e[::-1])


def predict_linear_companion(coeffs: ArCoefficients, w) -> float:
    """Same prediction read off the last row of ``C_L x_L(t)``."""
    e = _window_entries(w, coeffs.L)
    return float((companion(coeffs).data @ e)[-1])


def matrix_power(C: np.ndarray, S: int) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    if S < 0:
        raise ValueError("negative matrix power")
    if S <= DIRECT_POWER_LIMIT:
        P = np.eye(C.shape[0])
        for _ in range(S):
            P = P @ C
        return P
    vals, vecs = np.linalg.eig(C)
    if np.linalg.cond(vecs) > 1e8:
        # defective or nearly so
        return np.linalg.matrix_power(C, S)
    P = (vecs * vals**S) @ np.linalg.inv(vecs)
    return P.real


def shift_consistency(coeffs: ArCoefficients, series, S: int, relative: bool = False) -> float:
    """Frobenius norm of ``H_L(Sigma_0)^T (C_L^S)^T - H_L(Sigma_0~)^T``.

    ``Sigma_0`` holds the first ``N - S`` samples and ``Sigma_0~`` the same
    count shifted ``S`` steps ahead.  With ``relative=True`` the norm is
    divided by ``||H_L(Sigma_0~)||_F``.
    """
    s = as_series(series)
    n = len(s)
    L = coeffs.L
    if S < 1:
        raise RangeError(f"shift S={S} must be positive")
    if n - S < L:
        raise RangeError(f"series of length {n} too short for L={L}, S={S}")
    base = hankel(s.values[: n - S], L).data
    shifted = hankel(s.values[S:], L).data
    P = matrix_power(companion(coeffs).data, S)
    diff = base.T @ P.T - shifted.T
    norm = float(np.linalg.norm(diff))
    if relative:
        scale = float(np.linalg.norm(shifted))
        return norm / scale if scale > 0 else norm
    return norm


def in_sample_residuals(coeffs: ArCoefficients, train) -> np.ndarray:
    design, rhs = ar_system(train, coeffs.L)
    return design @ coeffs.c - rhs
