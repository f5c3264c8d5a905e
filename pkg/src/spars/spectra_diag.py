"""Krylov sections of the AR companion matrix and their spectra.

For an anchor window ``x`` the Krylov space ``span{x, Cx, ..., C^{T-1}x}``
gets an orthonormal basis ``W``; the compression ``W^T C W`` is the section.
When the linear model reproduces a T-periodic tail, the section's T-th power
is close to the identity and its eigenvalues sit near T-th roots of unity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, RangeError, ShapeError
from .linear_ar import ArCoefficients, CompanionMatrix, companion, matrix_power
from .signal_core import WindowVector, as_series, estimate_period, window

BREAKDOWN_TOL = 1e-10
UNIT_DISK_TOL = 1e-8


@dataclass(frozen=True)
class ApSection:
    W: np.ndarray
    section: np.ndarray
    k: int
    T: int
    s: int


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    max_unit_root_defect: float
    mimicry_norm: float
    spectral_radius: float
    inside_unit_disk: bool
    power_eigenvalues: np.ndarray
    T: int
    k: int
    tail_detected: bool = True
    anchor_fallback: bool = False
    S: Optional[int] = None
    s: Optional[int] = None


def _matrix(C) -> np.ndarray:
    if isinstance(C, CompanionMatrix):
        return C.data
    if isinstance(C, ArCoefficients):
        return companion(C).data
    return np.atleast_2d(np.asarray(C, dtype=float))


def krylov_section(C, x, T: int, s: Optional[int] = None) -> ApSection:
    """Arnoldi basis of the order-``T`` Krylov space of ``C`` at ``x``.

    Modified Gram-Schmidt with one reorthogonalisation pass.  The process
    stops early when a new direction keeps at most ``1e-10`` of its norm
    after orthogonalisation.
    """
    C = _matrix(C)
    L = C.shape[0]
    if C.shape != (L, L):
        raise ShapeError(f"companion matrix must be square, got {C.shape}")
    v = x.entries if isinstance(x, WindowVector) else np.asarray(x, dtype=float).ravel()
    if v.size != L:
        raise ShapeError(f"start vector of length {v.size} for an {L}x{L} matrix")
    if T < 1:
        raise RangeError("T must be at least 1")
    beta = float(np.linalg.norm(v))
    if beta == 0.0:
        raise DegenerateInputError("zero start vector")
    if s is None:
        s = x.t if isinstance(x, WindowVector) else L

    basis = [v / beta]
    while len(basis) < min(T, L):
        w = C @ basis[-1]
        w_norm = float(np.linalg.norm(w))
        if w_norm == 0.0:
            break
        for _ in range(2):
            for q in basis:
                w = w - (q @ w) * q
        if np.linalg.norm(w) <= BREAKDOWN_TOL * w_norm:
            break
        basis.append(w / np.linalg.norm(w))
    W = np.column_stack(basis)
    return ApSection(W, W.T @ C @ W, W.shape[1], T, s)


def spectrum_report(sec: ApSection, **flags) -> SpectrumReport:
    A = np.asarray(sec.section, dtype=float)
    eig = np.linalg.eigvals(A)
    P = matrix_power(A, sec.T)
    radius = float(np.max(np.abs(eig)))
    return SpectrumReport(
        eigenvalues=eig,
        max_unit_root_defect=float(np.max(np.abs(eig ** sec.T - 1.0))),
        mimicry_norm=float(np.linalg.norm(P - np.eye(sec.k), 2)),
        spectral_radius=radius,
        inside_unit_disk=bool(radius <= 1.0 + UNIT_DISK_TOL),
        power_eigenvalues=np.linalg.eigvals(P),
        T=sec.T,
        k=sec.k,
        s=sec.s,
        **flags,
    )


def ap_diagnose(model, series, epsilon: float, T: Optional[int] = None) -> SpectrumReport:
    """Spectrum of the section anchored at ``x_L(S + L - 1)``.

    ``model`` is a fitted SpARS model or bare AR coefficients.  (T, S) come
    from the period estimate unless ``T`` is given.  An undetected tail or an
    anchor past the end of the sample still yields a report, flagged.
    """
    ar = model if isinstance(model, ArCoefficients) else model.ar
    if ar is None:
        raise ValueError("model has no linear component")
    v = as_series(series)
    n = len(v)
    L = ar.L
    prof = estimate_period(v, epsilon)
    period = prof.T if T is None else T
    S = prof.S if prof.satisfied else n + 1
    anchor = S + L - 1
    anchor_fallback = anchor > n
    if anchor_fallback:
        anchor = n
    x = window(v, L, anchor)
    sec = krylov_section(companion(ar), x, period, anchor)
    return spectrum_report(sec, tail_detected=prof.satisfied, anchor_fallback=anchor_fallback, S=S)
