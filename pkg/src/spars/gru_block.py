"""Native GRU block with an affine read-out, trained by full-batch BPTT.

One cell update, for input window ``x`` and previous state ``h``::

    r = sigmoid(W_ir x + W_hr h + b_r)
    z = sigmoid(W_iz x + W_hz h + b_z)
    n = tanh(W_in x + b_n + r * (W_hn h))
    h' = (1 - z) * n + z * h

followed by the prediction ``w_A . h' + b_A``.  Note there is no bias on the
reset-gated hidden term.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ShapeError, TrainingError
from .signal_core import TrajectoryMatrix, WindowVector, as_series, hankel
from .sparse_solve import sparsify_matrix

INPUT_WEIGHTS = ("W_ir", "W_iz", "W_in")
PARAM_NAMES = ("W_ir", "W_iz", "W_in", "W_hr", "W_hz", "W_hn", "b_r", "b_z", "b_n", "w_A", "b_A")


@dataclass(frozen=True)
class GruParams:
    W_ir: np.ndarray
    W_iz: np.ndarray
    W_in: np.ndarray
    W_hr: np.ndarray
    W_hz: np.ndarray
    W_hn: np.ndarray
    b_r: np.ndarray
    b_z: np.ndarray
    b_n: np.ndarray
    w_A: np.ndarray
    b_A: float

    def __post_init__(self):
        m, L = np.shape(self.W_ir)
        for name in PARAM_NAMES:
            arr = np.array(getattr(self, name), dtype=float)
            expected = {
                "W_ir": (m, L), "W_iz": (m, L), "W_in": (m, L),
                "W_hr": (m, m), "W_hz": (m, m), "W_hn": (m, m),
                "b_r": (m,), "b_z": (m,), "b_n": (m,), "w_A": (m,), "b_A": (),
            }[name]
            if arr.shape != expected:
                raise ShapeError(f"{name} has shape {arr.shape}, expected {expected}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            object.__setattr__(self, name, float(arr) if name == "b_A" else arr)

    @property
    def m(self) -> int:
        return self.W_ir.shape[0]

    @property
    def L(self) -> int:
        return self.W_ir.shape[1]

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    @classmethod
    def zeros(cls, m: int, L: int) -> "GruParams":
        z = np.zeros
        return cls(z((m, L)), z((m, L)), z((m, L)), z((m, m)), z((m, m)), z((m, m)),
                   z(m), z(m), z(m), z(m), 0.0)

    @classmethod
    def random(cls, m: int, L: int, rng: np.random.Generator) -> "GruParams":
        """Uniform on ``[-1/sqrt(m), 1/sqrt(m)]``, drawn in ``PARAM_NAMES`` order."""
        a = 1.0 / np.sqrt(m)
        shapes = [(m, L)] * 3 + [(m, m)] * 3 + [(m,)] * 4 + [()]
        vals = [rng.uniform(-a, a, size=s) for s in shapes]
        return cls(*vals[:-1], float(vals[-1]))


@dataclass(frozen=True)
class GruState:
    h: np.ndarray

    @classmethod
    def zeros(cls, m: int) -> "GruState":
        return cls(np.zeros(m))


@dataclass(frozen=True)
class Normalization:
    """Affine map ``u = scale * (x - center)`` sending the fit range onto [-1, 1]."""

    center: float = 0.0
    scale: float = 1.0

    @classmethod
    def fit(cls, values) -> "Normalization":
        v = np.asarray(values, dtype=float)
        lo, hi = float(v.min()), float(v.max())
        if hi - lo <= 0.0:
            return cls(lo, 1.0)
        return cls(0.5 * (lo + hi), 2.0 / (hi - lo))

    def forward(self, x):
        return (np.asarray(x, dtype=float) - self.center) * self.scale

    def inverse(self, u):
        return np.asarray(u, dtype=float) / self.scale + self.center


@dataclass(frozen=True)
class TrainingConfig:
    epochs: int = 500
    learning_rate: float = 0.2
    clip_norm: float = 1.0
    seed: int = 0
    normalize: bool = True


def fold_normalization(params: GruParams, norm: Normalization) -> GruParams:
    """Parameters acting on raw samples equivalent to ``params`` on normalised ones.

    With ``u = s (x - c)`` on inputs and ``x_hat = u_hat / s + c`` on the
    output, every input weight is scaled by ``s``, the input biases absorb
    ``-s c W 1`` and the read-out is rescaled.
    """
    s, c = norm.scale, norm.center
    new = {}
    for w_name, b_name in (("W_ir", "b_r"), ("W_iz", "b_z"), ("W_in", "b_n")):
        W = getattr(params, w_name)
        new[w_name] = s * W
        new[b_name] = getattr(params, b_name) - s * c * W.sum(axis=1)
    new["w_A"] = params.w_A / s
    new["b_A"] = params.b_A / s + c
    return replace(params, **new)


def sigmoid(a):
    return 0.5 * (1.0 + np.tanh(0.5 * a))


def _entries(x, L):
    e = x.entries if isinstance(x, WindowVector) else np.asarray(x, dtype=float).ravel()
    if e.size != L:
        raise ShapeError(f"input of length {e.size} for a GRU with L={L}")
    return e


def _state(h, m):
    h = h.h if isinstance(h, GruState) else np.asarray(h, dtype=float).ravel()
    if h.size != m:
        raise ShapeError(f"state of length {h.size} for a GRU with m={m}")
    return h


def _cell(p: GruParams, x, h):
    r = sigmoid(p.W_ir @ x + p.W_hr @ h + p.b_r)
    z = sigmoid(p.W_iz @ x + p.W_hz @ h + p.b_z)
    g = p.W_hn @ h
    n = np.tanh(p.W_in @ x + p.b_n + r * g)
    h_new = (1.0 - z) * n + z * h
    return h_new, (r, z, n, g)


def gru_step(params: GruParams, x, h_prev) -> GruState:
    x = _entries(x, params.L)
    h = _state(h_prev, params.m)
    return GruState(_cell(params, x, h)[0])


def _window_matrix(windows, L) -> np.ndarray:
    if isinstance(windows, np.ndarray) and windows.ndim == 2:
        X = np.asarray(windows, dtype=float)
        if X.shape[1] != L:
            raise ShapeError(f"windows have width {X.shape[1]}, expected L={L}")
    else:
        X = np.array([_entries(w, L) for w in windows], dtype=float).reshape(-1, L)
    if X.shape[0] == 0:
        raise ShapeError("empty window sequence")
    return X


def gru_forward(params: GruParams, windows, h0=None, return_states: bool = False):
    """Predictions ``w_A . h(t) + b_A`` with the state threaded through the sequence."""
    X = _window_matrix(windows, params.L)
    h = np.zeros(params.m) if h0 is None else _state(h0, params.m)
    preds = np.empty(X.shape[0])
    states = np.empty((X.shape[0], params.m))
    for k in range(X.shape[0]):
        h, _ = _cell(params, X[k], h)
        states[k] = h
        preds[k] = params.w_A @ h + params.b_A
    if return_states:
        return preds, states
    return preds


def mse_loss(params: GruParams, windows, targets, h0=None) -> float:
    preds = gru_forward(params, windows, h0)
    t = np.asarray(targets, dtype=float).ravel()
    return float(np.mean((preds - t) ** 2))


def _loss_and_grads(p: GruParams, X, targets, h0):
    T = X.shape[0]
    m = p.m
    # input contributions for all steps at once
    AX_r = X @ p.W_ir.T + p.b_r
    AX_z = X @ p.W_iz.T + p.b_z
    AX_n = X @ p.W_in.T + p.b_n
    W_h = np.vstack([p.W_hr, p.W_hz, p.W_hn])

    hs = np.empty((T + 1, m))
    hs[0] = h0
    R = np.empty((T, m))
    Z = np.empty((T, m))
    Nc = np.empty((T, m))
    G = np.empty((T, m))
    for k in range(T):
        h = hs[k]
        hh = W_h @ h
        r = sigmoid(AX_r[k] + hh[:m])
        z = sigmoid(AX_z[k] + hh[m:2 * m])
        gh = hh[2 * m:]
        n = np.tanh(AX_n[k] + r * gh)
        hs[k + 1] = n + z * (h - n)
        R[k], Z[k], Nc[k], G[k] = r, z, n, gh
    preds = hs[1:] @ p.w_A + p.b_A
    err = preds - targets
    loss = float(np.mean(err**2))
    dy = 2.0 * err / T

    DAN = np.empty((T, m))
    D = np.empty((T, 3 * m))
    W_hT = W_h.T
    dh_next = np.zeros(m)
    for k in range(T - 1, -1, -1):
        r, z, n = R[k], Z[k], Nc[k]
        dh = dh_next + dy[k] * p.w_A
        dan = dh * (1.0 - z) * (1.0 - n * n)
        d = D[k]
        d[:m] = dan * G[k] * r * (1.0 - r)
        d[m:2 * m] = dh * (hs[k] - n) * z * (1.0 - z)
        d[2 * m:] = dan * r
        dh_next = dh * z + W_hT @ d
        DAN[k] = dan
    DAR, DAZ, DGH = D[:, :m], D[:, m:2 * m], D[:, 2 * m:]

    Hp = hs[:-1]
    g = {
        "W_ir": DAR.T @ X, "W_iz": DAZ.T @ X, "W_in": DAN.T @ X,
        "W_hr": DAR.T @ Hp, "W_hz": DAZ.T @ Hp, "W_hn": DGH.T @ Hp,
        "b_r": DAR.sum(axis=0), "b_z": DAZ.sum(axis=0), "b_n": DAN.sum(axis=0),
        "w_A": dy @ hs[1:], "b_A": float(dy.sum()),
    }
    return loss, g


def gru_gradients(params: GruParams, windows, targets, h0=None) -> dict:
    """Exact gradients of the sequence MSE with respect to every parameter array."""
    X = _window_matrix(windows, params.L)
    t = np.asarray(targets, dtype=float).ravel()
    if t.size != X.shape[0]:
        raise ShapeError(f"{X.shape[0]} windows but {t.size} targets")
    h = np.zeros(params.m) if h0 is None else _state(h0, params.m)
    return _loss_and_grads(params, X, t, h)[1]


def training_windows(values, L: int):
    """Windows ``x_L(t)`` for ``t = L..N-1`` and their next-sample targets."""
    v = np.asarray(values, dtype=float)
    if v.size < L + 1:
        raise ShapeError(f"need more than L={L} samples, got {v.size}")
    X = hankel(v[:-1], L).data.T
    return X, v[L:]


def train_gru(train, L: int, m: int, hyper: Optional[TrainingConfig] = None,
              return_normalization: bool = False):
    """Full-batch gradient descent with global-norm clipping on one-step MSE.

    With ``hyper.normalize`` the series is mapped onto [-1, 1] for training
    and the map is folded back into the returned parameters, which therefore
    consume raw windows and emit raw predictions.
    """
    hyper = hyper or TrainingConfig()
    v = as_series(train).values
    norm = Normalization.fit(v) if hyper.normalize else Normalization()
    X, y = training_windows(norm.forward(v), L)
    if X.shape[0] < m:
        raise ShapeError(f"{X.shape[0]} training windows for hidden size m={m}")
    rng = np.random.default_rng(hyper.seed)
    p = GruParams.random(m, L, rng)
    arrays = {k: np.array(val, dtype=float) for k, val in p.as_dict().items()}
    h0 = np.zeros(m)
    for epoch in range(hyper.epochs):
        cur = GruParams(**arrays)
        loss, g = _loss_and_grads(cur, X, y, h0)
        if not np.isfinite(loss):
            raise TrainingError("loss became non-finite", epoch)
        gnorm = np.sqrt(sum(float(np.sum(np.square(g[k]))) for k in PARAM_NAMES))
        if not np.isfinite(gnorm):
            raise TrainingError("gradient became non-finite", epoch)
        step = hyper.learning_rate
        if gnorm > hyper.clip_norm:
            step *= hyper.clip_norm / gnorm
        for k in PARAM_NAMES:
            arrays[k] = arrays[k] - step * g[k]
    try:
        trained = GruParams(**arrays)
    except ValueError as exc:
        raise TrainingError(str(exc), hyper.epochs) from exc
    trained = fold_normalization(trained, norm)
    if return_normalization:
        return trained, norm
    return trained


def sparsify_input_weights(params: GruParams, H, delta: float) -> GruParams:
    """Replace each input weight ``W`` by the transpose of a sparse ``A_hat``
    solving ``H^T A_hat ~= H^T W^T``; at most ``m * rk_delta(H)`` nonzeros each."""
    H = H if isinstance(H, TrajectoryMatrix) else np.asarray(H, dtype=float)
    data = getattr(H, "data", H)
    if data.shape[0] != params.L:
        raise ShapeError(f"trajectory matrix has {data.shape[0]} rows, GRU expects L={params.L}")
    new = {}
    for name in INPUT_WEIGHTS:
        W = getattr(params, name)
        rep = sparsify_matrix(data, W.T, delta)
        new[name] = rep.solution.T.copy()
    return replace(params, **new)
