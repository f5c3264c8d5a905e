"""Semilinear sparse (SpARS) model: sparse AR + GRU blocks + mixing layer.

Fitting runs in a fixed order:

0. lag estimation from the autocorrelation of the fitting split
1. sparse AR coefficients on the fitting split
2. GRU blocks trained independently on the fitting split
3. sparse re-representation of selected blocks' input weights
4. mixing weights by sparse least squares on the mixing split

The mixed one-step prediction is ``sum_j w_j y_j(t)`` with ``y_1`` the AR
output and ``y_{k+1}`` the output of GRU block ``k``.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (DivergenceError, ModelFormatError, ModelVersionError,
                     RangeError, ShapeError, SparsError, StageError)
from .gru_block import (PARAM_NAMES, GruParams, Normalization, TrainingConfig,
                        gru_forward, sparsify_input_weights, train_gru)
from .linear_ar import ArCoefficients, fit_ar, predict_linear
from .signal_core import WindowVector, as_series, estimate_lag, hankel
from .sparse_solve import sparse_lsq

FORMAT_NAME = "spars-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class SparsConfig:
    lag: Optional[int] = None
    delta: float = 1e-8
    fit_fraction: float = 0.5
    mix_fraction: float = 0.25
    hidden: int = 8
    blocks: int = 2
    sparsify_blocks: tuple = (0,)
    epochs: int = 500
    learning_rate: float = 0.2
    clip_norm: float = 1.0
    seed: int = 0
    use_linear: bool = True

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.fit_fraction <= 0 or self.mix_fraction <= 0:
            raise ValueError("split fractions must be positive")
        if self.fit_fraction + self.mix_fraction > 1:
            raise ValueError("split fractions must sum to at most 1")
        if self.blocks < 0 or self.hidden < 1:
            raise ValueError("need hidden >= 1 and blocks >= 0")


@dataclass(frozen=True)
class GruBlock:
    """A trained GRU block; the state is threaded across consecutive windows."""

    params: GruParams
    sparse_inputs: bool = False

    def initial_state(self):
        return np.zeros(self.params.m)

    def run(self, X, h0=None):
        preds, states = gru_forward(self.params, X, h0, return_states=True)
        return preds, states[-1]


@dataclass
class StageRecord:
    order: int
    stage: str
    residual: float = float("nan")
    nnz: int = -1
    detail: dict = field(default_factory=dict)
    elapsed: float = 0.0


@dataclass(frozen=True)
class SparsModel:
    ar: Optional[ArCoefficients]
    gru_blocks: tuple
    mix: np.ndarray
    L: int
    normalization: Normalization = Normalization()
    fit_report: tuple = ()
    splits: tuple = (0, 0, 0)
    lag_fallback: bool = False

    def __post_init__(self):
        mix = np.asarray(self.mix, dtype=float).ravel()
        object.__setattr__(self, "mix", mix)
        object.__setattr__(self, "gru_blocks", tuple(self.gru_blocks))
        if mix.size != len(self.gru_blocks) + 1:
            raise ShapeError(f"{mix.size} mixing weights for {len(self.gru_blocks)} GRU blocks")
        if self.ar is not None and self.ar.L != self.L:
            raise ShapeError(f"AR lag {self.ar.L} differs from model lag {self.L}")

    @property
    def m(self) -> int:
        for b in self.gru_blocks:
            if isinstance(b, GruBlock):
                return b.params.m
        return 0

    def stage(self, name: str) -> StageRecord:
        for rec in self.fit_report:
            if rec.stage == name:
                return rec
        raise KeyError(name)


@dataclass(frozen=True)
class ForecastResult:
    predictions: np.ndarray
    per_step_abs_error: Optional[np.ndarray] = None
    rmse: Optional[float] = None


def rmse(pred, truth) -> float:
    e = np.asarray(pred, dtype=float) - np.asarray(truth, dtype=float)
    return float(np.sqrt(np.mean(e * e)))


def window_matrix(values, L: int) -> np.ndarray:
    """Rows are the windows ``x_L(t)`` for ``t = L..N-1`` (each has a next sample)."""
    v = np.asarray(values, dtype=float)
    if v.size < L + 1:
        raise RangeError(f"need more than L={L} samples, got {v.size}")
    return hankel(v[:-1], L).data.T


def _linear_column(model_ar, X):
    if model_ar is None:
        return np.zeros(X.shape[0])
    return X[:, ::-1] @ model_ar.c


def block_outputs(model_or_parts, values) -> np.ndarray:
    """Matrix of ``y_j(t)`` for every window of ``values``, GRU states threaded from zero.

    Column 0 is the linear block; column ``k`` is GRU block ``k``.
    """
    if isinstance(model_or_parts, SparsModel):
        ar, blocks, L = model_or_parts.ar, model_or_parts.gru_blocks, model_or_parts.L
    else:
        ar, blocks, L = model_or_parts
    X = window_matrix(values, L)
    cols = [_linear_column(ar, X)]
    for b in blocks:
        cols.append(np.asarray(b.run(X, b.initial_state())[0], dtype=float))
    return np.column_stack(cols)


def one_step_predictions(model: SparsModel, series) -> np.ndarray:
    """Mixed predictions of ``x_{t+1}`` for ``t = L..N-1`` using true windows."""
    v = as_series(series).values
    return block_outputs(model, v) @ model.mix


def residual_series(model: SparsModel, series) -> np.ndarray:
    """The unmodelled error term ``x_{t+1} - S(x_L(t))``."""
    v = as_series(series).values
    return v[model.L:] - one_step_predictions(model, v)


def split_sizes(n: int, config: SparsConfig) -> tuple:
    n_fit = int(np.floor(config.fit_fraction * n))
    n_mix = int(np.floor(config.mix_fraction * n))
    return n_fit, n_mix, n


def fit_mixing(outputs, targets, delta: float):
    """Sparse least-squares mixing weights for a ``(rows, blocks)`` output matrix."""
    return sparse_lsq(np.asarray(outputs, dtype=float), np.asarray(targets, dtype=float), delta)


class _Stages:
    def __init__(self):
        self.records = []
        self._t0 = time.perf_counter()

    def run(self, name, fn):
        start = time.perf_counter()
        try:
            out = fn()
        except StageError:
            raise
        except (SparsError, ValueError, np.linalg.LinAlgError) as exc:
            raise StageError(name, exc) from exc
        rec = StageRecord(len(self.records), name, elapsed=time.perf_counter() - start)
        self.records.append(rec)
        return out, rec


def fit_spars(series, config: Optional[SparsConfig] = None, blocks: Optional[Sequence] = None) -> SparsModel:
    """Fit a SpARS model.

    ``blocks`` injects pre-built GRU-like blocks (anything with ``run`` and
    ``initial_state``), skipping training and sparsification.
    """
    config = config or SparsConfig()
    s = as_series(series)
    v = s.values
    n = len(s)
    n_fit, n_mix, _ = split_sizes(n, config)
    fit_part = v[:n_fit]
    stages = _Stages()

    def lag_stage():
        if config.lag is not None:
            return config.lag, False
        est = estimate_lag(fit_part)
        return est.lag, est.fallback

    (L, lag_fallback), rec = stages.run("lag", lag_stage)
    rec.detail = {"L": L, "fallback": lag_fallback}
    if n < 4 * L:
        raise StageError("lag", RangeError(f"series length {n} below 4*L={4 * L}"))
    if n_fit < L + 2 or n_mix < 1:
        raise StageError("lag", RangeError(f"splits ({n_fit}, {n_mix}) too small for L={L}"))

    def linear_stage():
        if not config.use_linear:
            return None
        return fit_ar(fit_part, L, config.delta)

    ar, rec = stages.run("linear", linear_stage)
    if ar is not None:
        rec.residual = ar.report.residual_frobenius
        rec.nnz = ar.nnz

    def gru_stage():
        if blocks is not None:
            return list(blocks)
        out = []
        for k in range(config.blocks):
            hyper = TrainingConfig(config.epochs, config.learning_rate, config.clip_norm, config.seed + k)
            out.append(GruBlock(train_gru(fit_part, L, config.hidden, hyper)))
        return out

    trained, rec = stages.run("gru", gru_stage)
    rec.detail = {"blocks": len(trained)}

    def sparsify_stage():
        if blocks is not None:
            return trained
        H = hankel(fit_part, L)
        out = []
        for k, b in enumerate(trained):
            if k in config.sparsify_blocks:
                b = GruBlock(sparsify_input_weights(b.params, H, config.delta), True)
            out.append(b)
        return out

    final_blocks, rec = stages.run("sparsify", sparsify_stage)
    rec.nnz = int(sum(
        np.count_nonzero(getattr(b.params, w))
        for b in final_blocks if isinstance(b, GruBlock) and b.sparse_inputs
        for w in ("W_ir", "W_iz", "W_in")
    ))

    def mixing_stage():
        Y = block_outputs((ar, final_blocks, L), v[: n_fit + n_mix])
        # row i predicts sample index L + i (0-based)
        rows = slice(n_fit - L, n_fit + n_mix - L)
        return fit_mixing(Y[rows], v[n_fit:n_fit + n_mix], config.delta)

    mix_rep, rec = stages.run("mixing", mixing_stage)
    rec.residual = mix_rep.residual_frobenius
    rec.nnz = mix_rep.nnz
    rec.detail = {"weights": [float(w) for w in mix_rep.solution]}

    return SparsModel(
        ar=ar,
        gru_blocks=tuple(final_blocks),
        mix=mix_rep.solution,
        L=L,
        normalization=Normalization.fit(fit_part),
        fit_report=tuple(stages.records),
        splits=(n_fit, n_mix, n),
        lag_fallback=lag_fallback,
    )


def holdout_predictions(model: SparsModel, series):
    """One-step predictions and truth over the held-out tail of ``series``."""
    v = as_series(series).values
    n_fit, n_mix, _ = model.splits
    start = n_fit + n_mix
    if start >= v.size:
        raise RangeError("no held-out samples after the fitting and mixing splits")
    preds = one_step_predictions(model, v)
    return preds[start - model.L:], v[start:]


def holdout_rmse(model: SparsModel, series) -> float:
    p, t = holdout_predictions(model, series)
    return rmse(p, t)


def _window_entries(w, L):
    e = w.entries if isinstance(w, WindowVector) else np.asarray(w, dtype=float).ravel()
    if e.size != L:
        raise ShapeError(f"window of length {e.size} for a lag-{L} model")
    return e


def initial_states(model: SparsModel) -> list:
    return [b.initial_state() for b in model.gru_blocks]


def warm_states(model: SparsModel, history) -> list:
    """GRU states after threading through every window of ``history``."""
    X = window_matrix(np.append(as_series(history).values, 0.0), model.L)
    return [b.run(X, b.initial_state())[1] for b in model.gru_blocks]


def _mixed_step(model, e, states):
    ys = np.empty(model.mix.size)
    ys[0] = predict_linear(model.ar, e) if model.ar is not None else 0.0
    new_states = []
    for k, b in enumerate(model.gru_blocks):
        out, h = b.run(e[None, :], states[k])
        ys[k + 1] = out[0]
        new_states.append(h)
    return float(model.mix @ ys), new_states


def predict_one(model: SparsModel, w, states: Optional[list] = None) -> float:
    """Mixed prediction of the next sample from one window.

    GRU blocks start from ``states`` (zero states by default).
    """
    e = _window_entries(w, model.L)
    states = initial_states(model) if states is None else states
    return _mixed_step(model, e, states)[0]


def rolling_forecast(model: SparsModel, seed_window, horizon: int, truth=None,
                     states: Optional[list] = None, max_abs: Optional[float] = None) -> ForecastResult:
    """Closed-loop forecast: each prediction is fed back into the window.

    Raises :class:`DivergenceError` on a non-finite prediction, or when
    ``max_abs`` is given and a prediction exceeds it in magnitude.
    """
    if horizon < 1:
        raise RangeError("horizon must be at least 1")
    buf = np.array(_window_entries(seed_window, model.L), dtype=float)
    states = initial_states(model) if states is None else list(states)
    preds = np.empty(horizon)
    for step in range(horizon):
        y, states = _mixed_step(model, buf, states)
        if not np.isfinite(y):
            raise DivergenceError("non-finite prediction; check the spectral radius", step)
        if max_abs is not None and abs(y) > max_abs:
            raise DivergenceError(f"prediction magnitude {abs(y):.3g} exceeds {max_abs:.3g}", step)
        preds[step] = y
        buf = np.roll(buf, -1)
        buf[-1] = y
    if truth is None:
        return ForecastResult(preds)
    t = as_series(truth).values[:horizon]
    if t.size < horizon:
        raise RangeError(f"truth has {t.size} samples for horizon {horizon}")
    err = np.abs(preds - t)
    return ForecastResult(preds, err, float(np.sqrt(np.mean(err**2))))


# --- persistence -----------------------------------------------------------

def _pack(arr) -> dict:
    a = np.asarray(arr, dtype=float)
    return {"shape": list(a.shape), "data": [float(x) for x in a.ravel(order="C")]}


def _unpack(obj) -> np.ndarray:
    try:
        shape = tuple(int(d) for d in obj["shape"])
        data = np.array(obj["data"], dtype=float)
        return data.reshape(shape, order="C")
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"bad array record: {exc}") from exc


def model_to_dict(model: SparsModel) -> dict:
    blocks = []
    for b in model.gru_blocks:
        if not isinstance(b, GruBlock):
            raise TypeError(f"cannot serialise block of type {type(b).__name__}")
        arrays = {name: _pack(getattr(b.params, name)) for name in PARAM_NAMES}
        blocks.append({"sparse_inputs": b.sparse_inputs, "arrays": arrays})
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "L": model.L,
        "m": model.m,
        "block_count": len(model.gru_blocks),
        "normalization": {"center": model.normalization.center, "scale": model.normalization.scale},
        "splits": list(model.splits),
        "lag_fallback": model.lag_fallback,
        "ar": None if model.ar is None else {"delta": model.ar.delta, "c": _pack(model.ar.c)},
        "mix": _pack(model.mix),
        "gru_blocks": blocks,
        "fit_report": [
            {"order": r.order, "stage": r.stage,
             "residual": None if not np.isfinite(r.residual) else r.residual,
             "nnz": r.nnz}
            for r in model.fit_report
        ],
    }


def model_from_dict(d: dict) -> SparsModel:
    if not isinstance(d, dict) or d.get("format") != FORMAT_NAME:
        raise ModelFormatError("not a SpARS model file")
    if d.get("version") != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model format version {d.get('version')!r}")
    try:
        L = int(d["L"])
        ar = None
        if d["ar"] is not None:
            c = _unpack(d["ar"]["c"])
            ar = ArCoefficients(c, c.size, int(np.count_nonzero(c)), float(d["ar"]["delta"]))
        blocks = []
        for bd in d["gru_blocks"]:
            arrays = {name: _unpack(bd["arrays"][name]) for name in PARAM_NAMES}
            arrays["b_A"] = float(arrays["b_A"])
            blocks.append(GruBlock(GruParams(**arrays), bool(bd["sparse_inputs"])))
        if len(blocks) != int(d["block_count"]):
            raise ModelFormatError("block_count does not match stored blocks")
        norm = Normalization(float(d["normalization"]["center"]), float(d["normalization"]["scale"]))
        report = tuple(
            StageRecord(int(r["order"]), str(r["stage"]),
                        float("nan") if r["residual"] is None else float(r["residual"]), int(r["nnz"]))
            for r in d.get("fit_report", [])
        )
        return SparsModel(ar, tuple(blocks), _unpack(d["mix"]), L, norm, report,
                          tuple(int(x) for x in d["splits"]), bool(d["lag_fallback"]))
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc


def save_model(model: SparsModel, path) -> None:
    """Write the model as sorted, indented JSON; identical models give identical bytes."""
    text = json.dumps(model_to_dict(model), indent=1, sort_keys=True, allow_nan=False)
    Path(path).write_text(text + "\n")


def load_model(path) -> SparsModel:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: malformed model file ({exc})") from exc
    return model_from_dict(d)
