import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stubs import ConstantBlock, FunctionBlock, logistic_series, logistic_step
from spars import (ArCoefficients, DivergenceError, ModelFormatError, ModelVersionError,
                   SparsConfig, SparsModel, StageError, fit_spars, hankel, holdout_rmse, load_model,
                   predict_linear, predict_one, rolling_forecast, save_model, thresholded_rank,
                   window)
from spars.generators import alternating, recurrence, sine
from spars.mixer_model import (block_outputs, holdout_predictions, model_from_dict, model_to_dict,
                               residual_series, split_sizes, warm_states)

FAST = SparsConfig(epochs=40)


@pytest.fixture(scope="module")
def sine_model():
    x = sine(400, 20).values
    return fit_spars(x, SparsConfig(epochs=120)), x


def test_config_validation():
    with pytest.raises(ValueError):
        SparsConfig(delta=0)
    with pytest.raises(ValueError):
        SparsConfig(fit_fraction=0.8, mix_fraction=0.3)


def test_split_sizes():
    assert split_sizes(480, SparsConfig()) == (240, 120, 480)


def test_linear_recurrence_weights_linear_block():
    x = recurrence(160).values
    model = fit_spars(x, FAST)
    assert abs(model.mix[0] - 1) <= 1e-3
    assert np.sum(np.abs(model.mix[1:])) <= 1e-2
    assert len(model.mix) == len(model.gru_blocks) + 1 == 3


def test_stub_block_without_linear():
    x = logistic_series(120)
    cfg = SparsConfig(lag=3, use_linear=False)
    model = fit_spars(x, cfg, blocks=[ConstantBlock(0.5), FunctionBlock(logistic_step)])
    assert model.ar is None
    assert model.mix[0] == 0.0 and model.mix[1] == 0.0
    assert abs(model.mix[2] - 1.0) <= 1e-12


def test_constant_signal():
    x = np.full(120, 2.5)
    model = fit_spars(x, FAST)
    assert model.lag_fallback
    assert holdout_rmse(model, x) <= 1e-6


def test_stage_order_and_report(sine_model):
    model, _ = sine_model
    names = [r.stage for r in model.fit_report]
    assert names == ["lag", "linear", "gru", "sparsify", "mixing"]
    assert [r.order for r in model.fit_report] == list(range(5))
    assert model.stage("linear").nnz == model.ar.nnz


def test_ar_nnz_within_delta_rank(sine_model):
    model, x = sine_model
    n_fit = model.splits[0]
    r = thresholded_rank(hankel(x[:n_fit - 1], model.L).data, model.ar.delta).rank
    assert model.ar.nnz <= r


def test_sparsified_block_bound(sine_model):
    model, x = sine_model
    r = thresholded_rank(hankel(x[:model.splits[0]], model.L).data, 1e-8).rank
    b0 = model.gru_blocks[0]
    assert b0.sparse_inputs and not model.gru_blocks[1].sparse_inputs
    for k in ("W_ir", "W_iz", "W_in"):
        assert np.count_nonzero(getattr(b0.params, k)) <= model.m * r


def test_sine_rolling_forecast(sine_model):
    model, x = sine_model
    start = sum(model.splits[:2])
    seed = window(x, model.L, start)
    res = rolling_forecast(model, seed, 40, truth=x[start:start + 40],
                           states=warm_states(model, x[:start]))
    # the fixture already spans [-1, 1]
    assert res.rmse <= 0.05


def test_predict_one_identity_mix():
    ar = ArCoefficients.from_values((0.3, -0.2, 0.9))
    blocks = (ConstantBlock(7.0), ConstantBlock(-1.0))
    model = SparsModel(ar, blocks, (1.0, 0.0, 0.0), 3)
    w = np.array([0.1, 0.4, -2.0])
    assert predict_one(model, w) == predict_linear(ar, w)
    zero = SparsModel(ar, blocks, (0.0, 0.0, 0.0), 3)
    assert predict_one(zero, w) == 0.0
    stubs = SparsModel(None, (ConstantBlock(4.0), ConstantBlock(4.0)), (0.0, 0.5, 0.5), 3)
    assert predict_one(stubs, w) == 4.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31))
def test_predict_is_linear_in_mix(seed):
    rng = np.random.default_rng(seed)
    ar = ArCoefficients.from_values(rng.standard_normal(4))
    blocks = (FunctionBlock(lambda r: np.sin(r).sum()), FunctionBlock(lambda r: r[0] * r[-1]))
    a, b = rng.standard_normal(3), rng.standard_normal(3)
    s, t = rng.standard_normal(2)
    w = rng.standard_normal(4)
    f = lambda mix: predict_one(SparsModel(ar, blocks, mix, 4), w)
    assert f(s * a + t * b) == pytest.approx(s * f(a) + t * f(b), abs=1e-10)


def test_rolling_alternation_exact():
    model = SparsModel(ArCoefficients.from_values((-1, 0)), (), (1.0,), 2)
    truth = alternating(12).values[2:]
    res = rolling_forecast(model, alternating(2).values, 10, truth=truth)
    assert res.rmse == 0.0
    assert res.predictions.tolist() == truth.tolist()


def test_rolling_unstable_diverges():
    model = SparsModel(ArCoefficients.from_values((1.1,)), (), (1.0,), 1)
    res = rolling_forecast(model, [1.0], 200)
    assert np.all(np.diff(res.predictions) > 0)
    with pytest.raises(DivergenceError) as info:
        rolling_forecast(model, [1.0], 200, max_abs=1e6)
    assert info.value.step == int(np.ceil(np.log(1e6) / np.log(1.1))) - 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 30))
def test_rmse_matches_abs_errors(seed, horizon):
    rng = np.random.default_rng(seed)
    model = SparsModel(ArCoefficients.from_values(rng.uniform(-0.5, 0.5, 3)), (), (1.0,), 3)
    truth = rng.standard_normal(horizon)
    res = rolling_forecast(model, rng.standard_normal(3), horizon, truth=truth)
    np.testing.assert_allclose(res.per_step_abs_error, np.abs(res.predictions - truth))
    assert res.rmse == pytest.approx(np.sqrt(np.mean(res.per_step_abs_error ** 2)))


def test_residual_series_is_error_term(sine_model):
    model, x = sine_model
    e = residual_series(model, x)
    assert e.size == x.size - model.L
    assert np.max(np.abs(e)) <= 1e-8


def test_holdout_alignment(sine_model):
    model, x = sine_model
    p, t = holdout_predictions(model, x)
    assert t.size == x.size - sum(model.splits[:2])
    assert p.size == t.size


def test_stage_error_tag():
    with pytest.raises(StageError) as info:
        fit_spars(np.zeros(40), SparsConfig(lag=3, epochs=1))
    assert info.value.stage == "linear"


def test_round_trip_exact(tmp_path, sine_model):
    model, x = sine_model
    path = tmp_path / "m.json"
    save_model(model, path)
    back = load_model(path)
    assert np.array_equal(back.ar.c, model.ar.c) and np.array_equal(back.mix, model.mix)
    for a, b in zip(model.gru_blocks, back.gru_blocks):
        for k, v in a.params.as_dict().items():
            assert np.array_equal(getattr(b.params, k), v)
    assert back.L == model.L and back.splits == model.splits
    assert back.normalization == model.normalization
    np.testing.assert_array_equal(block_outputs(back, x), block_outputs(model, x))
    save_model(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_truncated_file(tmp_path, sine_model):
    path = tmp_path / "m.json"
    save_model(sine_model[0], path)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_version_mismatch(tmp_path, sine_model):
    d = model_to_dict(sine_model[0])
    d["version"] = 99
    path = tmp_path / "m.json"
    path.write_text(json.dumps(d))
    with pytest.raises(ModelVersionError):
        load_model(path)
    d["version"] = 1
    del d["gru_blocks"][0]["arrays"]["W_hn"]
    with pytest.raises(ModelFormatError):
        model_from_dict(d)
