import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import central_differences, gru_step_scalar, relative_error
from spars import (GruParams, GruState, Normalization, ShapeError, TrainingConfig, WindowVector,
                   gru_forward, gru_gradients, gru_step, hankel, sparsify_input_weights,
                   sparse_lsq, train_gru)
from spars.gru_block import PARAM_NAMES, _cell, fold_normalization, mse_loss, training_windows


def with_values(m, L, **kw):
    d = GruParams.zeros(m, L).as_dict()
    d.update(kw)
    return GruParams(**d)


def test_params_shape_validation():
    d = GruParams.zeros(2, 3).as_dict()
    d["W_hz"] = np.zeros((2, 3))
    with pytest.raises(ShapeError):
        GruParams(**d)


def test_zero_network_step():
    h = gru_step(GruParams.zeros(3, 2), WindowVector.from_values([0.4, -1.0]), GruState.zeros(3))
    assert h.h.tolist() == [0.0, 0.0, 0.0]


def test_candidate_bias_only():
    p = with_values(3, 2, b_n=np.ones(3))
    h = gru_step(p, [0.3, 0.9], np.zeros(3)).h
    np.testing.assert_allclose(h, 0.5 * np.tanh(1.0), rtol=0, atol=1e-15)
    assert h[0] == pytest.approx(0.3807970780, abs=1e-10)


def test_saturated_update_gate_carries_state():
    p = with_values(3, 2, b_z=np.full(3, 20.0))
    h_prev = np.array([0.7, -0.2, 0.05])
    h = gru_step(p, [5.0, -4.0], h_prev).h
    np.testing.assert_allclose(h, h_prev, atol=1e-8)


def test_reset_gate_touches_only_hidden_term():
    # with W_hn = 0 the reset gate has no effect on n, whatever its value
    p0 = with_values(1, 1, W_in=np.array([[0.8]]), b_n=np.array([0.1]), W_ir=np.array([[3.0]]))
    p1 = with_values(1, 1, W_in=np.array([[0.8]]), b_n=np.array([0.1]), W_ir=np.array([[-3.0]]))
    x, h = [0.5], [0.2]
    assert gru_step(p0, x, h).h[0] == gru_step(p1, x, h).h[0]
    # with W_hn != 0 it does
    q0 = with_values(1, 1, W_hn=np.array([[1.0]]), W_ir=np.array([[3.0]]))
    q1 = with_values(1, 1, W_hn=np.array([[1.0]]), W_ir=np.array([[-3.0]]))
    assert gru_step(q0, x, h).h[0] != gru_step(q1, x, h).h[0]


def test_forward_zero_network_emits_bias():
    p = with_values(2, 3, b_A=1.25)
    out = gru_forward(p, np.random.default_rng(0).standard_normal((5, 3)))
    assert out.tolist() == [1.25] * 5


def test_forward_two_steps_hand_evaluated():
    p = GruParams(
        W_ir=[[0.5]], W_iz=[[-0.3]], W_in=[[0.9]], W_hr=[[0.2]], W_hz=[[0.4]], W_hn=[[-0.7]],
        b_r=[0.1], b_z=[-0.2], b_n=[0.05], w_A=[1.5], b_A=-0.25,
    )
    sig = lambda a: 1 / (1 + np.exp(-a))
    h = 0.0
    expected = []
    for x in (1.0, -2.0):
        r = sig(0.5 * x + 0.2 * h + 0.1)
        z = sig(-0.3 * x + 0.4 * h - 0.2)
        n = np.tanh(0.9 * x + 0.05 + r * (-0.7 * h))
        h = (1 - z) * n + z * h
        expected.append(1.5 * h - 0.25)
    np.testing.assert_allclose(gru_forward(p, [[1.0], [-2.0]]), expected, rtol=0, atol=1e-14)


def test_forward_rejects_empty():
    with pytest.raises(ShapeError):
        gru_forward(GruParams.zeros(1, 2), np.zeros((0, 2)))


def test_forward_matches_scalar_oracle():
    rng = np.random.default_rng(3)
    p = GruParams.random(3, 4, rng)
    X = rng.standard_normal((6, 4))
    h = np.zeros(3)
    for k, pred in enumerate(gru_forward(p, X)):
        h = gru_step_scalar(p.as_dict(), X[k], h)
        assert pred == pytest.approx(p.w_A @ h + p.b_A, abs=1e-13)


def test_zero_params_zero_targets_zero_gradient():
    g = gru_gradients(GruParams.zeros(2, 3), np.ones((4, 3)), np.zeros(4))
    assert all(np.all(g[k] == 0) for k in PARAM_NAMES)


def test_gradients_small_instance_match_differences():
    rng = np.random.default_rng(21)
    p = GruParams.random(2, 3, rng)
    X = rng.standard_normal((5, 3))
    y = rng.standard_normal(5)
    g = gru_gradients(p, X, y)
    fd = central_differences(p.as_dict(), X, y, np.zeros(2))
    for k in PARAM_NAMES:
        assert np.shape(g[k]) == np.shape(getattr(p, k))
        assert relative_error(g[k], fd[k]) <= 1e-5


def test_saturated_carry_kills_candidate_gradient():
    rng = np.random.default_rng(2)
    p = GruParams.random(2, 3, rng)
    d = p.as_dict()
    d["b_z"] = np.full(2, 40.0)
    d["w_A"] = np.zeros(2)
    p = GruParams(**d)
    X = rng.standard_normal((4, 3))
    y = rng.standard_normal(4)
    g = gru_gradients(p, X, y)
    fd = central_differences(p.as_dict(), X, y, np.zeros(2))
    assert np.all(g["W_in"] == 0)
    np.testing.assert_allclose(fd["W_in"], 0, atol=1e-9)


def test_gradient_shape_mismatch():
    with pytest.raises(ShapeError):
        gru_gradients(GruParams.zeros(2, 3), np.ones((4, 3)), np.zeros(3))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 5), st.integers(1, 5))
def test_gate_ranges_and_convex_update(seed, m, L):
    rng = np.random.default_rng(seed)
    p = GruParams.random(m, L, rng)
    d = {k: np.asarray(v) * 4 for k, v in p.as_dict().items()}
    p = GruParams(**d)
    x = rng.standard_normal(L) * 5
    h = rng.uniform(-1, 1, m)
    h_new, (r, z, n, _) = _cell(p, x, h)
    assert np.all((r >= 0) & (r <= 1)) and np.all((z >= 0) & (z <= 1))
    assert np.all(np.abs(n) <= 1)
    assert np.all(np.abs(h_new) <= np.maximum(np.abs(n), np.abs(h)) + 1e-15)


def test_states_stay_inside_unit_interval():
    rng = np.random.default_rng(5)
    p = GruParams.random(4, 3, rng)
    _, states = gru_forward(p, rng.standard_normal((50, 3)), return_states=True)
    assert np.all(np.abs(states) < 1)


def test_fold_normalization_equivalence():
    rng = np.random.default_rng(9)
    p = GruParams.random(3, 4, rng)
    x = rng.uniform(10, 20, size=40)
    norm = Normalization.fit(x)
    u = norm.forward(x)
    X, _ = training_windows(x, 4)
    U, _ = training_windows(u, 4)
    raw = gru_forward(fold_normalization(p, norm), X)
    np.testing.assert_allclose(raw, norm.inverse(gru_forward(p, U)), rtol=1e-12)


def test_train_constant_series():
    x = np.full(60, 3.0)
    p = train_gru(x, 4, 8)
    X, y = training_windows(x, 4)
    assert mse_loss(p, X, y) <= 1e-4


def test_train_sine_beats_zero_predictor():
    x = np.sin(2 * np.pi * np.arange(1, 201) / 20)
    p = train_gru(x, 20, 8, TrainingConfig(epochs=150))
    X, y = training_windows(x, 20)
    assert mse_loss(p, X, y) < float(np.mean(y ** 2))


def test_train_deterministic():
    x = np.cos(np.arange(40) / 3.0)
    a = train_gru(x, 3, 4, TrainingConfig(epochs=30, seed=4))
    b = train_gru(x, 3, 4, TrainingConfig(epochs=30, seed=4))
    for k in PARAM_NAMES:
        assert np.array_equal(getattr(a, k), getattr(b, k))


def test_sparsify_full_rank_keeps_action():
    rng = np.random.default_rng(6)
    x = rng.standard_normal(60)
    H = hankel(x, 5)
    p = GruParams.random(3, 5, rng)
    q = sparsify_input_weights(p, H, 1e-10)
    for k in ("W_ir", "W_iz", "W_in"):
        np.testing.assert_allclose(H.data.T @ getattr(q, k).T, H.data.T @ getattr(p, k).T, atol=1e-8)
    for k in ("W_hr", "W_hz", "W_hn", "b_r", "b_z", "b_n", "w_A"):
        assert np.array_equal(getattr(q, k), getattr(p, k))


def test_sparsify_rank_one_and_certificate():
    H = hankel(np.full(30, 2.0), 6)
    p = GruParams.random(4, 6, np.random.default_rng(1))
    q = sparsify_input_weights(p, H, 1e-8)
    for k in ("W_ir", "W_iz", "W_in"):
        W, Wh = getattr(p, k), getattr(q, k)
        assert np.count_nonzero(Wh) <= 4
        rep = sparse_lsq(H.data.T, H.data.T @ W.T, 1e-8)
        np.testing.assert_array_equal(rep.solution.T, Wh)
        assert rep.certificate_holds()


def test_sparsify_zero_weights():
    H = hankel(np.random.default_rng(0).standard_normal(30), 4)
    q = sparsify_input_weights(GruParams.zeros(2, 4), H, 1e-8)
    assert np.count_nonzero(q.W_ir) == np.count_nonzero(q.W_iz) == np.count_nonzero(q.W_in) == 0
