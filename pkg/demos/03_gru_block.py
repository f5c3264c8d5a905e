"""A single GRU block: gradient check, training and input-weight sparsification."""

import numpy as np

from spars import GruParams, TrainingConfig, gru_gradients, hankel, sparsify_input_weights, train_gru
from spars.gru_block import PARAM_NAMES, mse_loss, training_windows

rng = np.random.default_rng(0)
p = GruParams.random(3, 4, rng)
X = rng.standard_normal((6, 4))
y = rng.standard_normal(6)

# finite differences on one entry of each array
g = gru_gradients(p, X, y)
step = 1e-6
for name in PARAM_NAMES:
    base = np.array(getattr(p, name), dtype=float)
    idx = (0,) * base.ndim
    hi, lo = base.copy(), base.copy()
    hi[idx] += step
    lo[idx] -= step
    up = mse_loss(GruParams(**{**p.as_dict(), name: hi}), X, y)
    dn = mse_loss(GruParams(**{**p.as_dict(), name: lo}), X, y)
    print(f"{name:5s} bptt={float(np.asarray(g[name])[idx]):+.6f}  fd={(up - dn) / (2 * step):+.6f}")

t = np.arange(1, 301)
x = np.sin(2 * np.pi * t / 20) + 0.3 * np.sin(2 * np.pi * t / 7)
params = train_gru(x[:200], 20, 8, TrainingConfig(epochs=300))
Xw, yw = training_windows(x[:200], 20)
print(f"training mse {mse_loss(params, Xw, yw):.4f} vs zero predictor {np.mean(yw ** 2):.4f}")

H = hankel(x[:200], 20)
sp = sparsify_input_weights(params, H, 1e-8)
for name in ("W_ir", "W_iz", "W_in"):
    print(f"{name}: {np.count_nonzero(getattr(params, name))} -> {np.count_nonzero(getattr(sp, name))} nonzeros")
