"""Sparse versus dense autoregression on a clean periodic signal.

With L equal to the period, the exact model is x_{t+1} = x_{t-L+1}: one
nonzero.  Least squares spreads the same fit over every lag.
"""

import numpy as np

from spars import companion, fit_ar, fit_dense_ar, shift_consistency
from spars.generators import periodic

x = periodic(n=480, period=24).values
train = x[:240]

sparse = fit_ar(train, 24, delta=1e-8)
dense = fit_dense_ar(train, 24)
print(f"sparse AR: nnz={sparse.nnz}, nonzero lags={np.flatnonzero(sparse.c) + 1}")
print(f"dense AR:  nnz={dense.nnz}")

C = companion(sparse).data
print("companion is a cyclic shift:", np.allclose(np.linalg.matrix_power(C, 24), np.eye(24)))

for S in (1, 5, 24):
    print(f"shift consistency S={S:<3} sparse={shift_consistency(sparse, x, S, relative=True):.2e}"
          f"  dense={shift_consistency(dense, x, S, relative=True):.2e}")
