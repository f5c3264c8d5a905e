"""Lag and period estimation on a signal with an aperiodic start.

A random-walk head is followed by a 12-sample pattern repeated with small
jitter.  The ACF picks a lag for the autoregressor; the AEP scan finds where
the repetition begins.
"""

import numpy as np

from spars import autocorrelation, estimate_lag, estimate_period, hankel
from spars.generators import aep

series = aep(n=400, head=30, period=12, epsilon=0.01, seed=4)
x = series.values

acf = autocorrelation(x, 40)
print("acf at lags 1..13:", np.round(acf[1:14], 3))

lag = estimate_lag(x)
print(f"estimated lag L={lag.lag} (fallback={lag.fallback})")

for eps in (0.001, 0.01, 0.1):
    prof = estimate_period(x, eps)
    print(f"epsilon={eps:<6} T={prof.T:<3} S={prof.S:<4} satisfied={prof.satisfied}")

# the trajectory matrix of the tail has small numerical rank
prof = estimate_period(x, 0.01)
H = hankel(x[prof.S - 1:], 24)
s = np.linalg.svd(H.data, compute_uv=False)
print("leading singular values of the tail trajectory matrix:", np.round(s[:8], 3))
