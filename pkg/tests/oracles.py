"""Independent reference computations used to derive expected test values.

Nothing here imports the package's numerical routines.
"""

import itertools
import math

import numpy as np


def acf_brute(x, lag):
    """Biased sample autocorrelation at one lag, by explicit double loop."""
    x = [float(v) for v in x]
    n = len(x)
    mu = sum(x) / n
    num = sum((x[t] - mu) * (x[t + lag] - mu) for t in range(n - lag))
    den = sum((v - mu) ** 2 for v in x)
    return num / den


def aep_holds(x, T, S, eps):
    """Direct check of |x_{t+kT} - x_t| <= eps for t >= S (1-based), all k in range."""
    n = len(x)
    for t in range(S, n + 1):
        k = 1
        while t + k * T <= n:
            if abs(x[t + k * T - 1] - x[t - 1]) > eps:
                return False
            k += 1
    return True


def smallest_tail_start(x, T, eps):
    for S in range(1, len(x) + 2):
        if aep_holds(x, T, S, eps):
            return S
    return len(x) + 1


def best_sparse_lsq(A, y, max_support):
    """Exhaustive search: smallest residual over every support of size <= max_support.

    Returns {size: (residual, support, coefficients)} keeping the best per size.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    best = {0: (float(np.linalg.norm(y)), (), np.zeros(0))}
    for k in range(1, max_support + 1):
        for supp in itertools.combinations(range(A.shape[1]), k):
            sub = A[:, supp]
            coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
            res = float(np.linalg.norm(sub @ coef - y))
            if k not in best or res < best[k][0] - 1e-14:
                best[k] = (res, supp, coef)
    return best


def _sig(a):
    return 1 / (1 + math.exp(-a)) if isinstance(a, float) else 1 / (1 + np.exp(-a))


def gru_step_scalar(p, x, h, dtype=float):
    """Component-by-component evaluation of one GRU update.

    ``p`` is a dict of plain arrays; arithmetic runs in ``dtype``.
    """
    one = dtype(1)
    m, L = np.shape(p["W_ir"])
    get = lambda name: np.asarray(p[name], dtype=dtype)
    Wir, Wiz, Win = get("W_ir"), get("W_iz"), get("W_in")
    Whr, Whz, Whn = get("W_hr"), get("W_hz"), get("W_hn")
    br, bz, bn = get("b_r"), get("b_z"), get("b_n")
    x = np.asarray(x, dtype=dtype)
    h = np.asarray(h, dtype=dtype)
    out = np.empty(m, dtype=dtype)
    for j in range(m):
        ar = br[j] + sum(Wir[j, i] * x[i] for i in range(L)) + sum(Whr[j, i] * h[i] for i in range(m))
        az = bz[j] + sum(Wiz[j, i] * x[i] for i in range(L)) + sum(Whz[j, i] * h[i] for i in range(m))
        r = one / (one + np.exp(-ar))
        z = one / (one + np.exp(-az))
        inner = bn[j] + sum(Win[j, i] * x[i] for i in range(L))
        hid = sum(Whn[j, i] * h[i] for i in range(m))
        n = np.tanh(inner + r * hid)
        out[j] = (one - z) * n + z * h[j]
    return out


def gru_loss_scalar(p, X, targets, h0, dtype=np.longdouble):
    h = np.asarray(h0, dtype=dtype)
    wA = np.asarray(p["w_A"], dtype=dtype)
    bA = dtype(p["b_A"])
    total = dtype(0)
    for x, t in zip(X, targets):
        h = gru_step_scalar(p, x, h, dtype)
        y = sum(wA[j] * h[j] for j in range(h.size)) + bA
        total += (y - dtype(t)) ** 2
    return total / dtype(len(targets))


def central_differences(p, X, targets, h0, step=1e-6):
    """Central finite differences of the sequence MSE in extended precision."""
    grads = {}
    for name, val in p.items():
        base = np.array(val, dtype=float)
        g = np.zeros_like(base)
        for idx in np.ndindex(base.shape):
            vals = []
            for sgn in (1, -1):
                b = base.astype(np.longdouble)
                b[idx] += sgn * np.longdouble(step)
                q = dict(p)
                q[name] = b if b.shape else b[()]
                vals.append(gru_loss_scalar(q, X, targets, h0))
            g[idx] = float((vals[0] - vals[1]) / (2 * np.longdouble(step)))
        grads[name] = g
    return grads


def relative_error(a, b, floor=1e-6):
    """Componentwise |a - b| / max(|a|, |b|, floor), maximised."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)))
