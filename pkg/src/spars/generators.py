"""Deterministic synthetic signals used as fixtures and in the demos.

Periodic kinds tile one generated period, so the output is exactly periodic
in floating point.
"""

from __future__ import annotations

import numpy as np

from .signal_core import TimeSeries

KINDS = ("sine", "alternating", "aep", "noisy-periodic", "recurrence")


def _period_wave(period: int, amplitude: float) -> np.ndarray:
    t = np.arange(period)
    th = 2 * np.pi * t / period
    return amplitude * (np.sin(th) + 0.5 * np.cos(2 * th)) / 1.5


def _tile(cycle: np.ndarray, n: int) -> np.ndarray:
    reps = -(-n // cycle.size)
    return np.tile(cycle, reps)[:n]


def sine(n: int = 400, period: int = 20, amplitude: float = 1.0) -> TimeSeries:
    # x_t = A sin(2 pi t / P) for t = 1..n
    cycle = amplitude * np.sin(2 * np.pi * np.arange(1, period + 1) / period)
    return TimeSeries(_tile(cycle, n), name="sine")


def alternating(n: int = 64, amplitude: float = 1.0) -> TimeSeries:
    return TimeSeries(_tile(np.array([amplitude, -amplitude]), n), name="alternating")


def periodic(n: int = 480, period: int = 24, amplitude: float = 1.0) -> TimeSeries:
    return TimeSeries(_tile(_period_wave(period, amplitude), n), name="periodic")


def noisy_periodic(n: int = 480, period: int = 24, noise: float = 0.1,
                   amplitude: float = 1.0, seed: int = 0) -> TimeSeries:
    rng = np.random.default_rng(seed)
    base = _tile(_period_wave(period, amplitude), n)
    return TimeSeries(base + noise * rng.standard_normal(n), name="noisy-periodic")


def aep(n: int = 400, head: int = 30, period: int = 12, epsilon: float = 0.01,
        amplitude: float = 1.0, seed: int = 0) -> TimeSeries:
    """Aperiodic head followed by a tail that repeats to within ``epsilon``.

    The head is a decaying random walk; the tail is a fixed period plus
    uniform jitter of half-width ``epsilon / 4``.
    """
    rng = np.random.default_rng(seed)
    walk = np.cumsum(rng.standard_normal(head)) * amplitude
    walk *= np.linspace(1.0, 0.2, head)
    tail = _tile(_period_wave(period, amplitude), n - head)
    tail = tail + rng.uniform(-epsilon / 4, epsilon / 4, size=tail.size)
    return TimeSeries(np.concatenate([2.0 * amplitude + walk, tail]), name="aep")


def recurrence(n: int = 60, coefficients=(2 * np.cos(2 * np.pi / 17), -1.0),
               seed_values=(0.0, 1.0)) -> TimeSeries:
    """Samples of ``x_{t+1} = c_1 x_t + ... + c_L x_{t-L+1}`` from the given seed.

    ``seed_values`` are oldest-first and must have length ``L``.
    """
    c = np.asarray(coefficients, dtype=float)
    x = list(np.asarray(seed_values, dtype=float))
    if len(x) != c.size:
        raise ValueError("need one seed value per coefficient")
    while len(x) < n:
        recent = np.array(x[-c.size:][::-1])
        x.append(float(c @ recent))
    return TimeSeries(np.array(x[:n]), name="recurrence")


def generate(kind: str, **params) -> TimeSeries:
    makers = {
        "sine": sine,
        "alternating": alternating,
        "aep": aep,
        "noisy-periodic": noisy_periodic,
        "recurrence": recurrence,
    }
    if kind not in makers:
        raise ValueError(f"unknown generator kind {kind!r}; choose from {', '.join(KINDS)}")
    return makers[kind](**params)
