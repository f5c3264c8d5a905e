"""Signal containers, sliding windows, trajectory matrices and period estimation.

All public indices are 1-based: ``window(series, L, t)`` returns
``(x_{t-L+1}, ..., x_t)`` and ``series.x(1)`` is the first sample.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import CsvParseError, DegenerateInputError, RangeError

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    origin_index: int = 1
    name: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 1:
            raise RangeError("a time series needs at least one sample")
        if not np.all(np.isfinite(v)):
            raise ValueError("time series samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def x(self, t: int) -> float:
        """Sample x_t with 1-based ``t``."""
        if not 1 <= t <= len(self):
            raise RangeError(f"index t={t} outside [1, {len(self)}]")
        return float(self.values[t - 1])

    def head(self, n: int) -> "TimeSeries":
        return TimeSeries(self.values[:n], self.origin_index, self.name)

    def slice(self, start: int, stop: int) -> "TimeSeries":
        """Samples x_start..x_stop inclusive (1-based)."""
        return TimeSeries(self.values[start - 1:stop], self.origin_index + start - 1, self.name)


@dataclass(frozen=True)
class WindowVector:
    entries: np.ndarray
    t: int
    L: int

    def __post_init__(self):
        e = np.array(self.entries, dtype=float).ravel()
        if e.size != self.L:
            raise RangeError(f"window has {e.size} entries, expected L={self.L}")
        if self.t < self.L:
            raise RangeError(f"anchor t={self.t} must satisfy t >= L={self.L}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @classmethod
    def from_values(cls, values: ArrayLike, t: Optional[int] = None) -> "WindowVector":
        v = np.asarray(values, dtype=float).ravel()
        return cls(v, v.size if t is None else t, v.size)


@dataclass(frozen=True)
class TrajectoryMatrix:
    data: np.ndarray
    L: int
    N: int


@dataclass(frozen=True)
class AepProfile:
    epsilon: float
    T: int
    S: int
    satisfied: bool
    period_fallback: bool = False


@dataclass(frozen=True)
class LagEstimate:
    """Result of :func:`estimate_lag`; ``int(est)`` gives the lag."""

    lag: int
    fallback: bool
    peak_value: float = float("nan")
    reason: str = ""

    def __int__(self):
        return self.lag


def as_series(series: Union[TimeSeries, ArrayLike]) -> TimeSeries:
    if isinstance(series, TimeSeries):
        return series
    return TimeSeries(np.asarray(series, dtype=float))


def window(series, L: int, t: int) -> WindowVector:
    s = as_series(series)
    n = len(s)
    if L < 1:
        raise RangeError(f"lag L={L} must be positive")
    if L > n:
        raise RangeError(f"lag L={L} exceeds series length {n}")
    if t < L:
        raise RangeError(f"anchor t={t} below lower bound L={L}")
    if t > n:
        raise RangeError(f"anchor t={t} above upper bound {n}")
    return WindowVector(s.values[t - L:t], t, L)


def hankel(series, L: int) -> TrajectoryMatrix:
    """Trajectory matrix with row ``i`` holding ``x_i ... x_{N-L+i}``."""
    s = as_series(series)
    n = len(s)
    if L < 1 or L > n:
        raise RangeError(f"window length L={L} must lie in [1, {n}]")
    data = sliding_window_view(s.values, n - L + 1).copy()
    return TrajectoryMatrix(data, L, n)


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Biased sample autocorrelation ``rho(0..max_lag)`` of the centred series."""
    s = as_series(series)
    n = len(s)
    if max_lag < 0 or max_lag >= n:
        raise RangeError(f"max_lag={max_lag} must be below the series length {n}")
    xc = s.values - s.values.mean()
    denom = float(xc @ xc)
    if denom <= 0.0 or denom <= 1e-28 * n * max(1.0, float(np.max(np.abs(s.values)))) ** 2:
        raise DegenerateInputError("zero variance: autocorrelation undefined")
    acf = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        acf[k] = xc[: n - k] @ xc[k:]
    return acf / denom


def _acf_peaks(acf: np.ndarray, n: int) -> list[int]:
    floor = max(0.2, 2.0 / np.sqrt(n))
    peaks = []
    for lag in range(2, acf.size - 1):
        if acf[lag] > acf[lag - 1] and acf[lag] >= acf[lag + 1] and acf[lag] >= floor:
            peaks.append(lag)
    return peaks


def _search_horizon(n: int) -> int:
    return min(n - 1, n // 2 + 1)


def estimate_lag(series) -> LagEstimate:
    """Lag of the first significant local maximum of the ACF at lag >= 2.

    Falls back to ``floor(N/4)`` (flagged) when no peak clears the
    ``max(0.2, 2/sqrt(N))`` band or the series is constant.
    """
    s = as_series(series)
    n = len(s)
    if n < 8:
        raise RangeError(f"lag estimation needs at least 8 samples, got {n}")
    try:
        acf = autocorrelation(s, _search_horizon(n))
    except DegenerateInputError:
        return LagEstimate(n // 4, True, reason="zero variance")
    peaks = _acf_peaks(acf, n)
    if not peaks:
        return LagEstimate(n // 4, True, reason="no significant ACF peak")
    return LagEstimate(peaks[0], False, float(acf[peaks[0]]))


def aep_tail_start(values: np.ndarray, T: int, epsilon: float) -> int:
    """Smallest 1-based S with every residue class mod T of ``x_S..x_N`` spanning <= epsilon.

    That is exactly ``|x_{t+kT} - x_t| <= epsilon`` for all ``t >= S`` and all
    ``k`` that stay inside the sample.
    """
    n = values.size
    lo = np.full(T, np.inf)
    hi = np.full(T, -np.inf)
    for i in range(n - 1, -1, -1):
        c = i % T
        lo[c] = min(lo[c], values[i])
        hi[c] = max(hi[c], values[i])
        if hi[c] - lo[c] > epsilon:
            return i + 2
    return 1


def _profile_for(values: np.ndarray, T: int, epsilon: float, fallback: bool) -> AepProfile:
    n = values.size
    S = aep_tail_start(values, T, epsilon)
    # the tail must hold two full periods for the test to say anything
    if n - S + 1 < 2 * T:
        return AepProfile(epsilon, T, n + 1, False, fallback)
    return AepProfile(epsilon, T, S, True, fallback)


def _smallest_divisor(values: np.ndarray, prof: AepProfile, epsilon: float) -> AepProfile:
    # any multiple of a period passes too; prefer the smallest divisor whose
    # tail starts no more than one period later
    for d in range(1, prof.T):
        if prof.T % d:
            continue
        cand = _profile_for(values, d, epsilon, prof.period_fallback)
        if cand.satisfied and cand.S <= prof.S + prof.T:
            return cand
    return prof


def estimate_period(series, epsilon: float) -> AepProfile:
    """Approximate period T and tail start S of an eventually periodic signal.

    Candidate periods are the significant ACF peaks in increasing lag order;
    the first one whose tail passes the AEP test is returned, reduced to its
    smallest divisor that also passes.  When no peak
    passes, the smallest period whose passing tail covers at least half
    the sample is returned with
    ``period_fallback=True``; failing that, the first candidate is reported
    with ``satisfied=False`` and ``S = N + 1``.
    """
    s = as_series(series)
    v = s.values
    n = len(s)
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if np.ptp(v) <= epsilon:
        return _profile_for(v, 1, epsilon, False) if n >= 2 else AepProfile(epsilon, 1, n + 1, False)
    if n < 4:
        return AepProfile(epsilon, 1, n + 1, False, True)
    try:
        acf = autocorrelation(s, _search_horizon(n))
        candidates = _acf_peaks(acf, n)
    except DegenerateInputError:
        candidates = []
    fallback = not candidates
    if fallback:
        candidates = [max(1, n // 4)]
    first = None
    for T in candidates:
        if 2 * T > n:
            continue
        prof = _profile_for(v, T, epsilon, fallback)
        if prof.satisfied:
            return _smallest_divisor(v, prof, epsilon)
        if first is None:
            first = prof
    # no ACF candidate explains the tail: smallest period whose tail covers
    # at least half the sample
    for T in range(1, n // 2 + 1):
        prof = _profile_for(v, T, epsilon, True)
        if prof.satisfied and n - prof.S + 1 >= n / 2:
            return prof
    if first is None:
        return AepProfile(epsilon, candidates[0], n + 1, False, fallback)
    return first


def load_csv(path: Union[str, Path], column: Union[str, int, None] = None, name: str = "") -> TimeSeries:
    """Read a one-sample-per-row CSV.

    Accepted layouts are a single numeric column or ``timestamp,value`` rows.
    A header is detected when the first cell of the first row is not numeric.
    ``column`` selects the value column by header name or 0-based index;
    by default the last column is used.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise CsvParseError(f"{path}: no data rows")

    def numeric(cell):
        try:
            float(cell)
            return True
        except ValueError:
            return False

    header = None
    if not numeric(rows[0][0].strip()):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise CsvParseError(f"{path}: header but no data rows")

    ncols = len(rows[0])
    if column is None:
        idx = ncols - 1
    elif isinstance(column, int) or (isinstance(column, str) and column.isdigit()):
        idx = int(column)
    elif header is not None and column in header:
        idx = header.index(column)
    else:
        raise CsvParseError(f"{path}: unknown value column", column=column)
    label = header[idx] if header is not None and idx < len(header) else str(idx)

    first_row = 2 if header is not None else 1
    out = []
    for k, row in enumerate(rows):
        rowno = first_row + k
        if idx >= len(row):
            raise CsvParseError(f"{path}: missing value", row=rowno, column=label)
        cell = row[idx].strip()
        try:
            val = float(cell)
        except ValueError:
            raise CsvParseError(f"{path}: non-numeric value {cell!r}", row=rowno, column=label) from None
        if not np.isfinite(val):
            raise CsvParseError(f"{path}: non-finite value {cell!r}", row=rowno, column=label)
        out.append(val)
    return TimeSeries(np.array(out), name=name or path.stem)


def save_csv(series, path: Union[str, Path], header: str = "value") -> None:
    s = as_series(series)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([header])
        for v in s.values:
            w.writerow([repr(float(v))])
