"""Returns, volatilities, and the correlation statistics derived from them.

All moment estimators use the population (divide-by-T) convention; the
convention cancels in every correlation but matters for kurtosis.
"""

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np


@dataclass
class SeriesRecord:
    """One sweep's measurement: magnetizations of all stocks and, from the
    second record on, the returns of the step that ended at t."""

    t: int
    magnetizations: tuple
    returns: Optional[tuple] = None


@dataclass
class SummaryStats:
    cross_correlation: np.ndarray        # (K, K) volatility cross-correlations
    volatility_autocorrelation: np.ndarray  # (K, max_lag) lags 1..max_lag
    return_autocorrelation: np.ndarray   # (K, max_lag) lags 1..max_lag
    excess_kurtosis: np.ndarray          # (K,) of returns
    volatility_mean: np.ndarray          # (K,)
    volatility_std: np.ndarray           # (K,) population convention
    n_records: int
    max_lag: int

    @property
    def n_stocks(self) -> int:
        return self.cross_correlation.shape[0]


def returns_from_magnetization(series) -> np.ndarray:
    """r(t) = (M(t+1) - M(t)) / 2; output is one shorter than the input."""
    m = np.asarray(series, dtype=np.float64)
    if m.ndim != 1:
        raise ValueError("expected a 1-d magnetization series")
    if m.size < 2:
        raise ValueError("insufficient series: need at least 2 magnetizations")
    return (m[1:] - m[:-1]) / 2.0


def volatility(returns) -> np.ndarray:
    """Elementwise |r(t)|."""
    r = np.asarray(returns, dtype=np.float64)
    if r.size == 0:
        raise ValueError("empty return series")
    return np.abs(r)


def cross_correlation(x, y) -> float:
    """Lag-0 Pearson correlation of two equal-length series.

    Mean-centered product average over the two population standard
    deviations; the divide-by-T convention cancels between numerator and
    denominator.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need two 1-d series of length >= 2")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = np.sqrt((xd * xd).mean())
    sy = np.sqrt((yd * yd).mean())
    if sx == 0.0 or sy == 0.0:
        raise ValueError("degenerate series: zero variance")
    return float((xd * yd).mean() / (sx * sy))


def _centered_autocorr(xd: np.ndarray, var: float, lag: int) -> float:
    if lag == 0:
        return float((xd * xd).mean() / var)
    return float((xd[:-lag] * xd[lag:]).mean() / var)


def autocorrelation(x, lag: int) -> float:
    """Lag-ell autocorrelation with the global mean and population variance.

    The lagged products are averaged over the T - ell available pairs, so a
    perfectly alternating series gives exactly -1 at lag 1 and any series
    gives 1 at lag 0.
    """
    x = np.asarray(x, dtype=np.float64)
    if lag < 0:
        raise ValueError("lag must be nonnegative")
    if lag >= x.size:
        raise ValueError(f"lag {lag} not below series length {x.size}")
    if x.size < 2:
        raise ValueError("need a series of length >= 2")
    xd = x - x.mean()
    var = (xd * xd).mean()
    if var == 0.0:
        raise ValueError("degenerate series: zero variance")
    return _centered_autocorr(xd, var, lag)


def excess_kurtosis(x) -> float:
    """m4 / m2^2 - 3 with population central moments."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < 4:
        raise ValueError("need a series of length >= 4")
    xd = x - x.mean()
    m2 = (xd * xd).mean()
    if m2 == 0.0:
        raise ValueError("degenerate series: zero variance")
    m4 = (xd ** 4).mean()
    return float(m4 / (m2 * m2) - 3.0)


def magnetization_matrix(records: Iterable[SeriesRecord]) -> np.ndarray:
    """Collect a record stream into a (T, K) magnetization matrix."""
    rows = [r.magnetizations for r in records]
    if not rows:
        raise ValueError("empty record stream")
    return np.asarray(rows, dtype=np.float64)


def summarize(records: Iterable[SeriesRecord], max_lag: int = 100) -> SummaryStats:
    """Full statistics over a record stream: the volatility cross-correlation
    matrix, per-stock volatility/return autocorrelations at lags 1..max_lag,
    excess kurtosis of returns, and volatility means/stds.

    Streaming and in-memory inputs give identical results; the stream is
    materialized into a dense matrix before any statistic is computed.
    """
    m = magnetization_matrix(records)
    return summarize_magnetizations(m, max_lag=max_lag)


def summarize_magnetizations(m: np.ndarray, max_lag: int = 100) -> SummaryStats:
    """summarize() on an already-dense (T, K) magnetization matrix."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a (T, K) magnetization matrix")
    n_rec, n_stocks = m.shape
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if n_rec < max_lag + 2:
        raise ValueError(f"need at least max_lag + 2 = {max_lag + 2} records, got {n_rec}")

    rets = np.column_stack([returns_from_magnetization(m[:, k]) for k in range(n_stocks)])
    vols = np.abs(rets)

    cc = np.eye(n_stocks)
    for a in range(n_stocks):
        for b in range(a + 1, n_stocks):
            cc[a, b] = cc[b, a] = cross_correlation(vols[:, a], vols[:, b])

    if max_lag >= rets.shape[0]:
        raise ValueError(f"lag {max_lag} not below series length {rets.shape[0]}")
    vol_ac = np.empty((n_stocks, max_lag))
    ret_ac = np.empty((n_stocks, max_lag))
    for k in range(n_stocks):
        for series, out in ((vols[:, k], vol_ac), (rets[:, k], ret_ac)):
            xd = series - series.mean()
            var = (xd * xd).mean()
            if var == 0.0:
                raise ValueError("degenerate series: zero variance")
            for lag in range(1, max_lag + 1):
                out[k, lag - 1] = _centered_autocorr(xd, var, lag)

    kurt = np.array([excess_kurtosis(rets[:, k]) for k in range(n_stocks)])
    vmean = vols.mean(axis=0)
    vstd = vols.std(axis=0)  # population (ddof=0)

    return SummaryStats(
        cross_correlation=cc,
        volatility_autocorrelation=vol_ac,
        return_autocorrelation=ret_ac,
        excess_kurtosis=kurt,
        volatility_mean=vmean,
        volatility_std=vstd,
        n_records=n_rec,
        max_lag=max_lag,
    )
