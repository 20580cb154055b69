"""
Descriptive statistics, autocorrelation, the ADF stationarity test, the
efficiency metrics, the fair-volatility statistic sigma(alpha) and the
straddle payoff.
"""
import logging
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import stats as sps
from statsmodels.tsa.stattools import acf, adfuller

from core.errors import (ConfigurationError, DegenerateSampleError, InsufficientSampleError,
                         ParameterError)
from core.estimate import HurstSeries, Regime, VolatilitySeries, hurst_ci

logger = logging.getLogger(__name__)

ADF_MIN_EXTRA = 25


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    sd: float
    range: float
    kurtosis: float
    skewness: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    critical_value_5pct: float
    lags: int
    nobs: int
    deterministic_terms: str = "constant_and_trend"

    @property
    def rejects_unit_root(self) -> bool:
        return self.statistic < self.critical_value_5pct

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class EfficiencyMetrics:
    pct_h_in_ci: float
    pct_vol_in_ci: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def _finite(x: Sequence[float]) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[np.isfinite(x)]


def summary_stats(x: Sequence[float]) -> SummaryStats:
    """Mean, SD (n-1), range, raw kurtosis and skewness (both with divisor n); NaNs ignored"""
    x = _finite(x)
    if x.size < 4:
        raise InsufficientSampleError(f"summary_stats needs at least 4 values, got {x.size}")
    if np.ptp(x) == 0.0:
        raise DegenerateSampleError("Skewness and kurtosis are undefined for a constant sample")
    return SummaryStats(
        mean=float(np.mean(x)),
        sd=float(np.std(x, ddof=1)),
        range=float(np.ptp(x)),
        kurtosis=float(sps.kurtosis(x, fisher=False, bias=True)),
        skewness=float(sps.skew(x, bias=True)),
    )


def sample_acf(x: Sequence[float], max_lag: int) -> np.ndarray:
    """rho(k) = c(k)/c(0) from the biased autocovariance, k = 0..max_lag"""
    x = np.asarray(x, dtype=float)
    if max_lag < 1 or x.size <= max_lag:
        raise ParameterError(f"Need len(x) > max_lag >= 1, got len={x.size}, max_lag={max_lag}")
    if np.ptp(x) == 0.0:
        raise DegenerateSampleError("Autocorrelation is undefined for a constant series")
    return acf(x, nlags=max_lag, adjusted=False, fft=True, missing="none")


def adf_test(x: Sequence[float], lags: int = 1) -> AdfResult:
    """ADF regression with constant and trend and a fixed number of lagged differences"""
    x = _finite(x)
    if lags < 0:
        raise ParameterError(f"lags must be >= 0, got {lags}")
    if x.size < ADF_MIN_EXTRA + lags:
        raise InsufficientSampleError(f"adf_test needs at least {ADF_MIN_EXTRA + lags} values, "
                                      f"got {x.size}")
    if np.ptp(x) == 0.0:
        raise DegenerateSampleError("ADF regression is degenerate for a constant series")
    statistic, p_value, used_lag, nobs, critical = adfuller(x, maxlag=lags, regression="ct",
                                                            autolag=None)
    return AdfResult(
        statistic=float(statistic),
        p_value=float(p_value),
        critical_value_5pct=float(critical["5%"]),
        lags=int(used_lag),
        nobs=int(nobs),
    )


def _percentage_inside(values: np.ndarray, lo, hi) -> Tuple[float, int]:
    values = np.asarray(values, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), values.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), values.shape)
    defined = np.isfinite(values) & np.isfinite(lo) & np.isfinite(hi)
    count = int(defined.sum())
    if count == 0:
        return float("nan"), 0
    inside = defined & (values >= lo) & (values <= hi)
    return 100.0 * int(inside.sum()) / count, count


def efficiency_metrics(hurst: HurstSeries, vol: VolatilitySeries) -> EfficiencyMetrics:
    """Percentage of defined observations inside the Hurst band and the fair volatility band"""
    if hurst.h_hat.size != vol.sigma_hist.size:
        raise ConfigurationError("Hurst and volatility series are not aligned")
    pct_h, count_h = _percentage_inside(hurst.h_hat, hurst.ci_lo, hurst.ci_hi)
    pct_vol, count_vol = _percentage_inside(vol.sigma_hist, vol.fair_lo, vol.fair_hi)
    if count_h == 0 or count_vol == 0:
        raise ConfigurationError("No overlapping defined observations for the efficiency metrics")
    return EfficiencyMetrics(pct_h_in_ci=pct_h, pct_vol_in_ci=pct_vol)


def regime_shares(labels: Sequence[str]) -> Dict[str, float]:
    """Percentage of defined observations in each regime"""
    counts = Counter(label for label in labels if label)
    total = sum(counts.values())
    if total == 0:
        return {regime.value: float("nan") for regime in Regime}
    return {regime.value: 100.0 * counts.get(regime.value, 0) / total for regime in Regime}


def fair_sigma_alpha(returns: Sequence[float], hurst: HurstSeries, alpha: float) -> float:
    """SD of the returns r_t whose next-period estimate H_{t+1} lies in the efficiency band"""
    returns = np.asarray(returns, dtype=float)
    if returns.size != hurst.h_hat.size:
        raise ConfigurationError("returns and Hurst series are not aligned")
    lo, hi = hurst_ci(hurst.delta, hurst.n_obs, alpha)
    following = hurst.h_hat[1:]
    qualifying = returns[:-1][np.isfinite(following) & (following >= lo) & (following <= hi)]
    if qualifying.size < 2:
        raise InsufficientSampleError(f"Only {qualifying.size} returns qualify for sigma(alpha)")
    return float(np.std(qualifying, ddof=1))


def fair_band_aggregate(vol: VolatilitySeries) -> Tuple[float, float]:
    """Time-mean of the fair volatility band over defined observations"""
    lo = _finite(vol.fair_lo)
    hi = _finite(vol.fair_hi)
    if lo.size == 0 or hi.size == 0:
        return float("nan"), float("nan")
    return float(np.mean(lo)), float(np.mean(hi))


def straddle_payoff(terminal: float, strike: float, call_premium: float, put_premium: float) -> float:
    """Long straddle payoff |S_T - K| - (C + P)"""
    if call_premium < 0 or put_premium < 0:
        raise ParameterError("Option premiums must be non-negative")
    if terminal < 0 or strike < 0:
        raise ParameterError("Prices must be non-negative")
    return max(terminal - strike, 0.0) + max(strike - terminal, 0.0) - (call_premium + put_premium)
