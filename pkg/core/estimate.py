"""
Rolling-window Hurst-Holder estimation, the efficiency confidence band,
recovery of the scale function nu(t) and the historical / theoretical /
fair volatility series.

Conventions: an observed price series of length n lives on the grid
t_k = k/(n-1) of [0, 1], so a log-return is an increment over the lag
h = 1/(n-1). All rolling quantities are aligned with the returns array and
right-aligned: the value at index t uses returns up to and including t.
Undefined entries are NaN.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats as sps

from core.errors import ConfigurationError, DataError, EstimationError
from core.specfun import a_const, a_const_values, v_const, v_const_values

logger = logging.getLogger(__name__)

H_FLOOR = 0.01
H_CEILING = 0.99


class Regime(str, Enum):
    MOMENTUM = "momentum"
    EFFICIENT = "efficient"
    REVERSAL = "reversal"


class Standardization(str, Enum):
    NONE = "none"
    TWO_SCALE = "two_scale"


@dataclass(frozen=True)
class RollingConfig:
    """Rolling-window estimation settings"""

    delta: int = 20
    alpha: float = 0.05
    nu_window: int = 120
    standardize: Standardization = Standardization.NONE
    tolerance: float = 1e-6
    max_iterations: int = 200

    def __post_init__(self):
        try:
            object.__setattr__(self, "standardize", Standardization(self.standardize))
        except ValueError:
            raise ConfigurationError(f"Unknown standardization: {self.standardize}")
        if int(self.delta) != self.delta or self.delta < 5:
            raise ConfigurationError(f"delta must be an integer >= 5, got {self.delta}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.nu_window) != self.nu_window or self.nu_window < self.delta:
            raise ConfigurationError(f"nu_window must be an integer >= delta ({self.delta}), "
                                     f"got {self.nu_window}")

    def describe(self) -> Dict[str, Any]:
        return {
            "delta": int(self.delta),
            "alpha": float(self.alpha),
            "nu_window": int(self.nu_window),
            "standardize": self.standardize.value,
            "lag_convention": "unit-lag increments on the normalized [0,1] grid",
        }


@dataclass(frozen=True)
class HurstSeries:
    """Rolling Hurst estimates aligned with the returns array"""

    h_hat: np.ndarray
    h_raw: np.ndarray
    s2: np.ndarray
    ci_lo: float
    ci_hi: float
    regime: np.ndarray
    clamped: np.ndarray
    delta: int
    n_obs: int
    alpha: float
    scale: float = 1.0

    @property
    def t_index(self) -> np.ndarray:
        return np.arange(self.h_hat.size)

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.h_hat)


@dataclass(frozen=True)
class VolatilitySeries:
    """Historical, theoretical and fair volatility aligned with the returns array"""

    sigma_hist: np.ndarray
    sigma_theo: np.ndarray
    nu_hat: np.ndarray
    nu_raw: np.ndarray
    fair_lo: np.ndarray
    fair_hi: np.ndarray
    extras: Dict[str, Any] = field(default_factory=dict)


def log_returns(prices: Any) -> np.ndarray:
    """r_t = ln(S_t / S_{t-1}); accepts a PricePath or a price array"""
    closes = getattr(prices, "closes", prices)
    closes = np.asarray(closes, dtype=float)
    if closes.size < 2:
        raise DataError(f"Need at least 2 prices, got {closes.size}")
    bad = np.flatnonzero(~(closes > 0) | ~np.isfinite(closes))
    if bad.size:
        index = int(bad[0])
        raise DataError(f"Price at index {index} is not strictly positive: {closes[index]}", index=index)
    return np.diff(np.log(closes))


def _windows(values: np.ndarray, delta: int) -> np.ndarray:
    return sliding_window_view(values, delta)


def _right_aligned(length: int, delta: int, values: np.ndarray) -> np.ndarray:
    out = np.full(length, np.nan)
    out[delta - 1:] = values
    return out


def estimator_variance(delta: int, n: int) -> float:
    """Null variance of the Hurst estimator, 1/(2 delta ln^2(n-1))"""
    return 1.0 / (2.0 * delta * math.log(n - 1) ** 2)


def z_quantile(alpha: float) -> float:
    """Two-sided standard normal quantile z_{1-alpha/2}"""
    return float(sps.norm.ppf(1.0 - alpha / 2.0))


def hurst_ci(delta: int, n: int, alpha: float) -> Tuple[float, float]:
    """Efficiency band 1/2 -/+ z_{1-alpha/2} sqrt(1/(2 delta ln^2(n-1)))"""
    if n < 3 or delta < 2:
        raise ConfigurationError(f"hurst_ci needs n >= 3 and delta >= 2, got n={n}, delta={delta}")
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    half = z_quantile(alpha) * math.sqrt(estimator_variance(delta, n))
    # quantized to 2^-53 so that lo + hi == 1 holds exactly
    half = math.ldexp(round(math.ldexp(half, 53)), -53)
    widest = math.ldexp(math.floor(math.ldexp(0.5 - H_FLOOR, 53)), -53)
    if half > widest:
        logger.warning(f"Efficiency band for delta={delta}, n={n}, alpha={alpha} "
                       f"clamped into [{H_FLOOR}, {H_CEILING}]")
        half = widest
    return 0.5 - half, 0.5 + half


TWO_SCALE_LAGS = (1, 2, 4, 8, 16)


def two_scale_factor(returns: np.ndarray) -> float:
    """
    Global scale s such that returns / s behave like increments of a V_H-normalized
    fBm on the grid. H and s come from a log-log fit of the k-cell increment second
    moments over dyadic k.
    """
    returns = np.asarray(returns, dtype=float)
    if returns.size < 3:
        raise ConfigurationError("two_scale standardization needs at least 3 returns")
    lags = [k for k in TWO_SCALE_LAGS if k <= max(2, returns.size // 8)]
    path = np.concatenate(([0.0], np.cumsum(returns)))
    moments = np.array([np.mean((path[k:] - path[:-k]) ** 2) for k in lags])
    if np.any(moments == 0.0):
        raise EstimationError("two_scale standardization undefined for an all-zero series")
    slope, intercept = np.polyfit(np.log(lags), np.log(moments), 1)
    h_bar = float(np.clip(0.5 * slope, H_FLOOR, H_CEILING))
    step = 1.0 / returns.size
    # intercept is ln m_1 on the fitted line
    return math.sqrt(math.exp(intercept) / (v_const(h_bar) * step ** (2.0 * h_bar)))


def _fixed_point(log_s2: np.ndarray, log_n: float, cfg: RollingConfig) -> np.ndarray:
    """Solve H = -(ln S2 - ln V_H) / (2 ln(n-1)) elementwise"""
    h = np.clip(-log_s2 / (2.0 * log_n), H_FLOOR, H_CEILING)
    for _ in range(cfg.max_iterations):
        updated = -(log_s2 - np.log(v_const_values(np.clip(h, H_FLOOR, H_CEILING)))) / (2.0 * log_n)
        change = np.max(np.abs(updated - h)) if updated.size else 0.0
        h = updated
        if change < cfg.tolerance:
            break
    else:
        logger.warning(f"Hurst fixed point stopped after {cfg.max_iterations} iterations")
    return h


def estimate_hurst(returns: Sequence[float], cfg: RollingConfig = RollingConfig()) -> HurstSeries:
    """Rolling moment estimator of H(t) with the V_H normalization fixed point"""
    returns = np.asarray(returns, dtype=float)
    if returns.size < cfg.delta:
        raise ConfigurationError(f"Need at least delta={cfg.delta} returns, got {returns.size}")
    n = returns.size + 1
    log_n = math.log(n - 1)

    scale = 1.0
    if cfg.standardize is Standardization.TWO_SCALE:
        scale = two_scale_factor(returns)
    scaled = returns / scale

    s2 = np.mean(_windows(scaled, cfg.delta) ** 2, axis=1)
    zero = np.flatnonzero(s2 == 0.0)
    if zero.size:
        index = int(zero[0]) + cfg.delta - 1
        raise EstimationError(f"All-zero return window ending at index {index}", index=index)

    log_s2 = np.log(s2)
    raw = -log_s2 / (2.0 * log_n)
    fixed = _fixed_point(log_s2, log_n, cfg)
    clamped = (fixed < H_FLOOR) | (fixed > H_CEILING)
    if clamped.any():
        logger.warning(f"{int(clamped.sum())} Hurst estimates clamped into [{H_FLOOR}, {H_CEILING}]")
    h_hat = np.clip(fixed, H_FLOOR, H_CEILING)

    ci_lo, ci_hi = hurst_ci(cfg.delta, n, cfg.alpha)
    length = returns.size
    h_full = _right_aligned(length, cfg.delta, h_hat)
    series = HurstSeries(
        h_hat=h_full,
        h_raw=_right_aligned(length, cfg.delta, raw),
        s2=_right_aligned(length, cfg.delta, s2 * scale ** 2),
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        regime=_labels(h_full, ci_lo, ci_hi),
        clamped=np.concatenate([np.zeros(cfg.delta - 1, dtype=bool), clamped]),
        delta=int(cfg.delta),
        n_obs=n,
        alpha=float(cfg.alpha),
        scale=scale,
    )
    logger.debug(f"estimate_hurst: n={n}, delta={cfg.delta}, scale={scale:.6g}")
    return series


def _labels(h_hat: np.ndarray, ci_lo: float, ci_hi: float) -> np.ndarray:
    labels = np.full(h_hat.size, "", dtype=object)
    defined = np.isfinite(h_hat)
    labels[defined & (h_hat > ci_hi)] = Regime.MOMENTUM.value
    labels[defined & (h_hat < ci_lo)] = Regime.REVERSAL.value
    labels[defined & (h_hat >= ci_lo) & (h_hat <= ci_hi)] = Regime.EFFICIENT.value
    return labels


def classify_regime(hurst: HurstSeries) -> np.ndarray:
    """Momentum above the band, Reversal below it, Efficient inside; '' where undefined"""
    return _labels(hurst.h_hat, hurst.ci_lo, hurst.ci_hi)


def historical_vol(returns: Sequence[float], delta: int) -> np.ndarray:
    """Rolling sample SD (divisor delta-1) of the delta most recent returns"""
    returns = np.asarray(returns, dtype=float)
    if delta < 2:
        raise ConfigurationError(f"delta must be >= 2, got {delta}")
    if returns.size < delta:
        raise ConfigurationError(f"Need at least delta={delta} returns, got {returns.size}")
    windows = _windows(returns, delta)
    sd = np.std(windows, axis=1, ddof=1)
    sd[np.ptp(windows, axis=1) == 0.0] = 0.0
    return _right_aligned(returns.size, delta, sd)


def _grid_step(n: int) -> float:
    return 1.0 / (n - 1)


def estimate_nu(returns: Sequence[float], hurst: HurstSeries,
                cfg: RollingConfig = RollingConfig()) -> Tuple[np.ndarray, np.ndarray]:
    """
    nu recovered from the short-lag law: raw sqrt(S2)/(h^H sqrt(A(H))), then a trailing
    moving median over cfg.nu_window estimates. Returns (smoothed, raw).
    """
    returns = np.asarray(returns, dtype=float)
    if returns.size != hurst.h_hat.size:
        raise ConfigurationError("returns and Hurst series are not aligned")
    step = _grid_step(hurst.n_obs)
    defined = hurst.defined
    raw = np.full(returns.size, np.nan)
    h = hurst.h_hat[defined]
    raw[defined] = np.sqrt(hurst.s2[defined]) / (step ** h * np.sqrt(a_const_values(h)))
    if np.any(raw[defined] <= 0):
        index = int(np.flatnonzero(defined & ~(raw > 0))[0])
        raise EstimationError(f"nu estimate is not positive at index {index}", index=index)
    smoothed = pd.Series(raw).rolling(cfg.nu_window, min_periods=1).median().to_numpy()
    smoothed[~defined] = np.nan
    return smoothed, raw


def theoretical_vol(hurst: HurstSeries, nu: np.ndarray, n: Optional[int] = None) -> np.ndarray:
    """sigma_theo(t) = h^H_t nu(t) sqrt(A(H_t)) with h = 1/(n-1)"""
    n = n or hurst.n_obs
    step = _grid_step(n)
    nu = np.asarray(nu, dtype=float)
    out = np.full(nu.size, np.nan)
    defined = hurst.defined & np.isfinite(nu)
    h = hurst.h_hat[defined]
    out[defined] = step ** h * nu[defined] * np.sqrt(a_const_values(h))
    return out


def fair_vol_band(nu: np.ndarray, delta: int, n: int, alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    """Efficiency band mapped through the short-lag law: (fair_lo, fair_hi)"""
    h_lo, h_hi = hurst_ci(delta, n, alpha)
    step = _grid_step(n)
    nu = np.asarray(nu, dtype=float)
    fair_lo = step ** h_hi * nu * math.sqrt(a_const(h_hi))
    fair_hi = step ** h_lo * nu * math.sqrt(a_const(h_lo))
    return fair_lo, fair_hi


def estimate_volatility(returns: Sequence[float], hurst: HurstSeries,
                        cfg: RollingConfig = RollingConfig()) -> VolatilitySeries:
    """Historical, theoretical and fair volatility for one return series"""
    returns = np.asarray(returns, dtype=float)
    nu_hat, nu_raw = estimate_nu(returns, hurst, cfg)
    fair_lo, fair_hi = fair_vol_band(nu_hat, cfg.delta, hurst.n_obs, cfg.alpha)
    return VolatilitySeries(
        sigma_hist=historical_vol(returns, cfg.delta),
        sigma_theo=theoretical_vol(hurst, nu_hat),
        nu_hat=nu_hat,
        nu_raw=nu_raw,
        fair_lo=fair_lo,
        fair_hi=fair_hi,
    )
