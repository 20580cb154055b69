"""
Summary statistics, autocorrelation, ADF, efficiency metrics and the straddle
"""
import math

import numpy as np
import pytest

from core.errors import (ConfigurationError, DegenerateSampleError, InsufficientSampleError,
                         ParameterError)
from core.estimate import HurstSeries, VolatilitySeries
from core.simulate import gen_ar1, gen_fbm, gen_fgn
from core.specfun import fgn_autocorr
from core.stats import (adf_test, efficiency_metrics, fair_band_aggregate, fair_sigma_alpha,
                        regime_shares, sample_acf, straddle_payoff, summary_stats)


def make_hurst(h_hat, delta=5, ci=(0.45, 0.55)) -> HurstSeries:
    h_hat = np.asarray(h_hat, dtype=float)
    return HurstSeries(h_hat=h_hat, h_raw=h_hat, s2=np.ones_like(h_hat), ci_lo=ci[0], ci_hi=ci[1],
                       regime=np.array([""] * h_hat.size, dtype=object),
                       clamped=np.zeros(h_hat.size, dtype=bool), delta=delta,
                       n_obs=h_hat.size + 1, alpha=0.05)


def make_vol(sigma, lo, hi) -> VolatilitySeries:
    sigma = np.asarray(sigma, dtype=float)
    return VolatilitySeries(sigma_hist=sigma, sigma_theo=sigma, nu_hat=np.ones_like(sigma),
                            nu_raw=np.ones_like(sigma), fair_lo=np.broadcast_to(lo, sigma.shape),
                            fair_hi=np.broadcast_to(hi, sigma.shape))


class TestSummaryStats:
    def test_small_sample(self):
        stats = summary_stats([1.0, 2.0, 3.0, 4.0])
        assert stats.mean == 2.5
        assert stats.sd == pytest.approx(math.sqrt(5.0 / 3.0), rel=1e-14)
        assert stats.range == 3.0
        assert stats.skewness == pytest.approx(0.0, abs=1e-14)
        assert stats.kurtosis == pytest.approx(1.64, rel=1e-12)

    def test_constant_raises(self):
        with pytest.raises(DegenerateSampleError):
            summary_stats([1.0, 1.0, 1.0, 1.0])

    def test_too_few(self):
        with pytest.raises(InsufficientSampleError):
            summary_stats([1.0, np.nan, 2.0, 3.0])

    def test_normal_kurtosis_is_raw(self):
        x = np.random.default_rng(3).standard_normal(20000)
        assert summary_stats(x).kurtosis == pytest.approx(3.0, abs=0.2)

    def test_as_dict(self):
        assert set(summary_stats([1.0, 2.0, 4.0, 8.0]).as_dict()) == {"mean", "sd", "range", "kurtosis",
                                                                      "skewness"}


class TestSampleAcf:
    def test_lag_zero_is_one(self):
        rho = sample_acf(np.random.default_rng(0).standard_normal(500), 5)
        assert rho.shape == (6,)
        assert rho[0] == pytest.approx(1.0, abs=1e-14)

    def test_iid_is_small(self):
        rho = sample_acf(np.random.default_rng(1).standard_normal(10000), 3)
        assert np.all(np.abs(rho[1:]) < 4.0 / math.sqrt(10000))

    def test_fgn_lag_one(self):
        rho = sample_acf(gen_fgn(8193, 0.75, 6).values, 1)
        assert rho[1] == pytest.approx(fgn_autocorr(1, 0.75), abs=0.05)

    def test_affine_invariance(self):
        x = gen_fgn(1001, 0.3, 2).values
        np.testing.assert_allclose(sample_acf(3.0 * x + 7.0, 4), sample_acf(x, 4), atol=1e-10)

    def test_rejects(self):
        with pytest.raises(ParameterError):
            sample_acf([1.0, 2.0, 3.0], 3)
        with pytest.raises(DegenerateSampleError):
            sample_acf(np.ones(10), 2)


class TestAdf:
    @pytest.mark.slow
    def test_random_walk_rarely_rejects(self):
        p_values = [adf_test(gen_fbm(1000, 0.5, seed).values).p_value for seed in range(40)]
        assert np.mean(np.array(p_values) > 0.10) >= 0.75

    def test_ar1_rejects(self):
        result = adf_test(gen_ar1(0.5, 1000, 9).values)
        assert result.p_value <= 0.01
        assert result.rejects_unit_root

    def test_critical_value_for_long_sample(self):
        result = adf_test(np.random.default_rng(5).standard_normal(24527))
        assert result.critical_value_5pct == pytest.approx(-3.41, abs=0.01)
        assert result.lags == 1
        assert result.deterministic_terms == "constant_and_trend"

    def test_scale_invariant(self):
        x = gen_ar1(0.3, 500, 4).values
        assert adf_test(10.0 * x).statistic == pytest.approx(adf_test(x).statistic, rel=1e-8)

    def test_rejects(self):
        with pytest.raises(DegenerateSampleError):
            adf_test(np.ones(100))
        with pytest.raises(InsufficientSampleError):
            adf_test(np.arange(10.0))
        with pytest.raises(ParameterError):
            adf_test(np.arange(100.0), lags=-1)


class TestEfficiency:
    def test_percentage_of_defined(self):
        h = np.full(1001, 0.9)
        h[0] = np.nan
        h[1:437] = 0.5
        metrics = efficiency_metrics(make_hurst(h), make_vol(np.ones(1001), 0.0, 2.0))
        assert metrics.pct_h_in_ci == pytest.approx(43.6, abs=1e-12)
        assert metrics.pct_vol_in_ci == 100.0

    def test_band_edges_count_as_inside(self):
        metrics = efficiency_metrics(make_hurst([0.45, 0.55, 0.5]), make_vol([1.0, 2.0, 3.0], 1.0, 2.0))
        assert metrics.pct_h_in_ci == 100.0
        assert metrics.pct_vol_in_ci == pytest.approx(200.0 / 3.0)

    def test_nothing_defined(self):
        with pytest.raises(ConfigurationError):
            efficiency_metrics(make_hurst([np.nan, np.nan]), make_vol([1.0, 1.0], 0.0, 2.0))

    def test_regime_shares(self):
        shares = regime_shares(["", "momentum", "efficient", "efficient", "reversal"])
        assert shares == {"momentum": 25.0, "efficient": 50.0, "reversal": 25.0}
        assert sum(shares.values()) == pytest.approx(100.0)

    def test_regime_shares_empty(self):
        assert all(math.isnan(v) for v in regime_shares(["", ""]).values())

    def test_fair_band_aggregate(self):
        vol = make_vol([1.0, 1.0, 1.0], np.array([np.nan, 1.0, 3.0]), np.array([np.nan, 2.0, 4.0]))
        assert fair_band_aggregate(vol) == (2.0, 3.0)


class TestFairSigmaAlpha:
    def test_uses_next_period_estimate(self):
        returns = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        hurst = make_hurst([np.nan, 0.5, 0.9, 0.5, 0.5])
        assert fair_sigma_alpha(returns, hurst, 0.05) == pytest.approx(math.sqrt(7.0 / 3.0), rel=1e-12)

    def test_too_few_qualify(self):
        hurst = make_hurst([np.nan, 0.5, 0.99, 0.99])
        with pytest.raises(InsufficientSampleError):
            fair_sigma_alpha(np.ones(4), hurst, 0.05)

    def test_alignment(self):
        with pytest.raises(ConfigurationError):
            fair_sigma_alpha(np.ones(3), make_hurst([0.5, 0.5]), 0.05)


class TestStraddle:
    @pytest.mark.parametrize("terminal,payoff", [(110.0, 2.0), (100.0, -8.0), (90.0, 2.0)])
    def test_payoffs(self, terminal, payoff):
        assert straddle_payoff(terminal, 100.0, 5.0, 3.0) == payoff

    def test_symmetric_about_strike(self):
        for d in (0.5, 7.0, 25.0):
            assert straddle_payoff(100.0 + d, 100.0, 5.0, 3.0) == straddle_payoff(100.0 - d, 100.0, 5.0, 3.0)

    def test_negative_premium(self):
        with pytest.raises(ParameterError):
            straddle_payoff(100.0, 100.0, -1.0, 3.0)
