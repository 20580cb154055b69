"""
Price ingestion, the dataset manifest, end-to-end analysis and export
"""
import numpy as np
import pandas as pd
import pytest

from core.errors import ConfigurationError, DataError
from core.estimate import RollingConfig
from core.pipeline import (DatasetManifest, PricePath, export_plot_data, export_report, load_csv,
                           load_report_json, metrics_table, prices_from_returns, run_analysis,
                           run_batch, summary_table, write_price_csv)
from core.simulate import gen_fgn
from core.utils import format_report_for_export


def write_text(path, text: str):
    path.write_bytes(text.encode("utf-8"))
    return path


@pytest.fixture(scope="module")
def brownian_report():
    prices = prices_from_returns(gen_fgn(4096, 0.5, 17).values, instrument="brownian")
    return run_analysis(prices)


class TestLoadCsv:
    def test_two_rows(self, tmp_path):
        prices = load_csv(write_text(tmp_path / "idx.csv", "date,close\n2020-01-02,100\n2020-01-03,101.5\n"))
        assert prices.instrument == "idx"
        assert len(prices) == 2
        np.testing.assert_array_equal(prices.closes, [100.0, 101.5])
        assert (prices.start_date, prices.end_date) == ("2020-01-02", "2020-01-03")

    def test_invalid_date_line(self, tmp_path):
        with pytest.raises(DataError) as excinfo:
            load_csv(write_text(tmp_path / "bad.csv", "date,close\n2020-02-30,100\n"))
        assert excinfo.value.line == 2

    def test_invalid_close_line(self, tmp_path):
        text = "date,close\n2020-01-02,100\n2020-01-03,abc\n"
        with pytest.raises(DataError) as excinfo:
            load_csv(write_text(tmp_path / "bad.csv", text))
        assert excinfo.value.line == 3

    def test_blank_close_dropped(self, tmp_path):
        text = "date,close\n2020-01-02,100\n2020-01-03,\n2020-01-06,102\n"
        prices = load_csv(write_text(tmp_path / "gap.csv", text))
        assert len(prices) == 2
        assert prices.dropped == 1

    def test_duplicate_date(self, tmp_path):
        text = "date,close\n2020-01-02,100\n2020-01-02,101\n"
        with pytest.raises(DataError) as excinfo:
            load_csv(write_text(tmp_path / "dup.csv", text))
        assert excinfo.value.line == 3

    def test_out_of_order(self, tmp_path):
        text = "date,close\n2020-01-03,100\n2020-01-02,101\n"
        with pytest.raises(DataError):
            load_csv(write_text(tmp_path / "order.csv", text))

    def test_crlf(self, tmp_path):
        prices = load_csv(write_text(tmp_path / "win.csv", "date,close\r\n2020-01-02,100\r\n2020-01-03,99\r\n"))
        np.testing.assert_array_equal(prices.closes, [100.0, 99.0])

    def test_wrong_header(self, tmp_path):
        with pytest.raises(DataError) as excinfo:
            load_csv(write_text(tmp_path / "hdr.csv", "day,price\n2020-01-02,100\n"))
        assert excinfo.value.line == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "absent.csv")

    def test_write_then_load(self, tmp_path):
        prices = prices_from_returns(gen_fgn(65, 0.5, 1).values * 0.3, instrument="rt")
        write_price_csv(prices, tmp_path / "rt.csv")
        loaded = load_csv(tmp_path / "rt.csv")
        np.testing.assert_array_equal(loaded.closes, prices.closes)
        np.testing.assert_array_equal(loaded.dates, prices.dates)

    def test_closes_parse_to_nearest_double(self, tmp_path):
        text = "date,close\n2020-01-02,104.14380912345679\n2020-01-03,0.30000000000000004\n"
        prices = load_csv(write_text(tmp_path / "digits.csv", text))
        assert prices.closes.tolist() == [104.14380912345679, 0.30000000000000004]


class TestPricePath:
    def test_rejects_non_positive(self):
        with pytest.raises(DataError) as excinfo:
            PricePath("x", ["2020-01-02", "2020-01-03"], [1.0, -1.0])
        assert excinfo.value.index == 1

    def test_from_returns_uses_business_days(self):
        prices = prices_from_returns([0.0, 0.0, 0.0], start_date="2020-01-03")
        assert prices.dates.astype(str).tolist() == ["2020-01-03", "2020-01-06", "2020-01-07", "2020-01-08"]
        np.testing.assert_allclose(prices.closes, 100.0)


class TestManifest:
    def test_write_read_verify(self, tmp_path):
        prices = prices_from_returns(np.zeros(9), instrument="SPX")
        manifest = DatasetManifest.build([prices], {"SPX": {"index_name": "S&P 500", "country": "USA"}})
        manifest.write(tmp_path / "manifest.csv")
        loaded = DatasetManifest.read(tmp_path / "manifest.csv")
        assert loaded.entries == manifest.entries
        entry = loaded.verify(prices)
        assert (entry.country, entry.size) == ("USA", 10)

    def test_size_mismatch(self):
        prices = prices_from_returns(np.zeros(9), instrument="SPX")
        manifest = DatasetManifest.build([prices_from_returns(np.zeros(5), instrument="SPX")])
        with pytest.raises(DataError):
            manifest.verify(prices)

    def test_unlisted(self):
        with pytest.raises(DataError):
            DatasetManifest().verify(prices_from_returns(np.zeros(3), instrument="DAX"))

    def test_thousands_separator_in_size(self, tmp_path):
        text = "index_name,country,ticker,start_date,end_date,size\nS&P 500,USA,SPX,1928-01-03,2025-06-30,\"24,527\"\n"
        manifest = DatasetManifest.read(write_text(tmp_path / "m.csv", text))
        assert manifest.entry_for("SPX").size == 24527


class TestRunAnalysis:
    def test_brownian_is_efficient(self, brownian_report):
        report = brownian_report
        assert 0.48 <= report.hurst_stats.mean <= 0.52
        assert report.adf.p_value <= 0.01
        assert 80.0 <= report.metrics.pct_h_in_ci <= 99.0
        assert report.metrics.pct_vol_in_ci >= 80.0
        assert report.regimes["efficient"] > 50.0
        assert sum(report.regimes.values()) == pytest.approx(100.0)

    def test_alignment(self, brownian_report):
        report = brownian_report
        assert report.n_obs == 4096
        assert report.dates.size == report.hurst.h_hat.size == 4095
        assert report.hurst_ci[0] + report.hurst_ci[1] == 1.0

    def test_persistent_series_is_momentum(self):
        prices = prices_from_returns(gen_fgn(4096, 0.75, 23).values, instrument="persistent")
        report = run_analysis(prices)
        assert 0.70 <= report.hurst_stats.mean <= 0.80
        assert max(report.regimes, key=report.regimes.get) == "momentum"

    def test_too_short(self):
        prices = prices_from_returns(np.full(20, 0.01), instrument="short")
        with pytest.raises(ConfigurationError) as excinfo:
            run_analysis(prices, RollingConfig(delta=20))
        assert "short" in str(excinfo.value)

    def test_deterministic(self):
        prices = prices_from_returns(gen_fgn(512, 0.5, 4).values)
        first, second = run_analysis(prices), run_analysis(prices)
        np.testing.assert_array_equal(first.hurst.h_hat, second.hurst.h_hat)
        np.testing.assert_array_equal(first.vol.fair_hi, second.vol.fair_hi)

    def test_batch_keeps_order(self, tmp_path):
        files = []
        for k, name in enumerate(("first", "second", "third")):
            prices = prices_from_returns(gen_fgn(257, 0.5, k).values, instrument=name)
            write_price_csv(prices, tmp_path / f"{name}.csv")
            files.append(tmp_path / f"{name}.csv")
        reports = run_batch(files, workers=3)
        assert [r.instrument for r in reports] == ["first", "second", "third"]


class TestExport:
    def test_json_reload(self, brownian_report, tmp_path):
        export_report(brownian_report, tmp_path, formats=("json",))
        loaded = load_report_json(tmp_path / "brownian" / "report.json")
        assert format_report_for_export(loaded.to_dict()) == format_report_for_export(brownian_report.to_dict())

    def test_tables(self, brownian_report, tmp_path):
        written = export_report(brownian_report, tmp_path, formats=("json", "csv", "md"))
        names = {p.name for p in written}
        assert names == {"report.json", "hurst.csv", "volatility.csv", "summary.csv", "metrics.csv", "report.md"}
        summary = pd.read_csv(tmp_path / "brownian" / "summary.csv", dtype=str, keep_default_na=False)
        labels = summary["label"].tolist()
        for label in ("Mean", "St.Dev", "Range", "Kurtosis", "Skewness", "95% Confidence interval",
                      "pValue", "Stat", "cValue", "95% C.I. fair volatility", "sigma(alpha)"):
            assert label in labels
        metrics = pd.read_csv(tmp_path / "brownian" / "metrics.csv", dtype=str)
        assert metrics["metric"].tolist() == ["Percentage H in 95%-CI", "Percentage sigma in 95%-CI"]

    def test_markdown_export_is_byte_identical(self, brownian_report, tmp_path):
        export_report(brownian_report, tmp_path / "first", formats=("md",))
        export_report(brownian_report, tmp_path / "second", formats=("md",))
        first = (tmp_path / "first" / "brownian" / "report.md").read_bytes()
        assert first == (tmp_path / "second" / "brownian" / "report.md").read_bytes()

    def test_summary_interval_format(self, brownian_report):
        summary = summary_table(brownian_report)
        interval = summary.loc[summary["label"] == "95% Confidence interval", "brownian"].item()
        lo, hi = brownian_report.hurst_ci
        assert interval == f"[{lo:.3f},{hi:.3f}]"
        assert metrics_table(brownian_report)["brownian"].str.match(r"^\d+\.\d{2}$").all()

    def test_plot_panels(self, brownian_report, tmp_path):
        paths = export_plot_data(brownian_report, tmp_path)
        panels = [pd.read_csv(p) for p in paths]
        for panel in panels[1:]:
            assert panel["index"].tolist() == panels[0]["index"].tolist()
            assert panel["date"].tolist() == panels[0]["date"].tolist()
        vol = panels[1].dropna()
        assert (vol["fair_lo"] <= vol["fair_hi"]).all()
        assert (panels[0]["band_lo"] < panels[0]["band_hi"]).all()

    def test_unknown_format(self, brownian_report, tmp_path):
        with pytest.raises(ConfigurationError):
            export_report(brownian_report, tmp_path, formats=("xlsx",))
