"""
Command-line surface: exit codes, determinism and written artifacts
"""
import json
from dataclasses import replace
from typing import List

import pandas as pd
import pytest

from app import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from commands.analyze import format_summary
from core.pipeline import prices_from_returns, run_analysis, write_price_csv
from core.simulate import gen_fgn


def run(argv: List[str]) -> int:
    try:
        return main(argv)
    except SystemExit as e:
        return e.code


@pytest.fixture
def price_file(tmp_path):
    path = tmp_path / "SPX.csv"
    write_price_csv(prices_from_returns(gen_fgn(600, 0.5, 2).values * 0.4, instrument="SPX"), path)
    return path


class TestSimulate:
    def test_deterministic_stdout(self, capsys):
        assert run(["simulate", "--process", "fbm", "--n", "64", "--seed", "7"]) == EXIT_OK
        first = capsys.readouterr()
        assert run(["simulate", "--process", "fbm", "--n", "64", "--seed", "7"]) == EXIT_OK
        second = capsys.readouterr()
        assert first.out == second.out
        lines = first.out.splitlines()
        assert lines[0] == "index,time,value"
        assert len(lines) == 65
        assert first.err.startswith("config: ")

    def test_writes_file(self, tmp_path):
        target = tmp_path / "mpre.csv"
        argv = ["simulate", "--process", "mpre", "--n", "128", "--seed", "3", "--h", "0.3",
                "--nu", "2", "--truncation", "1", "--substeps", "2", "--output", str(target)]
        assert run(argv) == EXIT_OK
        frame = pd.read_csv(target)
        assert list(frame.columns) == ["index", "time", "value"]
        assert frame["value"].iloc[0] == 0.0

    @pytest.mark.parametrize("flags", [["--process", "ar1", "--phi", "1.5"],
                                       ["--process", "fbm", "--h", "1.2"],
                                       ["--process", "fgn", "--n", "1"],
                                       ["--process", "brownian"]])
    def test_usage_errors(self, flags):
        assert run(["simulate", "--seed", "1"] + flags) == EXIT_USAGE

    def test_seed_required(self):
        assert run(["simulate", "--process", "fbm"]) == EXIT_USAGE


class TestAnalyze:
    def test_writes_report(self, price_file, tmp_path, capsys):
        out = tmp_path / "reports"
        argv = ["analyze", "--input", str(price_file), "--output", str(out), "--plot-data", "--markdown"]
        assert run(argv) == EXIT_OK
        folder = out / "SPX"
        for name in ("report.json", "report.md", "hurst.csv", "volatility.csv", "summary.csv",
                     "metrics.csv", "panel_hurst.csv", "panel_volatility.csv", "panel_nu.csv"):
            assert (folder / name).exists()
        payload = json.loads((folder / "report.json").read_text(encoding="utf-8"))
        assert sum(payload["regime_shares"].values()) == pytest.approx(100.0)
        assert payload["config"]["delta"] == 20
        captured = capsys.readouterr()
        assert "regimes:" in captured.out
        assert captured.err.startswith("config: ")

    def test_summary_reports_adf_verdict(self):
        stationary = run_analysis(prices_from_returns(gen_fgn(4096, 0.5, 17).values, instrument="brownian"))
        assert stationary.adf.rejects_unit_root
        assert "(stationary)" in format_summary(stationary)
        persistent = replace(stationary, adf=replace(stationary.adf, statistic=0.0))
        assert "(unit root not rejected)" in format_summary(persistent)

    def test_bad_delta(self, price_file, tmp_path):
        assert run(["analyze", "--input", str(price_file), "--delta", "3",
                    "--output", str(tmp_path)]) == EXIT_USAGE

    def test_missing_input(self, tmp_path, capsys):
        assert run(["analyze", "--input", str(tmp_path / "absent.csv"),
                    "--output", str(tmp_path)]) == EXIT_FAILURE
        assert "Error:" in capsys.readouterr().err

    def test_manifest_mismatch(self, price_file, tmp_path):
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("index_name,country,ticker,start_date,end_date,size\n"
                            "S&P 500,USA,SPX,2000-01-03,2000-02-01,22\n", encoding="utf-8")
        assert run(["analyze", "--input", str(price_file), "--manifest", str(manifest),
                    "--output", str(tmp_path)]) == EXIT_FAILURE


class TestValidate:
    def test_specfun_passes(self, capsys):
        assert run(["validate", "--suite", "specfun", "--seed", "0"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "case_id,measured,expected,tolerance,passed"
        assert all(line.endswith(",True") for line in lines[1:])

    def test_estimator_deterministic_stdout(self, capsys):
        argv = ["validate", "--suite", "estimator", "--paths", "2", "--seed", "3"]
        first_code = run(argv)
        first = capsys.readouterr().out
        assert run(argv) == first_code
        assert capsys.readouterr().out == first
        assert first.splitlines()[0] == "case_id,measured,expected,tolerance,passed"

    def test_unknown_suite(self):
        assert run(["validate", "--suite", "bogus", "--seed", "0"]) == EXIT_USAGE

    def test_prop1_needs_paths(self):
        assert run(["validate", "--suite", "prop1", "--paths", "50", "--seed", "0"]) == EXIT_USAGE


class TestDemo:
    def test_outputs(self, tmp_path, capsys):
        assert run(["demo", "--seed", "5", "--n", "500", "--output", str(tmp_path)]) == EXIT_OK
        assert (tmp_path / "short_memory.csv").exists()
        queued = pd.read_csv(tmp_path / "queued_fgn.csv")
        assert queued["segment"].value_counts().to_dict() == {1: 2048, 2: 2048}

        out = capsys.readouterr().out
        rows = {line.split(",")[0]: line.split(",")[1:] for line in out.splitlines() if "," in line}
        for segment in ("queued_segment_1", "queued_segment_2"):
            measured, theoretical = (float(v) for v in rows[segment])
            assert measured == pytest.approx(theoretical, abs=0.08)
        assert "110,100,2" in out
        assert "100,100,-8" in out

    def test_short_n(self, tmp_path):
        assert run(["demo", "--n", "5", "--output", str(tmp_path)]) == EXIT_USAGE
