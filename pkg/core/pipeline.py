"""
Price ingestion, the dataset manifest, end-to-end analysis and report /
plot-data export.
"""
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.errors import (ConfigurationError, DataError, DegenerateSampleError, FairVolError,
                         InsufficientSampleError)
from core.estimate import (HurstSeries, RollingConfig, VolatilitySeries, classify_regime,
                           estimate_hurst, estimate_volatility, log_returns)
from core.stats import (AdfResult, EfficiencyMetrics, SummaryStats, adf_test, efficiency_metrics,
                        fair_band_aggregate, fair_sigma_alpha, regime_shares, summary_stats)
from core.utils import format_report_for_export, get_worker_count, sanitize_filename

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

SERIES_FORMAT = "%.15g"
PRICE_FORMAT = "%.17g"
MANIFEST_COLUMNS = ["index_name", "country", "ticker", "start_date", "end_date", "size"]


@dataclass(frozen=True)
class PricePath:
    """Daily closing prices of one instrument"""

    instrument: str
    dates: np.ndarray
    closes: np.ndarray
    dropped: int = 0

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        closes = np.asarray(self.closes, dtype=float)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "closes", closes)
        if dates.shape != closes.shape:
            raise DataError(f"{self.instrument}: dates and closes have different lengths")
        if np.any(~np.isfinite(closes)) or np.any(closes <= 0):
            index = int(np.flatnonzero(~(closes > 0) | ~np.isfinite(closes))[0])
            raise DataError(f"{self.instrument}: close at index {index} is not strictly positive",
                            index=index)
        if dates.size > 1 and np.any(np.diff(dates).astype(int) <= 0):
            index = int(np.flatnonzero(np.diff(dates).astype(int) <= 0)[0]) + 1
            raise DataError(f"{self.instrument}: dates are not strictly increasing at index {index}",
                            index=index)

    def __len__(self) -> int:
        return int(self.closes.size)

    @property
    def start_date(self) -> str:
        return str(self.dates[0]) if self.dates.size else ""

    @property
    def end_date(self) -> str:
        return str(self.dates[-1]) if self.dates.size else ""


def load_csv(path: PathLike, instrument: Optional[str] = None) -> PricePath:
    """Read a `date,close` CSV; blank closes are dropped, everything else must parse"""
    path = Path(path)
    instrument = instrument or path.stem
    if not path.exists():
        raise DataError(f"{instrument}: input file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False,
                            encoding="utf-8-sig")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError(f"{instrument}: cannot parse {path}: {e}")

    columns = [str(c).strip().lower() for c in frame.columns]
    if columns != ["date", "close"]:
        raise DataError(f"{instrument}: expected header 'date,close', got {','.join(frame.columns)}",
                        line=1)
    frame.columns = columns
    frame = frame.fillna("")
    raw_dates = frame["date"].str.strip()
    raw_closes = frame["close"].str.strip()
    # line 1 is the header
    lines = np.arange(len(frame)) + 2

    blank_row = (raw_dates == "") & (raw_closes == "")
    blank_close = (raw_closes == "") & ~blank_row
    keep = ~(blank_row | blank_close)

    dates = pd.to_datetime(raw_dates, format="%Y-%m-%d", errors="coerce")
    bad_date = keep & dates.isna()
    if bad_date.any():
        i = int(np.flatnonzero(bad_date.to_numpy())[0])
        raise DataError(f"{instrument}: invalid date {raw_dates.iloc[i]!r} on line {lines[i]}",
                        line=int(lines[i]))

    closes = pd.to_numeric(raw_closes.where(keep, "1"), errors="coerce")
    bad_close = keep & (closes.isna() | ~np.isfinite(closes) | (closes <= 0))
    if bad_close.any():
        i = int(np.flatnonzero(bad_close.to_numpy())[0])
        raise DataError(f"{instrument}: invalid close {raw_closes.iloc[i]!r} on line {lines[i]}",
                        line=int(lines[i]))

    dropped = int(blank_close.sum())
    if dropped:
        logger.warning(f"{instrument}: dropped {dropped} rows with an empty close")

    keep = keep.to_numpy()
    kept_dates = dates[keep].to_numpy().astype("datetime64[D]")
    kept_lines = lines[keep]
    if kept_dates.size == 0:
        raise DataError(f"{instrument}: no price rows in {path}")
    steps = np.diff(kept_dates).astype(int)
    if np.any(steps == 0):
        i = int(np.flatnonzero(steps == 0)[0]) + 1
        raise DataError(f"{instrument}: duplicate date {kept_dates[i]} on line {kept_lines[i]}",
                        line=int(kept_lines[i]))
    if np.any(steps < 0):
        i = int(np.flatnonzero(steps < 0)[0]) + 1
        raise DataError(f"{instrument}: date {kept_dates[i]} on line {kept_lines[i]} is out of order",
                        line=int(kept_lines[i]))

    # float() rounds correctly
    exact = raw_closes[keep].map(float).to_numpy(dtype=float)
    return PricePath(instrument, kept_dates, exact, dropped=dropped)


def write_price_csv(prices: PricePath, destination: PathLike) -> None:
    """Write a PricePath in the `date,close` layout read by load_csv"""
    frame = pd.DataFrame({"date": prices.dates.astype(str), "close": prices.closes})
    frame.to_csv(destination, index=False, float_format=PRICE_FORMAT, lineterminator="\n")


def prices_from_returns(returns: Sequence[float], instrument: str = "synthetic",
                        start_price: float = 100.0, start_date: str = "2000-01-03") -> PricePath:
    """Exponentiate cumulated log-returns onto consecutive business days"""
    returns = np.asarray(returns, dtype=float)
    if start_price <= 0:
        raise ConfigurationError(f"start_price must be positive, got {start_price}")
    closes = start_price * np.exp(np.concatenate([[0.0], np.cumsum(returns)]))
    dates = pd.bdate_range(start=start_date, periods=closes.size).to_numpy().astype("datetime64[D]")
    return PricePath(instrument, dates, closes)


# --- Dataset manifest -------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    index_name: str
    country: str
    ticker: str
    start_date: str
    end_date: str
    size: int


@dataclass
class DatasetManifest:
    """Per-instrument ticker, country label, date span and observation count"""

    entries: List[ManifestEntry] = field(default_factory=list)

    @classmethod
    def build(cls, prices: Sequence[PricePath],
              labels: Optional[Dict[str, Dict[str, str]]] = None) -> "DatasetManifest":
        labels = labels or {}
        entries = []
        for path in prices:
            label = labels.get(path.instrument, {})
            entries.append(ManifestEntry(
                index_name=label.get("index_name", path.instrument),
                country=label.get("country", ""),
                ticker=label.get("ticker", path.instrument),
                start_date=path.start_date,
                end_date=path.end_date,
                size=len(path),
            ))
        return cls(entries)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(e) for e in self.entries], columns=MANIFEST_COLUMNS)

    def write(self, destination: PathLike) -> None:
        self.to_frame().to_csv(destination, index=False, lineterminator="\n")

    @classmethod
    def read(cls, path: PathLike) -> "DatasetManifest":
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataError(f"Cannot read manifest {path}: {e}")
        missing = [c for c in MANIFEST_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"Manifest {path} is missing columns: {', '.join(missing)}")
        entries = []
        for row_number, row in enumerate(frame.to_dict("records"), start=2):
            try:
                size = int(row["size"].replace(",", ""))
            except ValueError:
                raise DataError(f"Manifest size {row['size']!r} is not an integer", line=row_number)
            if row["start_date"] > row["end_date"]:
                raise DataError(f"Manifest start date after end date for {row['ticker']}",
                                line=row_number)
            entries.append(ManifestEntry(row["index_name"], row["country"], row["ticker"],
                                         row["start_date"], row["end_date"], size))
        return cls(entries)

    def entry_for(self, name: str) -> Optional[ManifestEntry]:
        for entry in self.entries:
            if name in (entry.ticker, entry.index_name):
                return entry
        return None

    def verify(self, prices: PricePath) -> ManifestEntry:
        """Check a loaded series against its manifest row"""
        entry = self.entry_for(prices.instrument)
        if entry is None:
            raise DataError(f"{prices.instrument}: not listed in the manifest")
        if entry.size != len(prices):
            raise DataError(f"{prices.instrument}: manifest size {entry.size} but {len(prices)} "
                            f"records loaded")
        if (entry.start_date, entry.end_date) != (prices.start_date, prices.end_date):
            raise DataError(f"{prices.instrument}: manifest span {entry.start_date}..{entry.end_date} "
                            f"does not match {prices.start_date}..{prices.end_date}")
        return entry


# --- Analysis ---------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisReport:
    """Everything reported for one instrument"""

    instrument: str
    start_date: str
    end_date: str
    n_obs: int
    config: RollingConfig
    dates: np.ndarray
    hurst: HurstSeries
    vol: VolatilitySeries
    hurst_stats: Optional[SummaryStats]
    vol_stats: Optional[SummaryStats]
    adf: Optional[AdfResult]
    hurst_ci: Tuple[float, float]
    fair_band: Tuple[float, float]
    sigma_alpha: float
    metrics: EfficiencyMetrics
    regimes: Dict[str, float]

    def to_dict(self) -> Dict[str, Any]:
        """Stable-key dictionary; NaN entries become None once serialized"""
        return {
            "instrument": {
                "name": self.instrument,
                "start_date": self.start_date,
                "end_date": self.end_date,
                "n_obs": self.n_obs,
            },
            "config": self.config.describe(),
            "hurst_summary": self.hurst_stats.as_dict() if self.hurst_stats else None,
            "hurst_ci": list(self.hurst_ci),
            "adf": self.adf.as_dict() if self.adf else None,
            "volatility_summary": self.vol_stats.as_dict() if self.vol_stats else None,
            "fair_volatility": {
                "band_mean": list(self.fair_band),
                "sigma_alpha": self.sigma_alpha,
            },
            "efficiency": self.metrics.as_dict(),
            "regime_shares": dict(self.regimes),
            "scale": self.hurst.scale,
            "series": {
                "date": self.dates.astype(str).tolist(),
                "h_hat": self.hurst.h_hat,
                "h_raw": self.hurst.h_raw,
                "s2": self.hurst.s2,
                "clamped": self.hurst.clamped,
                "regime": self.hurst.regime.tolist(),
                "sigma_hist": self.vol.sigma_hist,
                "sigma_theo": self.vol.sigma_theo,
                "nu_hat": self.vol.nu_hat,
                "nu_raw": self.vol.nu_raw,
                "fair_lo": self.vol.fair_lo,
                "fair_hi": self.vol.fair_hi,
            },
        }


def _optional_statistic(instrument: str, label: str, func, *args):
    try:
        return func(*args)
    except (InsufficientSampleError, DegenerateSampleError) as e:
        logger.warning(f"{instrument}: {label} unavailable: {e}")
        return None


def _with_instrument(error: FairVolError, instrument: str) -> FairVolError:
    message = str(error)
    if not message.startswith(f"{instrument}:"):
        error.args = (f"{instrument}: {message}",) + error.args[1:]
    return error


def run_analysis(prices: PricePath, cfg: RollingConfig = RollingConfig()) -> AnalysisReport:
    """Returns, rolling Hurst and volatility estimates, statistics and efficiency metrics"""
    name = prices.instrument
    if len(prices) < cfg.delta + 2:
        raise ConfigurationError(f"{name}: need at least delta + 2 = {cfg.delta + 2} prices, "
                                 f"got {len(prices)}")
    logger.info(f"{name}: analysing {len(prices)} prices with {cfg.describe()}")
    try:
        returns = log_returns(prices)
        hurst = estimate_hurst(returns, cfg)
        vol = estimate_volatility(returns, hurst, cfg)
        regimes = classify_regime(hurst)
        metrics = efficiency_metrics(hurst, vol)

        hurst_stats = _optional_statistic(name, "Hurst summary", summary_stats, hurst.h_hat)
        vol_stats = _optional_statistic(name, "volatility summary", summary_stats, vol.sigma_hist)
        adf = _optional_statistic(name, "ADF test", adf_test, hurst.h_hat)
        sigma_alpha = _optional_statistic(name, "sigma(alpha)", fair_sigma_alpha, returns, hurst,
                                          cfg.alpha)
    except FairVolError as e:
        raise _with_instrument(e, name)

    return AnalysisReport(
        instrument=name,
        start_date=prices.start_date,
        end_date=prices.end_date,
        n_obs=len(prices),
        config=cfg,
        dates=prices.dates[1:],
        hurst=hurst,
        vol=vol,
        hurst_stats=hurst_stats,
        vol_stats=vol_stats,
        adf=adf,
        hurst_ci=(hurst.ci_lo, hurst.ci_hi),
        fair_band=fair_band_aggregate(vol),
        sigma_alpha=float("nan") if sigma_alpha is None else sigma_alpha,
        metrics=metrics,
        regimes=regime_shares(regimes),
    )


def run_batch(paths: Sequence[PathLike], cfg: RollingConfig = RollingConfig(),
              manifest: Optional[DatasetManifest] = None, workers: int = 0) -> List[AnalysisReport]:
    """Load and analyse several instruments; reports come back in input order"""
    def one(path: PathLike) -> AnalysisReport:
        prices = load_csv(path)
        if manifest is not None:
            manifest.verify(prices)
        return run_analysis(prices, cfg)

    workers = workers or get_worker_count()
    if workers <= 1 or len(paths) <= 1:
        return [one(p) for p in paths]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(one, paths))


# --- Export -----------------------------------------------------------------

def _fmt(value: Optional[float], digits: int = 4) -> str:
    if value is None or not np.isfinite(value):
        return ""
    return f"{value:.{digits}f}"


def _interval(bounds: Tuple[float, float]) -> str:
    return f"[{_fmt(bounds[0], 3)},{_fmt(bounds[1], 3)}]"


def summary_table(report: AnalysisReport) -> pd.DataFrame:
    """Hurst and historical-volatility summary rows with their ADF and interval lines"""
    rows = []

    def add(section: str, label: str, value: str):
        rows.append({"section": section, "label": label, report.instrument: value})

    for section, stats in (("Hurst-Holder parameter", report.hurst_stats),
                           ("Historical volatility", report.vol_stats)):
        add(section, "Mean", _fmt(stats.mean) if stats else "")
        add(section, "St.Dev", _fmt(stats.sd) if stats else "")
        add(section, "Range", _fmt(stats.range) if stats else "")
        add(section, "Kurtosis", _fmt(stats.kurtosis) if stats else "")
        add(section, "Skewness", _fmt(stats.skewness) if stats else "")
        if section == "Hurst-Holder parameter":
            add(section, "95% Confidence interval", _interval(report.hurst_ci))
            add("ADF test", "pValue", _fmt(report.adf.p_value, 3) if report.adf else "")
            add("ADF test", "Stat", _fmt(report.adf.statistic, 3) if report.adf else "")
            add("ADF test", "cValue", _fmt(report.adf.critical_value_5pct, 3) if report.adf else "")
        else:
            add(section, "95% C.I. fair volatility", _interval(report.fair_band))
            add(section, "sigma(alpha)", _fmt(report.sigma_alpha))
    return pd.DataFrame(rows)


def metrics_table(report: AnalysisReport) -> pd.DataFrame:
    """The two efficiency-percentage rows"""
    return pd.DataFrame({
        "metric": ["Percentage H in 95%-CI", "Percentage sigma in 95%-CI"],
        report.instrument: [_fmt(report.metrics.pct_h_in_ci, 2), _fmt(report.metrics.pct_vol_in_ci, 2)],
    })


def hurst_table(report: AnalysisReport) -> pd.DataFrame:
    h = report.hurst
    return pd.DataFrame({
        "index": h.t_index,
        "date": report.dates.astype(str),
        "h_hat": h.h_hat,
        "h_raw": h.h_raw,
        "ci_lo": h.ci_lo,
        "ci_hi": h.ci_hi,
        "regime": h.regime,
        "clamped": h.clamped,
    })


def volatility_table(report: AnalysisReport) -> pd.DataFrame:
    v = report.vol
    return pd.DataFrame({
        "index": report.hurst.t_index,
        "date": report.dates.astype(str),
        "sigma_hist": v.sigma_hist,
        "sigma_theo": v.sigma_theo,
        "nu_hat": v.nu_hat,
        "nu_raw": v.nu_raw,
        "fair_lo": v.fair_lo,
        "fair_hi": v.fair_hi,
    })


def _write_csv(frame: pd.DataFrame, destination: Path, float_format: Optional[str] = None) -> Path:
    frame.to_csv(destination, index=False, float_format=float_format, lineterminator="\n")
    return destination


def _report_dir(report: AnalysisReport, destination: PathLike) -> Path:
    folder = Path(destination) / sanitize_filename(report.instrument)
    try:
        folder.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"{report.instrument}: cannot create output directory {folder}: {e}")
    return folder


def export_report(report: AnalysisReport, destination: PathLike,
                  formats: Sequence[str] = ("json", "csv")) -> List[Path]:
    """Write report.json, the CSV tables and optionally report.md under destination/<instrument>"""
    folder = _report_dir(report, destination)
    written = []
    for format_type in formats:
        if format_type == "json":
            target = folder / "report.json"
            target.write_text(format_report_for_export(report.to_dict(), "json") + "\n", encoding="utf-8")
            written.append(target)
        elif format_type == "csv":
            written.append(_write_csv(hurst_table(report), folder / "hurst.csv", SERIES_FORMAT))
            written.append(_write_csv(volatility_table(report), folder / "volatility.csv", SERIES_FORMAT))
            written.append(_write_csv(summary_table(report), folder / "summary.csv"))
            written.append(_write_csv(metrics_table(report), folder / "metrics.csv"))
        elif format_type == "md":
            target = folder / "report.md"
            target.write_text(format_report_for_export(report.to_dict(), "md"), encoding="utf-8")
            written.append(target)
        else:
            raise ConfigurationError(f"Unknown export format: {format_type}")
    logger.info(f"{report.instrument}: wrote {len(written)} files to {folder}")
    return written


def _array(values: Optional[List[Any]], dtype=float) -> np.ndarray:
    return np.array([np.nan if v is None else v for v in values], dtype=dtype)


def _stats_from(payload: Optional[Dict[str, Any]]) -> Optional[SummaryStats]:
    return SummaryStats(**payload) if payload else None


def _nan(value: Optional[float]) -> float:
    return float("nan") if value is None else float(value)


def load_report_json(path: PathLike) -> AnalysisReport:
    """Rebuild an AnalysisReport from report.json"""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(f"Cannot read report {path}: {e}")

    config = payload["config"]
    cfg = RollingConfig(delta=config["delta"], alpha=config["alpha"], nu_window=config["nu_window"],
                        standardize=config["standardize"])
    instrument = payload["instrument"]
    series = payload["series"]
    ci_lo, ci_hi = payload["hurst_ci"]
    hurst = HurstSeries(
        h_hat=_array(series["h_hat"]),
        h_raw=_array(series["h_raw"]),
        s2=_array(series["s2"]),
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        regime=np.array(series["regime"], dtype=object),
        clamped=np.array(series["clamped"], dtype=bool),
        delta=cfg.delta,
        n_obs=instrument["n_obs"],
        alpha=cfg.alpha,
        scale=payload["scale"],
    )
    vol = VolatilitySeries(**{name: _array(series[name]) for name in
                              ("sigma_hist", "sigma_theo", "nu_hat", "nu_raw", "fair_lo", "fair_hi")})
    fair = payload["fair_volatility"]
    adf = payload["adf"]
    return AnalysisReport(
        instrument=instrument["name"],
        start_date=instrument["start_date"],
        end_date=instrument["end_date"],
        n_obs=instrument["n_obs"],
        config=cfg,
        dates=np.array(series["date"], dtype="datetime64[D]"),
        hurst=hurst,
        vol=vol,
        hurst_stats=_stats_from(payload["hurst_summary"]),
        vol_stats=_stats_from(payload["volatility_summary"]),
        adf=AdfResult(**adf) if adf else None,
        hurst_ci=(ci_lo, ci_hi),
        fair_band=tuple(_nan(v) for v in fair["band_mean"]),
        sigma_alpha=_nan(fair["sigma_alpha"]),
        metrics=EfficiencyMetrics(**payload["efficiency"]),
        regimes={k: _nan(v) for k, v in payload["regime_shares"].items()},
    )


def export_plot_data(report: AnalysisReport, destination: PathLike) -> List[Path]:
    """Three aligned panels: Hurst with band, volatilities with fair band, nu"""
    folder = _report_dir(report, destination)
    index = report.hurst.t_index
    dates = report.dates.astype(str)
    hurst_panel = pd.DataFrame({
        "index": index, "date": dates, "h_hat": report.hurst.h_hat,
        "band_lo": report.hurst.ci_lo, "band_hi": report.hurst.ci_hi,
    })
    vol_panel = pd.DataFrame({
        "index": index, "date": dates, "sigma_hist": report.vol.sigma_hist,
        "sigma_theo": report.vol.sigma_theo, "fair_lo": report.vol.fair_lo, "fair_hi": report.vol.fair_hi,
    })
    nu_panel = pd.DataFrame({"index": index, "date": dates, "nu_hat": report.vol.nu_hat})
    return [
        _write_csv(hurst_panel, folder / "panel_hurst.csv", SERIES_FORMAT),
        _write_csv(vol_panel, folder / "panel_volatility.csv", SERIES_FORMAT),
        _write_csv(nu_panel, folder / "panel_nu.csv", SERIES_FORMAT),
    ]

