import json
import sys

from core.errors import ConfigurationError, UsageError
from core.estimate import RollingConfig
from core.pipeline import AnalysisReport, DatasetManifest, export_plot_data, export_report, run_batch


def build_rolling_config(args) -> RollingConfig:
    try:
        return RollingConfig(delta=args.delta, alpha=args.alpha, nu_window=args.nu_window,
                             standardize=args.standardize)
    except ConfigurationError as e:
        raise UsageError(str(e))


def format_summary(report: AnalysisReport) -> str:
    """One-screen text summary of a report"""
    mean_h = f"{report.hurst_stats.mean:.4f}" if report.hurst_stats else "n/a"
    lines = [
        f"{report.instrument}: {report.n_obs} prices, {report.start_date} .. {report.end_date}",
        f"  mean H: {mean_h}  95% band: [{report.hurst_ci[0]:.3f}, {report.hurst_ci[1]:.3f}]",
        f"  H in band: {report.metrics.pct_h_in_ci:.2f}%  "
        f"sigma in fair band: {report.metrics.pct_vol_in_ci:.2f}%",
        "  regimes: " + ", ".join(f"{name} {share:.2f}%" for name, share in report.regimes.items()),
    ]
    if report.adf:
        lines.append(f"  ADF on H: stat {report.adf.statistic:.3f}, p {report.adf.p_value:.3f}, "
                     f"5% critical {report.adf.critical_value_5pct:.3f} "
                     f"({'stationary' if report.adf.rejects_unit_root else 'unit root not rejected'})")
    return "\n".join(lines)


def run_analyze_command(args) -> int:
    """Analyse every --input file and export its report"""
    cfg = build_rolling_config(args)
    print(f"config: {json.dumps(cfg.describe(), sort_keys=True)}", file=sys.stderr)

    manifest = DatasetManifest.read(args.manifest) if args.manifest else None
    reports = run_batch(args.input, cfg, manifest)

    formats = ["json", "csv"] + (["md"] if args.markdown else [])
    for report in reports:
        export_report(report, args.output, formats)
        if args.plot_data:
            export_plot_data(report, args.output)
        print(format_summary(report))
    return 0
