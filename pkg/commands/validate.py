import json
import sys
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np
import pandas as pd

from core.errors import UsageError
from core.estimate import RollingConfig, estimate_hurst, estimator_variance
from core.simulate import HurstPathSpec, NuPathSpec, ProcessKind, SimulationSpec, gen_fgn, validate_prop1
from core.specfun import a_const, i_cosine, i_cosine_closed, j_integral, v_const_all
from core.utils import compensated_mean, derive_seed, parallel_map

HURST_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20) if k != 10)
PROP1_HURST = (0.3, 0.5, 0.7)
PROP1_N = 1024
DEFAULT_PATHS = {"prop1": 500, "estimator": 200, "specfun": 0}


@dataclass(frozen=True)
class Case:
    """One validation check: measured against expected within an absolute tolerance"""

    case_id: str
    measured: float
    expected: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.measured) and abs(self.measured - self.expected) <= self.tolerance)

    def as_row(self) -> dict:
        row = asdict(self)
        row["passed"] = self.passed
        return row


def specfun_cases() -> List[Case]:
    """Integral identities and agreement of the published V_H forms"""
    cases = []
    for h in HURST_GRID:
        tag = f"H={h:.2f}"
        cases.append(Case(f"specfun/j_identity/{tag}", j_integral(h) + 1.0 / (2.0 * h), a_const(h), 1e-6))
        cases.append(Case(f"specfun/i_identity/{tag}", i_cosine(h), i_cosine_closed(h), 1e-6))
        forms = list(v_const_all(h).values())
        cases.append(Case(f"specfun/v_forms/{tag}", max(forms) - min(forms), 0.0, 1e-10))
    forms = list(v_const_all(0.5, policy="limit").values())
    cases.append(Case("specfun/v_forms/H=0.50", max(forms) - min(forms), 0.0, 1e-10))
    cases.append(Case("specfun/a_half", a_const(0.5), 1.0, 4.0 * np.finfo(float).eps))
    return cases


def estimator_cases(paths: int, seed: int, n: int = 4096, delta: int = 20,
                    workers: int = 0) -> List[Case]:
    """Mean and null variance of the rolling Hurst estimator on simulated fGn"""
    cfg = RollingConfig(delta=delta)

    def brownian(p: int):
        sample = gen_fgn(n, 0.5, derive_seed(seed, 0, p))
        h = estimate_hurst(sample.values, cfg).h_hat
        # non-overlapping windows only
        blocks = h[delta - 1::delta]
        return float(np.nanmean(h)), float(np.var(blocks, ddof=1))

    def persistent(p: int):
        sample = gen_fgn(n, 0.7, derive_seed(seed, 1, p))
        return float(np.nanmean(estimate_hurst(sample.values, cfg).h_hat))

    null_runs = parallel_map(brownian, paths, workers)
    mean_h = compensated_mean([m for m, _ in null_runs])
    ratio = compensated_mean([v for _, v in null_runs]) / estimator_variance(delta, n)
    mean_persistent = compensated_mean(parallel_map(persistent, paths, workers))
    return [
        Case("estimator/brownian_mean", mean_h, 0.5, 0.02),
        Case("estimator/brownian_variance_ratio", ratio, 1.0, 0.15),
        Case("estimator/fgn_0.70_mean", mean_persistent, 0.7, 0.03),
    ]


def prop1_cases(paths: int, seed: int, workers: int = 0) -> List[Case]:
    """Measured over theoretical increment SD for constant-H MPRE paths"""
    step = 1.0 / (PROP1_N - 1)
    cases = []
    for k, h in enumerate(PROP1_HURST):
        spec = SimulationSpec(ProcessKind.MPRE, PROP1_N, derive_seed(seed, k),
                              hpath=HurstPathSpec(value=h), nupath=NuPathSpec(value=1.0),
                              truncation=10.0, substeps=4)
        table = validate_prop1(spec, paths, [step, 2 * step, 4 * step], workers=workers)
        pooled = table[table["probe_time"].isna()].sort_values("lag")
        for cells, ratio in zip((1, 2, 4), pooled["ratio"]):
            cases.append(Case(f"prop1/H={h:.1f}/lag={cells}", float(ratio), 1.0, 0.05))
    return cases


def cases_frame(cases: List[Case]) -> pd.DataFrame:
    frame = pd.DataFrame([c.as_row() for c in cases],
                         columns=["case_id", "measured", "expected", "tolerance", "passed"])
    return frame.sort_values("case_id").reset_index(drop=True)


def resolve_paths(suite: str, paths: Optional[int]) -> int:
    paths = DEFAULT_PATHS[suite] if paths is None else paths
    if suite == "prop1" and paths < 100:
        raise UsageError(f"--paths must be at least 100 for prop1, got {paths}")
    if suite == "estimator" and paths < 2:
        raise UsageError(f"--paths must be at least 2 for estimator, got {paths}")
    return paths


def run_validate_command(args) -> int:
    """Run one suite, print its pass/fail table as CSV, exit 1 on any failure"""
    paths = resolve_paths(args.suite, args.paths)
    if not 0 <= args.seed < 2 ** 64:
        raise UsageError(f"--seed must be a 64-bit unsigned integer, got {args.seed}")
    echo = {"suite": args.suite, "paths": paths, "seed": args.seed}
    print(f"config: {json.dumps(echo, sort_keys=True)}", file=sys.stderr)

    if args.suite == "specfun":
        cases = specfun_cases()
    elif args.suite == "estimator":
        cases = estimator_cases(paths, args.seed)
    else:
        cases = prop1_cases(paths, args.seed)

    frame = cases_frame(cases)
    frame.to_csv(sys.stdout, index=False, float_format="%.10g", lineterminator="\n")
    failed = int((~frame["passed"]).sum())
    if failed:
        print(f"{failed} of {len(frame)} checks failed", file=sys.stderr)
        return 1
    return 0
