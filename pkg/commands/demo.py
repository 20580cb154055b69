import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from core.errors import ConfigurationError, UsageError
from core.simulate import gen_concat_fgn, gen_demo_panel
from core.specfun import fgn_autocorr
from core.stats import sample_acf, straddle_payoff
from core.utils import derive_seed

QUEUED_HURST = (0.75, 0.25)
QUEUED_HALF = 2048
STRADDLE = {"strike": 100.0, "call_premium": 5.0, "put_premium": 3.0}


def lag_one(values: np.ndarray) -> float:
    return float(sample_acf(values, 1)[1])


def run_demo_command(args) -> int:
    """Short-memory panel, queued fGn and a straddle payoff table"""
    if args.n < 10:
        raise UsageError(f"--n must be at least 10, got {args.n}")
    if not 0 <= args.seed < 2 ** 64:
        raise UsageError(f"--seed must be a 64-bit unsigned integer, got {args.seed}")
    print(f"config: {json.dumps({'seed': args.seed, 'n': args.n}, sort_keys=True)}", file=sys.stderr)

    folder = Path(args.output)
    try:
        folder.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"Cannot create output directory {folder}: {e}")

    # Short-memory panel
    panel = gen_demo_panel(args.seed, args.n)
    frame = pd.DataFrame({"index": np.arange(args.n)})
    for name, sample in panel.items():
        frame[name] = sample.values
    frame.to_csv(folder / "short_memory.csv", index=False, float_format="%.17g", lineterminator="\n")

    # Queued fGn
    queued = gen_concat_fgn(*QUEUED_HURST, QUEUED_HALF, derive_seed(args.seed, 4))
    pd.DataFrame({
        "index": np.arange(queued.values.size),
        "segment": np.repeat([1, 2], QUEUED_HALF),
        "value": queued.values,
    }).to_csv(folder / "queued_fgn.csv", index=False, float_format="%.17g", lineterminator="\n")

    print("series,lag1_acf,theoretical")
    for name, sample in panel.items():
        print(f"{name},{lag_one(sample.values):.4f},")
    first, second = queued.values[:QUEUED_HALF], queued.values[QUEUED_HALF:]
    print(f"queued_segment_1,{lag_one(first):.4f},{fgn_autocorr(1, QUEUED_HURST[0]):.4f}")
    print(f"queued_segment_2,{lag_one(second):.4f},{fgn_autocorr(1, QUEUED_HURST[1]):.4f}")
    print(f"queued_pooled,{lag_one(queued.values):.4f},")

    print()
    print("terminal,strike,payoff")
    for terminal in (80.0, 90.0, 100.0, 110.0, 120.0):
        payoff = straddle_payoff(terminal, **STRADDLE)
        print(f"{terminal:g},{STRADDLE['strike']:g},{payoff:g}")
    return 0
