import json
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Sequence

import numpy as np

# Sub-stream keys derived from a single run seed
STREAM_HURST = 0
STREAM_NU = 1
STREAM_NOISE = 2
STREAM_PATHS = 3


def get_worker_count() -> int:
    """Worker bound for Monte-Carlo fan-out, from FAIRVOL_THREADS"""
    raw = os.getenv("FAIRVOL_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            return 1
    return max(1, os.cpu_count() or 1)


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for the sub-stream identified by (seed, *stream)"""
    if seed < 0 or seed >= 2 ** 64:
        raise ValueError(f"Seed must be a 64-bit unsigned integer, got {seed}")
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *stream: int) -> int:
    """A child 64-bit seed for the sub-stream identified by (seed, *stream)"""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def compensated_sum(values: Iterable[float]) -> float:
    """Order-stable float sum"""
    return math.fsum(float(v) for v in values)


def compensated_mean(values: Sequence[float]) -> float:
    """Mean computed with compensated summation"""
    if len(values) == 0:
        return float("nan")
    return compensated_sum(values) / len(values)


def parallel_map(func: Callable[[int], Any], count: int, workers: int = 0) -> List[Any]:
    """Evaluate func(0..count-1); results come back in index order whatever the worker count"""
    workers = workers or get_worker_count()
    if workers <= 1 or count <= 1:
        return [func(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, range(count)))


def to_jsonable(value: Any) -> Any:
    """Convert numpy containers and scalars into plain JSON values (NaN becomes None)"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return None if math.isnan(value) else value
    return value


def format_report_for_export(report: Dict[str, Any], format_type: str = "json") -> str:
    """Format a report dictionary for export"""
    if format_type == "json":
        return json.dumps(to_jsonable(report), indent=2, ensure_ascii=False)
    elif format_type == "md":
        md_content = f"# Fair volatility report: {report.get('instrument', {}).get('name', '')}\n\n"

        for section, values in report.items():
            if not isinstance(values, dict):
                continue
            md_content += f"## {section.replace('_', ' ').title()}\n\n"
            for key, value in values.items():
                if isinstance(value, (list, np.ndarray)) and len(value) > 4:
                    continue
                md_content += f"- **{key}**: {to_jsonable(value)}\n"
            md_content += "\n"

        return md_content
    else:
        return str(report)


def sanitize_filename(filename: str) -> str:
    """Sanitize an instrument name for use in export file names"""
    # Remove invalid characters
    filename = re.sub(r'[<>:"/\\|?*\s]', '_', filename)
    # Remove multiple underscores
    filename = re.sub(r'_+', '_', filename)
    # Remove leading/trailing underscores
    filename = filename.strip('_')

    return filename if filename else "instrument"
