"""
Path generators for fractional Gaussian noise, fractional Brownian motion,
the multifractional process with random exponent (MPRE) and the short-memory
reference sequences (AR(1), IID and heteroskedastic Gaussian), plus the
Monte-Carlo harness that checks the short-lag increment law of the MPRE.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, signal, special

from core.errors import ParameterError, SimulationError
from core.specfun import HurstValue, increment_sd, v_const
from core.utils import (STREAM_HURST, STREAM_NOISE, STREAM_NU, STREAM_PATHS,
                        compensated_sum, derive_seed, make_rng, parallel_map)

logger = logging.getLogger(__name__)

DEFAULT_SIGMA_SCHEDULE = (0.5, 1.5, 0.75, 1.25)
DEFAULT_PROBE_TIMES = tuple(np.round(np.linspace(0.1, 0.9, 9), 10))
EMBEDDING_TOLERANCE = 1e-12
ROW_CHUNK = 64


class ProcessKind(str, Enum):
    FBM = "fbm"
    FGN = "fgn"
    MPRE = "mpre"
    AR1 = "ar1"
    IID = "iid"
    INID = "inid"
    CONCAT = "concat"


class PathMode(str, Enum):
    CONSTANT = "constant"
    PIECEWISE = "piecewise"
    SMOOTH = "smooth"
    FOU = "fou"


def _piecewise(times: np.ndarray, breakpoints: Sequence[float], levels: Sequence[float]) -> np.ndarray:
    return np.asarray(levels, dtype=float)[np.searchsorted(np.asarray(breakpoints, dtype=float),
                                                           times, side="right")]


@dataclass(frozen=True)
class HurstPathSpec:
    """Sampler for the exponent path H(s), kept inside [h_lo, h_hi]"""

    mode: PathMode = PathMode.CONSTANT
    value: float = 0.5
    breakpoints: Tuple[float, ...] = ()
    levels: Tuple[float, ...] = ()
    function: Optional[Callable[[np.ndarray], np.ndarray]] = None
    h_lo: float = 0.05
    h_hi: float = 0.95
    ou_theta: float = 5.0
    ou_sigma: float = 1.0
    ou_hurst: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "mode", PathMode(self.mode))
        if not 0.0 < self.h_lo < self.h_hi < 1.0:
            raise ParameterError(f"Need 0 < h_lo < h_hi < 1, got [{self.h_lo}, {self.h_hi}]")
        if self.mode in (PathMode.CONSTANT, PathMode.FOU) and not self.h_lo <= self.value <= self.h_hi:
            raise ParameterError(f"Hurst level {self.value} outside [{self.h_lo}, {self.h_hi}]")
        if self.mode is PathMode.PIECEWISE:
            if len(self.levels) != len(self.breakpoints) + 1:
                raise ParameterError("Piecewise Hurst path needs len(levels) == len(breakpoints) + 1")
            if any(not self.h_lo <= lv <= self.h_hi for lv in self.levels):
                raise ParameterError(f"Piecewise Hurst levels must lie in [{self.h_lo}, {self.h_hi}]")
            if list(self.breakpoints) != sorted(self.breakpoints):
                raise ParameterError("Breakpoints must be increasing")
        if self.mode is PathMode.SMOOTH and self.function is None:
            raise ParameterError("Smooth Hurst path needs a function")
        if self.mode is PathMode.FOU:
            HurstValue(self.ou_hurst)
            if not self.h_lo < self.value < self.h_hi:
                raise ParameterError("fOU Hurst path needs its centre strictly inside (h_lo, h_hi)")
            if self.ou_theta <= 0 or self.ou_sigma < 0:
                raise ParameterError("fOU Hurst path needs ou_theta > 0 and ou_sigma >= 0")

    @property
    def is_constant(self) -> bool:
        return self.mode is PathMode.CONSTANT

    @property
    def is_deterministic(self) -> bool:
        return self.mode is not PathMode.FOU

    def sample(self, times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """H evaluated on an equally spaced time grid"""
        times = np.asarray(times, dtype=float)
        if self.mode is PathMode.CONSTANT:
            return np.full(times.shape, float(self.value))
        if self.mode is PathMode.PIECEWISE:
            return _piecewise(times, self.breakpoints, self.levels)
        if self.mode is PathMode.SMOOTH:
            return np.clip(np.asarray(self.function(times), dtype=float), self.h_lo, self.h_hi)

        # fOU driven by fGn, squashed into [h_lo, h_hi]
        span = self.h_hi - self.h_lo
        centre = special.logit((self.value - self.h_lo) / span)
        step = float(times[1] - times[0]) if times.size > 1 else 1.0
        noise = self.ou_sigma * step ** self.ou_hurst * _fgn_unit(times.size, self.ou_hurst, rng)
        noise[0] = 0.0
        deviation = signal.lfilter([1.0], [1.0, -(1.0 - self.ou_theta * step)], noise)
        return self.h_lo + span * special.expit(centre + deviation)


@dataclass(frozen=True)
class NuPathSpec:
    """Sampler for the scale path nu(s) > 0"""

    mode: PathMode = PathMode.CONSTANT
    value: float = 1.0
    breakpoints: Tuple[float, ...] = ()
    levels: Tuple[float, ...] = ()
    function: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", PathMode(self.mode))
        if self.mode is PathMode.FOU:
            raise ParameterError("nu paths support constant, piecewise and smooth modes")
        if self.mode is PathMode.CONSTANT and self.value <= 0:
            raise ParameterError(f"nu must be positive, got {self.value}")
        if self.mode is PathMode.PIECEWISE:
            if len(self.levels) != len(self.breakpoints) + 1:
                raise ParameterError("Piecewise nu path needs len(levels) == len(breakpoints) + 1")
            if any(lv <= 0 for lv in self.levels):
                raise ParameterError("nu levels must be positive")
        if self.mode is PathMode.SMOOTH and self.function is None:
            raise ParameterError("Smooth nu path needs a function")

    @property
    def is_constant(self) -> bool:
        return self.mode is PathMode.CONSTANT

    def sample(self, times: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        if self.mode is PathMode.CONSTANT:
            return np.full(times.shape, float(self.value))
        if self.mode is PathMode.PIECEWISE:
            return _piecewise(times, self.breakpoints, self.levels)
        values = np.asarray(self.function(times), dtype=float)
        if np.any(values <= 0) or not np.all(np.isfinite(values)):
            raise SimulationError("nu path function returned non-positive or non-finite values")
        return values


@dataclass(frozen=True)
class SimulationSpec:
    """Declarative description of a synthetic process"""

    kind: ProcessKind
    n: int
    seed: int
    hurst: float = 0.5
    hurst2: float = 0.5
    phi: float = 0.0
    sigma_schedule: Tuple[float, ...] = DEFAULT_SIGMA_SCHEDULE
    hpath: Optional[HurstPathSpec] = None
    nupath: Optional[NuPathSpec] = None
    truncation: float = 10.0
    substeps: int = 4

    def __post_init__(self):
        object.__setattr__(self, "kind", ProcessKind(self.kind))
        if int(self.n) != self.n or self.n < 2:
            raise ParameterError(f"Path length n must be an integer >= 2, got {self.n}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ParameterError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        HurstValue(self.hurst)
        HurstValue(self.hurst2)
        if abs(self.phi) >= 1.0:
            raise ParameterError(f"AR(1) coefficient must satisfy |phi| < 1, got {self.phi}")
        if not self.sigma_schedule or any(s <= 0 for s in self.sigma_schedule):
            raise ParameterError("sigma schedule must be non-empty and strictly positive")
        if self.truncation <= 0:
            raise ParameterError(f"Truncation horizon must be positive, got {self.truncation}")
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise ParameterError(f"Substeps must be an integer >= 1, got {self.substeps}")
        if self.kind is ProcessKind.CONCAT and self.n < 4:
            raise ParameterError("Concatenated fGn needs n >= 4 (two segments of at least 2)")

    def describe(self) -> Dict[str, object]:
        """Flat, JSON-friendly echo of the simulation settings"""
        echo = {
            "process": self.kind.value, "n": self.n, "seed": self.seed, "hurst": self.hurst,
            "hurst2": self.hurst2, "phi": self.phi, "sigma_schedule": list(self.sigma_schedule),
            "truncation": self.truncation, "substeps": self.substeps,
        }
        if self.hpath is not None:
            echo["hpath"] = self.hpath.mode.value
        if self.nupath is not None:
            echo["nupath"] = self.nupath.mode.value
        return echo


@dataclass(frozen=True)
class PathSample:
    """A simulated sequence on the normalized [0, 1] grid"""

    times: np.ndarray
    values: np.ndarray
    spec: SimulationSpec
    increments: bool = False
    extras: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise SimulationError("times and values must have the same length")
        if not np.all(np.isfinite(self.values)):
            raise SimulationError(f"{self.spec.kind.value} path contains non-finite values")


def _grid(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def _fgn_autocov_unit(count: int, h: float) -> np.ndarray:
    """Unit-lag fGn autocovariance with gamma(0) = 1, lags 0..count"""
    k = np.arange(count + 1, dtype=float)
    two_h = 2.0 * h
    return 0.5 * (np.abs(k + 1.0) ** two_h - 2.0 * k ** two_h + np.abs(k - 1.0) ** two_h)


def _fgn_unit(count: int, h: float, rng: np.random.Generator) -> np.ndarray:
    """count unit-variance fGn values by circulant embedding, Cholesky as fallback"""
    if count == 1:
        return rng.standard_normal(1)
    gamma = _fgn_autocov_unit(count, h)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigenvalues = np.fft.fft(row).real
    if eigenvalues.min() < -EMBEDDING_TOLERANCE:
        logger.warning(f"Circulant embedding not PSD (min eigenvalue {eigenvalues.min():.3e}), "
                       f"falling back to Cholesky for n={count}, H={h}")
        return _fgn_cholesky(gamma[:count], rng)
    size = row.size
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    w = np.fft.fft(np.sqrt(np.clip(eigenvalues, 0.0, None) / size) * z)
    return w.real[:count]


def _fgn_cholesky(gamma: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    try:
        factor = linalg.cholesky(linalg.toeplitz(gamma), lower=True)
    except linalg.LinAlgError as e:
        raise SimulationError(f"Cholesky fallback failed for fGn covariance: {e}")
    return factor @ rng.standard_normal(gamma.size)


def gen_fgn(n: int, h: float, seed: int) -> PathSample:
    """n-1 exact fGn increments with step 1/(n-1), variance V_H (n-1)^(-2H)"""
    spec = SimulationSpec(ProcessKind.FGN, n, seed, hurst=h)
    step = 1.0 / (n - 1)
    unit = _fgn_unit(n - 1, spec.hurst, make_rng(seed, STREAM_NOISE))
    values = math.sqrt(v_const(spec.hurst)) * step ** spec.hurst * unit
    return PathSample(_grid(n)[1:], values, spec, increments=True)


def gen_fbm(n: int, h: float, seed: int) -> PathSample:
    """fBm on [0, 1] as the cumulative sum of gen_fgn, starting at 0"""
    increments = gen_fgn(n, h, seed)
    values = np.concatenate([[0.0], np.cumsum(increments.values)])
    spec = replace(increments.spec, kind=ProcessKind.FBM)
    return PathSample(_grid(n), values, spec)


def gen_ar1(phi: float, n: int, seed: int) -> PathSample:
    """Stationary AR(1) with unit marginal variance, started from its stationary law"""
    spec = SimulationSpec(ProcessKind.AR1, n, seed, phi=phi)
    rng = make_rng(seed, STREAM_NOISE)
    shocks = rng.standard_normal(n)
    shocks[1:] *= math.sqrt(1.0 - phi ** 2)
    values = signal.lfilter([1.0], [1.0, -phi], shocks)
    return PathSample(_grid(n), values, spec, increments=True)


def gen_iid(n: int, seed: int) -> PathSample:
    spec = SimulationSpec(ProcessKind.IID, n, seed)
    values = make_rng(seed, STREAM_NOISE).standard_normal(n)
    return PathSample(_grid(n), values, spec, increments=True)


def sigma_profile(n: int, schedule: Sequence[float]) -> np.ndarray:
    """Per-observation sigma for equal blocks, rescaled to unit pooled variance"""
    schedule = np.asarray(schedule, dtype=float)
    blocks = np.array_split(np.arange(n), schedule.size)
    profile = np.empty(n)
    for block, sigma in zip(blocks, schedule):
        profile[block] = sigma
    return profile / math.sqrt(np.mean(profile ** 2))


def gen_inid(n: int, schedule: Sequence[float] = DEFAULT_SIGMA_SCHEDULE, seed: int = 0) -> PathSample:
    """Independent, non-identically distributed Gaussian blocks with unit pooled SD"""
    spec = SimulationSpec(ProcessKind.INID, n, seed, sigma_schedule=tuple(schedule))
    values = sigma_profile(n, spec.sigma_schedule) * make_rng(seed, STREAM_NOISE).standard_normal(n)
    return PathSample(_grid(n), values, spec, increments=True)


def gen_concat_fgn(h1: float, h2: float, n_half: int, seed: int) -> PathSample:
    """Unit-variance fGn(h1) segment followed by a unit-variance fGn(h2) segment"""
    if n_half < 2:
        raise ParameterError(f"Each segment needs at least 2 points, got {n_half}")
    spec = SimulationSpec(ProcessKind.CONCAT, 2 * n_half, seed, hurst=h1, hurst2=h2)
    first = _fgn_unit(n_half, spec.hurst, make_rng(seed, STREAM_NOISE, 0))
    second = _fgn_unit(n_half, spec.hurst2, make_rng(seed, STREAM_NOISE, 1))
    return PathSample(_grid(2 * n_half), np.concatenate([first, second]), spec, increments=True)


def rescale_unit_sd(sample: PathSample) -> PathSample:
    """Rescale values so that the sample SD (divisor n-1) is exactly one"""
    sd = float(np.std(sample.values, ddof=1))
    if sd == 0.0:
        raise SimulationError("Cannot rescale a constant sequence")
    return replace(sample, values=sample.values / sd)


def gen_demo_panel(seed: int, n: int = 1000,
                   schedule: Sequence[float] = DEFAULT_SIGMA_SCHEDULE) -> Dict[str, PathSample]:
    """IID, INID, AR(1) 0.9 and AR(1) -0.9 sequences, each with sample SD exactly 1"""
    panel = {
        "iid": gen_iid(n, derive_seed(seed, 0)),
        "inid": gen_inid(n, schedule, derive_seed(seed, 1)),
        "ar1_pos": gen_ar1(0.9, n, derive_seed(seed, 2)),
        "ar1_neg": gen_ar1(-0.9, n, derive_seed(seed, 3)),
    }
    return {name: rescale_unit_sd(sample) for name, sample in panel.items()}


# --- MPRE -------------------------------------------------------------------

@dataclass(frozen=True)
class MpreGrid:
    """Fine Riemann-Ito grid: Brownian cells of width delta on [-T, 1]"""

    n: int
    substeps: int
    delta: float
    n_neg: int
    n_src: int

    @classmethod
    def build(cls, n: int, truncation: float, substeps: int) -> "MpreGrid":
        if truncation <= 0:
            raise ParameterError(f"Truncation horizon must be positive, got {truncation}")
        if substeps < 1:
            raise ParameterError(f"Substeps must be >= 1, got {substeps}")
        fine = (n - 1) * substeps
        n_neg = max(1, int(round(truncation * fine)))
        return cls(n=n, substeps=substeps, delta=1.0 / fine, n_neg=n_neg, n_src=n_neg + fine)

    @property
    def source_times(self) -> np.ndarray:
        """Left endpoints of the Brownian cells"""
        return (np.arange(self.n_src) - self.n_neg) * self.delta

    @property
    def observation_index(self) -> np.ndarray:
        """Fine-grid index of each observation time t_k = k/(n-1)"""
        return self.n_neg + self.substeps * np.arange(self.n)

    def index_of(self, t: float) -> int:
        return self.n_neg + int(round(t / self.delta))


def kernel_weights(counts: np.ndarray, alpha: np.ndarray, delta: float) -> np.ndarray:
    """
    Cell weight of the kernel (t - s)_+^alpha for a cell lying `counts` cells behind t.

    The weight is the L2 average of the kernel over the cell, so the variance
    contributed by the cells adjacent to t is reproduced exactly.
    """
    counts = np.asarray(counts, dtype=float)
    power = 2.0 * np.asarray(alpha, dtype=float) + 1.0
    positive = counts >= 1.0
    safe = np.where(positive, counts, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mass = -safe ** power * np.expm1(power * np.log1p(-1.0 / safe)) / power
    mass = np.where(safe == 1.0, 1.0 / power, mass)
    return np.where(positive, delta ** alpha * np.sqrt(mass), 0.0)


def mpre_kernel_rows(grid: MpreGrid, rows: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """
    Kernel matrix mapping the weighted Brownian cells to X at the fine indices `rows`.

    Row i holds K(i - j, alpha_j) - K(n_neg - j, alpha_j) so that X(0) = 0.
    """
    rows = np.asarray(rows)
    j = np.arange(grid.n_src)
    baseline = kernel_weights(grid.n_neg - j, alpha, grid.delta)
    return kernel_weights(rows[:, None] - j[None, :], alpha[None, :], grid.delta) - baseline[None, :]


def _mpre_constant_alpha(grid: MpreGrid, weighted: np.ndarray, alpha: float,
                         rows: np.ndarray) -> np.ndarray:
    """X at the fine indices `rows` by FFT convolution when the exponent is constant"""
    counts = np.arange(grid.n_src + 1)
    kernel = kernel_weights(counts, np.full(counts.shape, alpha), grid.delta)
    full = signal.fftconvolve(weighted, kernel)
    return full[rows] - full[grid.n_neg]


def _mpre_varying_alpha(grid: MpreGrid, weighted: np.ndarray, alpha: np.ndarray,
                        rows: np.ndarray) -> np.ndarray:
    values = np.empty(rows.size)
    for start in range(0, rows.size, ROW_CHUNK):
        chunk = rows[start:start + ROW_CHUNK]
        values[start:start + ROW_CHUNK] = mpre_kernel_rows(grid, chunk, alpha) @ weighted
    return values


def _mpre_draw(grid: MpreGrid, hpath: HurstPathSpec, nupath: NuPathSpec,
               seed: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exponent path, scale path and nu-weighted Brownian cells for one realisation"""
    times = grid.source_times
    # H and nu are drawn before, and independently of, the driving noise
    hurst = hpath.sample(times, make_rng(seed, STREAM_HURST))
    nu = nupath.sample(times, make_rng(seed, STREAM_NU))
    noise = make_rng(seed, STREAM_NOISE).standard_normal(grid.n_src) * math.sqrt(grid.delta)
    return hurst, nu, nu * noise


def gen_mpre(hpath: HurstPathSpec, nupath: NuPathSpec, n: int, truncation: float = 10.0,
             substeps: int = 4, seed: int = 0) -> PathSample:
    """Riemann-Ito discretization of the MPRE on [0, 1] with n observation points"""
    spec = SimulationSpec(ProcessKind.MPRE, n, seed, hpath=hpath, nupath=nupath,
                          truncation=truncation, substeps=substeps)
    grid = MpreGrid.build(n, truncation, substeps)
    hurst, nu, weighted = _mpre_draw(grid, hpath, nupath, seed)
    rows = grid.observation_index
    alpha = hurst - 0.5
    if hpath.is_constant:
        values = _mpre_constant_alpha(grid, weighted, float(alpha[0]), rows)
    else:
        values = _mpre_varying_alpha(grid, weighted, alpha, rows)
    extras = {"hurst": hurst[np.minimum(rows, grid.n_src - 1)], "nu": nu[np.minimum(rows, grid.n_src - 1)]}
    return PathSample(_grid(n), values, spec, extras=extras)


def validate_prop1(spec: SimulationSpec, paths: int, lag_grid: Sequence[float],
                   probe_times: Sequence[float] = DEFAULT_PROBE_TIMES, workers: int = 0) -> pd.DataFrame:
    """
    Monte-Carlo check of sd(X(t+h) - X(t)) ~ |h|^H(t) nu(t) sqrt(A(H(t))).

    Each increment is divided by its own theoretical SD, so the ratio is the
    root-mean-square of the normalized increments; one row per (probe, lag)
    plus a pooled row per lag (probe_time NaN).
    """
    if spec.kind is not ProcessKind.MPRE:
        raise ParameterError(f"validate_prop1 needs an MPRE SimulationSpec, got {spec.kind.value}")
    if paths < 100:
        raise ParameterError(f"validate_prop1 needs at least 100 paths, got {paths}")
    hpath = spec.hpath or HurstPathSpec(value=spec.hurst)
    nupath = spec.nupath or NuPathSpec()
    grid = MpreGrid.build(spec.n, spec.truncation, spec.substeps)

    probes = np.array([grid.index_of(t) for t in probe_times])
    lag_cells = np.array([max(1, int(round(lag / grid.delta))) for lag in lag_grid])
    if probes.min() < grid.n_neg or probes.max() + lag_cells.max() >= grid.n_src:
        raise ParameterError("Probe times plus lags must stay inside [0, 1]")
    rows = np.unique(np.concatenate([probes, (probes[:, None] + lag_cells[None, :]).ravel()]))
    position = {int(r): i for i, r in enumerate(rows)}

    shared_rows = None
    if hpath.is_deterministic:
        alpha = hpath.sample(grid.source_times, make_rng(spec.seed, STREAM_HURST)) - 0.5
        shared_rows = mpre_kernel_rows(grid, rows, alpha)

    def one_path(p: int) -> np.ndarray:
        path_seed = derive_seed(spec.seed, STREAM_PATHS, p)
        hurst, nu, weighted = _mpre_draw(grid, hpath, nupath, path_seed)
        matrix = shared_rows if shared_rows is not None else mpre_kernel_rows(grid, rows, hurst - 0.5)
        x = matrix @ weighted
        z = np.empty((probes.size, lag_cells.size))
        for a, i in enumerate(probes):
            theory_h, theory_nu = hurst[i], nu[i]
            for b, c in enumerate(lag_cells):
                theory = increment_sd(c * grid.delta, theory_h, theory_nu)
                z[a, b] = (x[position[int(i + c)]] - x[position[int(i)]]) / theory
        return z

    logger.info(f"validate_prop1: {paths} paths, {len(rows)} kernel rows, n_src={grid.n_src}")
    normalized = parallel_map(one_path, paths, workers)

    records = []
    hurst_ref, nu_ref, _ = _mpre_draw(grid, hpath, nupath, spec.seed)
    for b, c in enumerate(lag_cells):
        lag = c * grid.delta
        pooled = []
        for a, i in enumerate(probes):
            squares = [float(z[a, b]) ** 2 for z in normalized]
            pooled.extend(squares)
            ratio = math.sqrt(compensated_sum(squares) / paths)
            theory = increment_sd(lag, hurst_ref[i], nu_ref[i])
            records.append({
                "probe_time": float((i - grid.n_neg) * grid.delta), "lag": lag,
                "hurst": float(hurst_ref[i]), "nu": float(nu_ref[i]),
                "theoretical_sd": theory, "measured_sd": ratio * theory,
                "ratio": ratio, "paths": paths,
            })
        ratio = math.sqrt(compensated_sum(pooled) / len(pooled))
        records.append({
            "probe_time": float("nan"), "lag": lag, "hurst": float("nan"), "nu": float("nan"),
            "theoretical_sd": float("nan"), "measured_sd": float("nan"),
            "ratio": ratio, "paths": paths,
        })
    return pd.DataFrame.from_records(records)


def generate(spec: SimulationSpec) -> PathSample:
    """Dispatch a SimulationSpec to its generator"""
    if spec.kind is ProcessKind.FBM:
        return gen_fbm(spec.n, spec.hurst, spec.seed)
    elif spec.kind is ProcessKind.FGN:
        return gen_fgn(spec.n, spec.hurst, spec.seed)
    elif spec.kind is ProcessKind.MPRE:
        return gen_mpre(spec.hpath or HurstPathSpec(value=spec.hurst), spec.nupath or NuPathSpec(),
                        spec.n, spec.truncation, spec.substeps, spec.seed)
    elif spec.kind is ProcessKind.AR1:
        return gen_ar1(spec.phi, spec.n, spec.seed)
    elif spec.kind is ProcessKind.IID:
        return gen_iid(spec.n, spec.seed)
    elif spec.kind is ProcessKind.INID:
        return gen_inid(spec.n, spec.sigma_schedule, spec.seed)
    elif spec.kind is ProcessKind.CONCAT:
        return gen_concat_fgn(spec.hurst, spec.hurst2, spec.n // 2, spec.seed)
    else:
        raise ParameterError(f"Unsupported process: {spec.kind}")


def path_to_frame(sample: PathSample) -> pd.DataFrame:
    """index,time,value table of a sample"""
    return pd.DataFrame({
        "index": np.arange(sample.values.size),
        "time": sample.times,
        "value": sample.values,
    })


def write_path_csv(sample: PathSample, destination) -> None:
    """Write the sample as CSV (index,time,value) with round-trip float precision"""
    path_to_frame(sample).to_csv(destination, index=False, float_format="%.17g", lineterminator="\n")
