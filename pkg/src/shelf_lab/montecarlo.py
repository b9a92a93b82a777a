"""Chunked Monte Carlo engine.

Samples are split into chunks of ``chunk_size``; chunk ``i`` draws from the
stream keyed by ``substream_key(seed, i)``. Chunk results are integer
histograms reduced in chunk order, so a report depends only on
``(config, seed, chunk_size)`` and never on the worker count.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping

import numpy as np

from . import theory
from ._backend import kernels
from .rng import CounterStream, substream_key
from .shuffle import RandomWord, ShuffleSpec, sample_word

SCHEMA_VERSION = "1"
MC_STATISTICS = {"inversions": kernels.STAT_INVERSIONS, "descents": kernels.STAT_DESCENTS}

_SQRT1_2 = 1.0 / math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal CDF through the libm complementary error function."""
    return 0.5 * math.erfc(-x * _SQRT1_2)


@dataclass(frozen=True)
class MomentSummary:
    count: int = 0
    sum: int = 0
    sum_sq: int = 0
    min: int | None = None
    max: int | None = None

    @classmethod
    def from_values(cls, values) -> "MomentSummary":
        values = [int(v) for v in values]
        if not values:
            return cls()
        return cls(len(values), sum(values), sum(v * v for v in values), min(values), max(values))

    @classmethod
    def from_histogram(cls, hist: Mapping[int, int]) -> "MomentSummary":
        items = [(int(v), int(c)) for v, c in hist.items() if c]
        if not items:
            return cls()
        return cls(
            count=sum(c for _, c in items),
            sum=sum(v * c for v, c in items),
            sum_sq=sum(v * v * c for v, c in items),
            min=min(v for v, _ in items),
            max=max(v for v, _ in items),
        )

    def merge(self, other: "MomentSummary") -> "MomentSummary":
        return merge(self, other)

    @property
    def mean(self) -> Fraction:
        return Fraction(self.sum, self.count)

    @property
    def variance(self) -> Fraction:
        """Population variance (sum_sq - sum^2/count) / count, exact."""
        return Fraction(self.sum_sq * self.count - self.sum * self.sum, self.count * self.count)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "sum": str(self.sum),
            "sum_sq": str(self.sum_sq),
            "min": self.min,
            "max": self.max,
        }


def merge(a: MomentSummary, b: MomentSummary) -> MomentSummary:
    if a.count == 0:
        return b
    if b.count == 0:
        return a
    return MomentSummary(
        a.count + b.count,
        a.sum + b.sum,
        a.sum_sq + b.sum_sq,
        min(a.min, b.min),
        max(a.max, b.max),
    )


@dataclass(frozen=True)
class Standardizer:
    center: float
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("standardizer scale must be positive")

    def __call__(self, value: float) -> float:
        return (value - self.center) / self.scale


def empirical_kd(histogram: Mapping[int, int], standardizer: Callable[[float], float]) -> float:
    """Kolmogorov distance between an integer histogram and N(0, 1) after standardizing."""
    total = sum(int(c) for c in histogram.values())
    if total <= 0:
        raise ValueError("empty histogram")
    below = 0
    worst = 0.0
    for v in sorted(int(k) for k, c in histogram.items() if c):
        phi = normal_cdf(standardizer(v))
        above = below + int(histogram[v])
        worst = max(worst, abs(below / total - phi), abs(above / total - phi))
        below = above
    return worst


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ShuffleSpec
    statistic: str = "inversions"
    sample_count: int = 10_000
    seed: int = 0
    chunk_size: int = 1 << 16
    workers: int = 1

    def __post_init__(self):
        if self.statistic not in MC_STATISTICS:
            raise ValueError(f"statistic must be one of {', '.join(MC_STATISTICS)}")
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in 64 unsigned bits")

    def chunks(self) -> list[tuple[int, int]]:
        """(chunk index, samples in chunk)."""
        full, rest = divmod(self.sample_count, self.chunk_size)
        out = [(i, self.chunk_size) for i in range(full)]
        if rest:
            out.append((full, rest))
        return out

    def to_dict(self) -> dict:
        # the worker hint is excluded: it must not change the report
        return {
            **self.spec.to_dict(),
            "statistic": self.statistic,
            "sample_count": self.sample_count,
            "seed": str(self.seed),
            "chunk_size": self.chunk_size,
        }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    summary: MomentSummary
    histogram: dict[int, int]
    empirical_kd: float
    standardization: str
    standardized_mean: float
    standardized_variance: float
    coupling_max_abs_dev: int | None
    bound_values: dict[str, float]
    theory_values: dict[str, str] = field(default_factory=dict)
    limit_variance_residuals: dict[str, float] | None = None
    wall_time: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "summary": self.summary.to_dict(),
            "histogram": {str(v): c for v, c in sorted(self.histogram.items())},
            "empirical_kd": self.empirical_kd,
            "standardization": self.standardization,
            "standardized_mean": self.standardized_mean,
            "standardized_variance": self.standardized_variance,
            "coupling_max_abs_dev": self.coupling_max_abs_dev,
            "bound_values": self.bound_values,
            "theory_values": self.theory_values,
            "limit_variance_residuals": self.limit_variance_residuals,
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=False)

    def histogram_csv(self) -> str:
        return histogram_csv(self.histogram)


def histogram_csv(histogram: Mapping[int, int]) -> str:
    rows = ["value,count"]
    rows += [f"{v},{c}" for v, c in sorted(histogram.items())]
    return "\n".join(rows) + "\n"


def _run_chunks(config: ExperimentConfig):
    spec = config.spec
    stat = MC_STATISTICS[config.statistic]
    thresholds = spec.thresholds

    def run(chunk):
        index, samples = chunk
        return kernels.mc_chunk(
            substream_key(config.seed, index), spec.n, spec.m, thresholds, samples, stat
        )

    hist = None
    max_dev = 0
    violations = 0
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        for part_hist, part_dev, part_bad in pool.map(run, config.chunks()):
            hist = part_hist.copy() if hist is None else hist + part_hist
            max_dev = max(max_dev, int(part_dev))
            violations += int(part_bad)
    return hist, max_dev, violations


def _standardizer(config: ExperimentConfig, summary: MomentSummary) -> tuple[Standardizer, str]:
    spec = config.spec
    n, m = spec.n, spec.m
    if config.statistic == "inversions":
        if spec.uniform and n >= 2:
            return Standardizer(*theory.inversion_scale(n, m)), "theory"
    elif spec.uniform:
        return Standardizer(*theory.descent_scale(n)), "theory"
    else:
        q = float(theory.even_pile_probability(spec))
        if 0 < q < 1:
            return Standardizer(n * q, math.sqrt(n * q * (1 - q))), "binomial"
    var = float(summary.variance)
    if var > 0:
        return Standardizer(float(summary.mean), math.sqrt(var)), "sample"
    return Standardizer(float(summary.mean), 1.0), "degenerate"


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    spec = config.spec
    n, m = spec.n, spec.m
    hist_arr, max_dev, violations = _run_chunks(config)
    if violations:
        raise AssertionError(f"{violations} sampled words broke d = E + C or |d - B| <= 4m - 1")
    if config.statistic == "descents" and max_dev > 4 * m - 1:
        raise AssertionError(f"coupling deviation {max_dev} exceeds {4 * m - 1}")
    histogram = {int(v): int(c) for v, c in enumerate(hist_arr) if c}
    summary = MomentSummary.from_histogram(histogram)
    standardizer, how = _standardizer(config, summary)
    kd = empirical_kd(histogram, standardizer)
    z_mean = (float(summary.mean) - standardizer.center) / standardizer.scale
    z_var = float(summary.variance) / standardizer.scale**2

    bounds: dict[str, float] = {}
    theory_values: dict[str, str] = {}
    residuals = None
    if config.statistic == "inversions":
        if spec.uniform and n >= 2:
            bounds["kd_bound_uniform"] = theory.kd_bound_constant() / math.sqrt(n)
            if n > 2:
                bounds["chen_shao"] = theory.inversion_kd_bound(n, m)
                bounds["chen_shao_exact_third"] = theory.inversion_kd_bound(n, m, True)
            moments = theory.inversion_moments(n, m)
            var = moments.var_total_from_components
            theory_values = {
                "mean": str(moments.mean),
                "variance": str(var),
                "variance_printed": str(moments.var_total_printed),
            }
            bounds["mean_standard_error"] = math.sqrt(float(var) / summary.count)
    else:
        bounds["slutsky_error"] = theory.slutsky_error(n, m)
        if spec.uniform:
            mean, var_fdh = theory.descent_moments(n, m)
            theory_values = {"mean": str(mean), "variance_fdh": str(var_fdh)}
            claimed = float(theory.limit_var_descents_claimed(m))
            residuals = {
                "coupling_limit": z_var - float(theory.limit_var_descents_coupling()),
                "claimed_limit": z_var - claimed,
            }
    return ExperimentReport(
        config=config,
        summary=summary,
        histogram=histogram,
        empirical_kd=kd,
        standardization=how,
        standardized_mean=z_mean,
        standardized_variance=z_var,
        coupling_max_abs_dev=max_dev if config.statistic == "descents" else None,
        bound_values=bounds,
        theory_values=theory_values,
        limit_variance_residuals=residuals,
        wall_time=time.perf_counter() - started,
    )


def iter_words(spec: ShuffleSpec, count: int, seed: int, chunk_size: int = 1 << 16) -> Iterator[RandomWord]:
    """The words a run with this seed and chunk size would simulate, in order."""
    stream = None
    for j in range(count):
        chunk, offset = divmod(j, chunk_size)
        if offset == 0:
            stream = CounterStream.from_seed(seed, chunk)
        yield sample_word(spec, stream)


def standard_error_check(report: ExperimentReport, target: Fraction, variance: Fraction) -> float:
    """How many standard errors the sample mean sits from ``target``."""
    se = math.sqrt(float(variance) / report.summary.count)
    return abs(float(report.summary.mean - target)) / se
