"""Exhaustive enumeration of all (2m)^n words.

This is the ground truth the closed forms and the samplers are checked
against. Uniform specs run through the compiled odometer in index ranges
(mergeable by exact integer addition); biased specs walk the same odometer
in Python and weight each word by its exact probability.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import theory
from ._backend import kernels
from .montecarlo import normal_cdf
from .shuffle import RandomWord, ShuffleSpec, invert, word_to_permutation
from .statistics import (
    descent_decomposition,
    descents,
    inversions_naive,
    pair_components,
)

DEFAULT_BUDGET = 10**6
STATISTICS = (
    "inversions",
    "descents",
    "pair_sum",
    "even_cards",
    "pair_order",
    "equal_even",
    "inverse_descents",
)
RANGE_WORDS = 1 << 16


class BudgetExceeded(RuntimeError):
    def __init__(self, states: int, budget: int):
        super().__init__(f"enumeration needs {states} words, budget is {budget}")
        self.states = states
        self.budget = budget


class PathwiseViolation(AssertionError):
    pass


def default_budget() -> int:
    raw = os.environ.get("SHELF_LAB_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass
class ExactDistribution:
    n: int
    m: int
    statistic: str
    counts: dict[int, int]
    total: int
    masses: dict[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if not self.masses:
            self.masses = {v: Fraction(c, self.total) for v, c in self.counts.items()}

    def to_dict(self) -> dict:
        mean, var = exact_moments(self)
        return {
            "n": self.n,
            "m": self.m,
            "statistic": self.statistic,
            "counts": {str(v): str(c) for v, c in sorted(self.counts.items())},
            "total": str(self.total),
            "mean": _frac(mean),
            "variance": _frac(var),
        }


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass
class _Tally:
    spec: ShuffleSpec
    total: int
    counts: dict[str, dict[int, int]]
    masses: dict[str, dict[int, Fraction]] | None
    sum_ac: Fraction

    def distribution(self, statistic: str) -> ExactDistribution:
        masses = self.masses[statistic] if self.masses is not None else {}
        return ExactDistribution(
            self.spec.n, self.spec.m, statistic, self.counts[statistic], self.total, masses
        )


def _check_budget(spec: ShuffleSpec, budget: int | None) -> int:
    budget = default_budget() if budget is None else budget
    states = spec.piles**spec.n
    if states > budget:
        raise BudgetExceeded(states, budget)
    return states


def _tally_uniform(spec: ShuffleSpec, states: int, workers: int) -> _Tally:
    ranges = [(lo, min(lo + RANGE_WORDS, states)) for lo in range(0, states, RANGE_WORDS)]

    def run(bounds):
        return kernels.enumerate_chunk(spec.n, spec.m, bounds[0], bounds[1])

    hists = None
    sum_ac = 0
    violations = 0
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for part in pool.map(run, ranges):
            if hists is None:
                hists = {s: part[s].copy() for s in STATISTICS}
            else:
                for s in STATISTICS:
                    hists[s] += part[s]
            sum_ac += int(part["sum_ac"])
            violations += int(part["violations"])
    if violations:
        raise PathwiseViolation(f"{violations} words broke a pathwise identity at {spec}")
    counts = {
        s: {int(v): int(c) for v, c in enumerate(h) if c} for s, h in hists.items()
    }
    return _Tally(spec, states, counts, None, Fraction(sum_ac, states))


def word_statistics(word: RandomWord) -> dict[str, int]:
    """All enumerated statistics of one word, with the pathwise identities asserted."""
    perm = word_to_permutation(word)
    a, c = pair_components(word)
    inv = inversions_naive(perm)
    dec = descent_decomposition(word)
    m = word.m
    if inv != a + c:
        raise PathwiseViolation(f"pair sum {a + c} != inversions {inv} for {word.letters}")
    if dec.total_descents != dec.even_run_descents + dec.boundary_descents:
        raise PathwiseViolation(f"d != E + C for {word.letters}")
    if dec.coupling_gap > 4 * m - 1 or dec.boundary_descents > 2 * m - 1:
        raise PathwiseViolation(f"coupling bound broken for {word.letters}")
    return {
        "inversions": inv,
        "pair_sum": a + c,
        "descents": dec.total_descents,
        "even_cards": dec.even_card_count,
        "pair_order": a,
        "equal_even": c,
        "inverse_descents": descents(invert(perm)),
    }


def _tally_biased(spec: ShuffleSpec, states: int) -> _Tally:
    probs = spec.probabilities()
    counts = {s: {} for s in STATISTICS}
    masses = {s: {} for s in STATISTICS}
    sum_ac = Fraction(0)
    for letters in itertools.product(range(1, spec.piles + 1), repeat=spec.n):
        mass = math.prod((probs[x - 1] for x in letters), start=Fraction(1))
        stats = word_statistics(RandomWord(letters, spec.m))
        for s, v in stats.items():
            counts[s][v] = counts[s].get(v, 0) + 1
            if mass:
                masses[s][v] = masses[s].get(v, Fraction(0)) + mass
        sum_ac += mass * stats["pair_order"] * stats["equal_even"]
    return _Tally(spec, states, counts, masses, sum_ac)


def _tally(spec: ShuffleSpec, budget: int | None = None, workers: int = 1) -> _Tally:
    states = _check_budget(spec, budget)
    if spec.uniform:
        return _tally_uniform(spec, states, workers)
    return _tally_biased(spec, states)


def enumerate_distribution(
    spec: ShuffleSpec, statistic: str, budget: int | None = None, workers: int = 1
) -> ExactDistribution:
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {', '.join(STATISTICS)}")
    return _tally(spec, budget, workers).distribution(statistic)


def exact_moments(dist: ExactDistribution) -> tuple[Fraction, Fraction]:
    if not dist.masses:
        raise ValueError("empty distribution")
    mean = sum((v * p for v, p in dist.masses.items()), Fraction(0))
    second = sum((v * v * p for v, p in dist.masses.items()), Fraction(0))
    return mean, second - mean * mean


def exact_kd_to_normal(dist: ExactDistribution, mu: float, sigma: float) -> float:
    """Sup distance between the step CDF and N(mu, sigma^2), both one-sided limits."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    below = Fraction(0)
    worst = 0.0
    for v in sorted(dist.masses):
        phi = normal_cdf((v - mu) / sigma)
        above = below + dist.masses[v]
        worst = max(worst, abs(float(below) - phi), abs(float(above) - phi))
        below = above
    return worst


@dataclass(frozen=True)
class ComponentMoments:
    mean_A: Fraction
    mean_C: Fraction
    var_A: Fraction
    var_C: Fraction
    cov_AC: Fraction

    @property
    def var_total(self) -> Fraction:
        return self.var_A + 2 * self.cov_AC + self.var_C


def component_moments(tally: _Tally) -> ComponentMoments:
    mean_a, var_a = exact_moments(tally.distribution("pair_order"))
    mean_c, var_c = exact_moments(tally.distribution("equal_even"))
    return ComponentMoments(mean_a, mean_c, var_a, var_c, tally.sum_ac - mean_a * mean_c)


def enumerate_components(spec: ShuffleSpec, budget: int | None = None) -> ComponentMoments:
    return component_moments(_tally(spec, budget))


@dataclass(frozen=True)
class AuditRow:
    n: int
    m: int
    quantity: str
    formula: str
    oracle_value: Fraction
    formula_value: Fraction

    @property
    def difference(self) -> Fraction:
        return self.formula_value - self.oracle_value

    @property
    def status(self) -> str:
        return "MATCH" if self.difference == 0 else "FINDING"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "quantity": self.quantity,
            "formula": self.formula,
            "oracle": _frac(self.oracle_value),
            "formula_value": _frac(self.formula_value),
            "difference": _frac(self.difference),
            "status": self.status,
        }


@dataclass
class AuditReport:
    rows: list[AuditRow] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)

    @property
    def findings(self) -> list[AuditRow]:
        return [r for r in self.rows if r.status == "FINDING"]

    def lookup(self, n: int, m: int, quantity: str, formula: str) -> AuditRow:
        for row in self.rows:
            if (row.n, row.m, row.quantity, row.formula) == (n, m, quantity, formula):
                return row
        raise KeyError((n, m, quantity, formula))

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "skipped": self.skipped,
            "finding_count": len(self.findings),
        }

    def to_table(self) -> str:
        header = f"{'n':>3} {'m':>3}  {'quantity':<24} {'formula':<26} {'oracle':>14} {'formula value':>16} {'difference':>14}  status"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r.n:>3} {r.m:>3}  {r.quantity:<24} {r.formula:<26} {_frac(r.oracle_value):>14} "
                f"{_frac(r.formula_value):>16} {_frac(r.difference):>14}  {r.status}"
            )
        for s in self.skipped:
            lines.append(f"{s['n']:>3} {s['m']:>3}  skipped: budget needs {s['states']} words")
        return "\n".join(lines)


def audit_point(n: int, m: int, budget: int | None = None, workers: int = 1) -> list[AuditRow]:
    spec = ShuffleSpec(n, m)
    tally = _tally(spec, budget, workers)
    inv_mean, inv_var = exact_moments(tally.distribution("inversions"))
    des_mean, des_var = exact_moments(tally.distribution("descents"))
    ides_mean, ides_var = exact_moments(tally.distribution("inverse_descents"))
    comp = component_moments(tally)
    moments = theory.inversion_moments(n, m)
    fdh_mean, fdh_var = theory.descent_moments(n, m)
    checks = [
        ("inversion_mean", "mean_inversions", inv_mean, moments.mean),
        ("var_A", "var_A", comp.var_A, moments.var_A),
        ("var_C", "var_C", comp.var_C, moments.var_C),
        ("cov_AC", "cov_printed", comp.cov_AC, moments.cov_printed),
        ("cov_AC", "cov_corrected", comp.cov_AC, moments.cov_corrected),
        ("inversion_variance", "var_total_printed", inv_var, moments.var_total_printed),
        ("inversion_variance", "var_total_from_components", inv_var, moments.var_total_from_components),
        ("descent_mean", "descent_mean", des_mean, fdh_mean),
        ("descent_variance", "descent_var_fdh", des_var, fdh_var),
        ("inverse_descent_mean", "descent_mean", ides_mean, fdh_mean),
        ("inverse_descent_variance", "descent_var_fdh", ides_var, fdh_var),
    ]
    if m == 1:
        checks.append(
            ("inversion_variance", "unimodal_variance_claimed", inv_var,
             theory.unimodal_inversion_variance_claimed(n))
        )
    return [AuditRow(n, m, q, f, o, v) for q, f, o, v in checks]


def audit_formulas(
    grid: Iterable[tuple[int, int]], budget: int | None = None, workers: int = 1,
    skip_refusals: bool = False,
) -> AuditReport:
    """Compare every closed form against exact enumeration; differences are data."""
    report = AuditReport()
    for n, m in grid:
        try:
            report.rows.extend(audit_point(n, m, budget, workers))
        except BudgetExceeded as exc:
            if not skip_refusals:
                raise
            report.skipped.append({"n": n, "m": m, "states": exc.states})
    return report


def enumerable_grid(budget: int = DEFAULT_BUDGET, max_m: int = 8, min_n: int = 1) -> list[tuple[int, int]]:
    """All (n, m) with m <= max_m and (2m)^n <= budget."""
    grid = []
    for m in range(1, max_m + 1):
        n = min_n
        while (2 * m) ** n <= budget:
            grid.append((n, m))
            n += 1
    return grid


def histogram_array(dist: ExactDistribution) -> np.ndarray:
    top = max(dist.counts) if dist.counts else 0
    out = np.zeros(top + 1, dtype=np.int64)
    for v, c in dist.counts.items():
        out[v] = c
    return out
