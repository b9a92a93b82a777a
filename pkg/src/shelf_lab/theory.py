"""Closed-form moments, kernel constants, normalizations and rate bounds.

Everything that can be exact is a ``Fraction``; floats appear only in
standardizations and in the Kolmogorov-distance bounds, which involve
square roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .shuffle import ShuffleSpec
from .statistics import h1_abs_third_moment


def _pairs(n: int) -> int:
    return n * (n - 1) // 2


@dataclass(frozen=True)
class InversionMomentReport:
    mean: Fraction
    var_A: Fraction
    var_C: Fraction
    cov_printed: Fraction
    cov_corrected: Fraction
    var_total_printed: Fraction
    var_total_from_components: Fraction

    @property
    def printed_total_gap(self) -> Fraction:
        return self.var_total_from_components - self.var_total_printed


def mean_inversions(n: int) -> Fraction:
    if n < 1:
        raise ValueError("n must be positive")
    return Fraction(n * (n - 1), 4)


def inversion_moments(n: int, m: int) -> InversionMomentReport:
    """Mean, component variances and covariance of the inversion count.

    ``cov_printed`` and ``var_total_printed`` reproduce the published
    expressions verbatim; ``cov_corrected`` carries the opposite sign, and
    ``var_total_from_components`` is assembled from it.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    nn = n * (n - 1)
    m2 = m * m
    var_a = Fraction(nn * (2 * n + 5) * (4 * m2 - 1), 72 * 4 * m2)
    var_c = Fraction(nn * (2 * n + 4 * m - 5), 32 * m2)
    cov_printed = -Fraction(nn * (1 - 2 * m), 32 * m2)
    cov_corrected = -Fraction(nn * (2 * m - 1), 32 * m2)
    var_printed = Fraction(nn * (2 * m2 * n + 4 * n + 5 * m2 + 18 * m - 17), 72 * m2)
    return InversionMomentReport(
        mean=mean_inversions(n),
        var_A=var_a,
        var_C=var_c,
        cov_printed=cov_printed,
        cov_corrected=cov_corrected,
        var_total_printed=var_printed,
        var_total_from_components=var_a + 2 * cov_corrected + var_c,
    )


def unimodal_inversion_variance_claimed(n: int) -> Fraction:
    """Claimed inversion variance for a uniform unimodal permutation, (n+1)n(n-1)/12."""
    return Fraction((n + 1) * n * (n - 1), 12)


def zeta1_sq(m: int) -> Fraction:
    if m < 1:
        raise ValueError("m must be positive")
    return Fraction(m * m + 2, 36 * m * m)


KERNEL_ORDER = 2
KERNEL_SIGMA = Fraction(1, 2)


def standardize_inversions(value: float, n: int, m: int) -> float:
    if n < 2:
        raise ValueError("standardizing inversions needs n >= 2")
    pairs = _pairs(n)
    return math.sqrt(n) * (value - pairs / 2) / (2 * math.sqrt(zeta1_sq(m)) * pairs)


def inversion_scale(n: int, m: int) -> tuple[float, float]:
    """``(center, scale)`` so that the standardized count is (I - center) / scale."""
    if n < 2:
        raise ValueError("standardizing inversions needs n >= 2")
    pairs = _pairs(n)
    return pairs / 2, 2 * math.sqrt(zeta1_sq(m)) * pairs / math.sqrt(n)


def chen_shao_bound(n: int, r: int, zeta1: float, sigma: float, third_moment: float) -> float:
    """Berry-Esseen type bound for a normalized order-r U-statistic."""
    if not (r >= 2 and n > r):
        raise ValueError(f"need n > r >= 2, got n={n}, r={r}")
    if not zeta1 > 0:
        raise ValueError("zeta1 must be positive")
    if sigma < 0 or third_moment < 0:
        raise ValueError("sigma and third_moment must be nonnegative")
    first = 6.1 * float(third_moment) / (math.sqrt(n) * zeta1**3)
    second = (1 + math.sqrt(2)) * (r - 1) * float(sigma) / (math.sqrt(r * (n - r + 1)) * zeta1)
    return first + second


def inversion_kd_bound(n: int, m: int, exact_third_moment: bool = False) -> float:
    """The U-statistic bound instantiated for the inversion kernel."""
    return chen_shao_bound(
        n,
        KERNEL_ORDER,
        math.sqrt(zeta1_sq(m)),
        float(KERNEL_SIGMA),
        float(h1_abs_third_moment(m, exact=exact_third_moment)),
    )


def kd_bound_constant() -> float:
    """C with d_K(standardized inversions, N(0,1)) <= C / sqrt(n), uniformly in m."""
    return float(Fraction("6.1") * Fraction(125, 8) * 216) + 3 * (1 + math.sqrt(2))


def kd_bound_threshold() -> int:
    """Smallest n for which C / sqrt(n) drops below 1."""
    c = kd_bound_constant()
    return math.floor(c * c) + 1


def descent_moments(n: int, m: int) -> tuple[Fraction, Fraction]:
    """Quoted mean (n-1)/2 and variance (n+1)/12 + (n-2)/(6m^2) of the descent count."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    return Fraction(n - 1, 2), Fraction(n + 1, 12) + Fraction(n - 2, 6 * m * m)


def standardize_descents(value: float, n: int) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    return (value - n / 2) / math.sqrt(n / 4)


def descent_scale(n: int) -> tuple[float, float]:
    return n / 2, math.sqrt(n / 4)


def slutsky_error(n: int, m: int) -> float:
    return (4 * m - 1) / math.sqrt(n)


def limit_var_descents_claimed(m: int) -> Fraction:
    """Limiting variance (m^2+2)/(3m^2) stated for standardized descents."""
    return Fraction(m * m + 2, 3 * m * m)


def limit_var_descents_coupling() -> Fraction:
    """Limit forced by |d - B| <= 4m-1 with B ~ Binomial(n, 1/2)."""
    return Fraction(1)


def even_pile_probability(spec: ShuffleSpec) -> Fraction:
    return sum(spec.probabilities()[1::2], Fraction(0))


# name -> (callable, parameter names); used by the ``formulas`` subcommand
FORMULAS: dict[str, tuple[Callable, tuple[str, ...]]] = {
    "mean_inversions": (mean_inversions, ("n",)),
    "var_A": (lambda n, m: inversion_moments(n, m).var_A, ("n", "m")),
    "var_C": (lambda n, m: inversion_moments(n, m).var_C, ("n", "m")),
    "cov_printed": (lambda n, m: inversion_moments(n, m).cov_printed, ("n", "m")),
    "cov_corrected": (lambda n, m: inversion_moments(n, m).cov_corrected, ("n", "m")),
    "var_total_printed": (lambda n, m: inversion_moments(n, m).var_total_printed, ("n", "m")),
    "var_total_from_components": (
        lambda n, m: inversion_moments(n, m).var_total_from_components,
        ("n", "m"),
    ),
    "unimodal_variance_claimed": (unimodal_inversion_variance_claimed, ("n",)),
    "zeta1_sq": (zeta1_sq, ("m",)),
    "h1_abs_third_exact": (lambda m: h1_abs_third_moment(m, exact=True), ("m",)),
    "kd_bound_constant": (kd_bound_constant, ()),
    "kd_bound_threshold": (kd_bound_threshold, ()),
    "inversion_kd_bound": (inversion_kd_bound, ("n", "m")),
    "descent_mean": (lambda n, m: descent_moments(n, m)[0], ("n", "m")),
    "descent_var_fdh": (lambda n, m: descent_moments(n, m)[1], ("n", "m")),
    "slutsky_error": (slutsky_error, ("n", "m")),
    "limit_var_descents_claimed": (limit_var_descents_claimed, ("m",)),
}
