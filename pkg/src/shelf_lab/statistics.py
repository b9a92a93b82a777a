"""Permutation statistics and their word-level decompositions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ._backend import kernels
from .shuffle import Permutation, RandomWord


@dataclass(frozen=True)
class DescentDecomposition:
    even_run_descents: int
    boundary_descents: int
    even_card_count: int
    nonempty_even_piles: int
    total_descents: int

    @property
    def coupling_gap(self) -> int:
        """|d - B|, the distance to the even-pile card count."""
        return abs(self.total_descents - self.even_card_count)


@dataclass(frozen=True)
class KernelPoint:
    x: int
    u: float

    def __post_init__(self):
        if not 0.0 < self.u < 1.0:
            raise ValueError(f"u must lie in (0, 1), got {self.u}")
        if self.x < 1:
            raise ValueError(f"x must be a positive letter, got {self.x}")


def inversions_naive(p: Permutation) -> int:
    v = p.one_line
    n = len(v)
    return sum(1 for i in range(n) for j in range(i + 1, n) if v[i] > v[j])


def inversions_fast(p: Permutation) -> int:
    """O(n log n) inversion count (Fenwick tree)."""
    if len(p) < 2:
        return 0
    return int(kernels.count_inversions(p.as_array()))


def descents(p: Permutation) -> int:
    v = p.one_line
    return sum(1 for i in range(len(v) - 1) if v[i] > v[i + 1])


def pair_components(word: RandomWord) -> tuple[int, int]:
    """Return ``(A, C)``: pairs i<k with X_i > X_k, and pairs on a shared even letter.

    Runs in O(n * 2m) with per-letter running counts.
    """
    seen = [0] * (2 * word.m + 2)
    a = c = 0
    for x in word.letters:
        a += sum(seen[x + 1 :])
        if x % 2 == 0:
            c += seen[x]
        seen[x] += 1
    return a, c


def pair_sum_inversions(word: RandomWord) -> int:
    a, c = pair_components(word)
    return a + c


def descent_decomposition(word: RandomWord) -> DescentDecomposition:
    """Split the descents of the shuffled deck into within-pile and boundary parts.

    Block boundaries are recorded while the deck is assembled, so empty piles
    never create spurious boundaries.
    """
    if not word.letters:
        return DescentDecomposition(0, 0, 0, 0, 0)
    d, e, c, b, ne = kernels.descent_parts(word.as_array(), word.m)
    return DescentDecomposition(
        even_run_descents=int(e),
        boundary_descents=int(c),
        even_card_count=int(b),
        nonempty_even_piles=int(ne),
        total_descents=int(d),
    )


def kernel_h(a: KernelPoint, b: KernelPoint, m: int) -> Fraction:
    if a.u == b.u and a.x != b.x:
        raise ValueError("tied auxiliary uniforms with distinct letters")
    for z in (a, b):
        if z.x > 2 * m:
            raise ValueError(f"letter {z.x} outside [1, {2 * m}]")
    value = 0
    if a.x > b.x and a.u < b.u:
        value += 1
    if a.x < b.x and a.u > b.u:
        value += 1
    if a.x == b.x and a.x % 2 == 0:
        value += 1
    return Fraction(value) - Fraction(1, 2)


def h1_coefficients(x: int, m: int) -> tuple[Fraction, Fraction]:
    """``(a, b)`` with h1(x, u) = a + b*u."""
    two_m = 2 * m
    even = 1 if x % 2 == 0 else 0
    a = Fraction(x - 1, two_m) + Fraction(even, two_m) - Fraction(1, 2)
    b = Fraction(two_m - 2 * x + 1, two_m)
    return a, b


def h1(z: KernelPoint, m: int) -> float:
    two_m = 2 * m
    even = 1.0 if z.x % 2 == 0 else 0.0
    return (
        (z.x - 1) / two_m * (1.0 - z.u)
        + (two_m - z.x) / two_m * z.u
        + even / two_m
        - 0.5
    )


def _abs_power_integral(a: Fraction, b: Fraction, power: int) -> Fraction:
    # integral over u in [0, 1] of |a + b u|**power, split at the sign change
    if b == 0:
        return abs(a) ** power
    cuts = [Fraction(0)]
    root = -a / b
    if 0 < root < 1:
        cuts.append(root)
    cuts.append(Fraction(1))
    total = Fraction(0)
    for lo, hi in zip(cuts, cuts[1:]):
        piece = ((a + b * hi) ** (power + 1) - (a + b * lo) ** (power + 1)) / ((power + 1) * b)
        total += abs(piece)
    return total


def h1_moment(m: int, power: int, absolute: bool = True) -> Fraction:
    """Exact E[|h1|**power] (or E[h1**power]) with X uniform on [1, 2m], U ~ U(0, 1)."""
    total = Fraction(0)
    for x in range(1, 2 * m + 1):
        a, b = h1_coefficients(x, m)
        if absolute:
            total += _abs_power_integral(a, b, power)
        elif b == 0:
            total += a**power
        else:
            total += ((a + b) ** (power + 1) - a ** (power + 1)) / ((power + 1) * b)
    return total / (2 * m)


H1_ABS_THIRD_BOUND = Fraction(125, 8)


def h1_abs_third_moment(m: int, exact: bool = False) -> Fraction:
    """E|h1|^3: the crude bound (5/2)^3 by default, or the exact value."""
    return h1_moment(m, 3) if exact else H1_ABS_THIRD_BOUND
