"""Shelf shuffles driven by random words.

Cards and positions are 1-based throughout. A word assigns card ``i`` to
pile ``X_i`` in ``1..2m``; the output deck lists pile 1 (cards ascending),
then pile 2 (descending), pile 3 (ascending), and so on.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from ._backend import kernels
from .rng import LetterStream

MAX_CARDS = 1 << 32

_RATIONAL = re.compile(r"^\s*-?\d+\s*(/\s*\d+\s*)?$")


def parse_rational(value) -> Fraction:
    """Accept ints, Fractions, ``(num, den)`` pairs and ``"p/q"`` strings.

    Floats are refused: the probabilities must sum to one exactly.
    """
    if isinstance(value, bool):
        raise TypeError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        if not _RATIONAL.match(value):
            raise ValueError(f"not a p/q rational: {value!r}")
        return Fraction(value.replace(" ", ""))
    if isinstance(value, (tuple, list)) and len(value) == 2:
        num, den = value
        if isinstance(num, int) and isinstance(den, int) and not isinstance(num, bool):
            return Fraction(num, den)
    raise TypeError(f"not a rational: {value!r}")


@dataclass(frozen=True)
class ShuffleSpec:
    n: int
    m: int
    pile_probs: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if self.n > MAX_CARDS:
            raise ValueError(f"n must be at most {MAX_CARDS}")
        if not isinstance(self.m, int) or isinstance(self.m, bool) or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if self.pile_probs is None:
            return
        probs = []
        for k, p in enumerate(self.pile_probs, start=1):
            try:
                q = parse_rational(p)
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"pile probability {k}: {exc}") from None
            if q < 0:
                raise ValueError(f"pile probability {k} is negative: {q}")
            probs.append(q)
        if len(probs) != 2 * self.m:
            raise ValueError(f"expected {2 * self.m} pile probabilities, got {len(probs)}")
        if sum(probs) != 1:
            raise ValueError(f"pile probabilities sum to {sum(probs)}, not 1")
        object.__setattr__(self, "pile_probs", tuple(probs))

    @property
    def piles(self) -> int:
        return 2 * self.m

    @property
    def uniform(self) -> bool:
        return self.pile_probs is None

    def probabilities(self) -> tuple[Fraction, ...]:
        if self.pile_probs is None:
            return (Fraction(1, 2 * self.m),) * (2 * self.m)
        return self.pile_probs

    @cached_property
    def thresholds(self) -> np.ndarray:
        """Inverse-CDF cut points: letter = 1 + #{cut points <= u}."""
        cum = Fraction(0)
        cuts = []
        for p in self.probabilities()[:-1]:
            cum += p
            cuts.append(float(cum))
        return np.array(cuts, dtype=np.float64)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "pile_probs": None
            if self.pile_probs is None
            else [f"{p.numerator}/{p.denominator}" for p in self.pile_probs],
        }


@dataclass(frozen=True)
class RandomWord:
    letters: tuple[int, ...]
    m: int

    def __post_init__(self):
        letters = tuple(int(x) for x in self.letters)
        if self.m < 1:
            raise ValueError("m must be positive")
        for i, x in enumerate(letters, start=1):
            if not 1 <= x <= 2 * self.m:
                raise ValueError(f"letter {i} = {x} outside [1, {2 * self.m}]")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def as_array(self) -> np.ndarray:
        return np.fromiter(self.letters, dtype=np.int64, count=len(self.letters))


@dataclass(frozen=True)
class Permutation:
    one_line: tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.one_line)
        if sorted(values) != list(range(1, len(values) + 1)):
            raise ValueError("one_line is not a bijection of 1..n")
        object.__setattr__(self, "one_line", values)

    def __len__(self):
        return len(self.one_line)

    def __getitem__(self, position: int) -> int:
        """Value at 1-based position."""
        return self.one_line[position - 1]

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    def as_array(self) -> np.ndarray:
        return np.fromiter(self.one_line, dtype=np.int64, count=len(self.one_line))


def sample_word(spec: ShuffleSpec, stream: LetterStream) -> RandomWord:
    """Draw ``spec.n`` letters, consuming exactly one uniform per letter."""
    letters = stream.letters(spec.n, spec.thresholds)
    return RandomWord(tuple(letters.tolist()), spec.m)


def word_to_permutation(word: RandomWord) -> Permutation:
    if not word.letters:
        return Permutation(())
    return Permutation(tuple(kernels.shelf_permutation(word.as_array(), word.m).tolist()))


def pile_counts(word: RandomWord) -> tuple[int, ...]:
    counts = [0] * (2 * word.m)
    for x in word.letters:
        counts[x - 1] += 1
    return tuple(counts)


def invert(p: Permutation) -> Permutation:
    q = [0] * len(p)
    for position, value in enumerate(p.one_line, start=1):
        q[value - 1] = position
    return Permutation(tuple(q))


def is_unimodal(p: Permutation) -> bool:
    """True when no interior position is below both neighbours."""
    v = p.one_line
    return not any(v[i - 1] > v[i] < v[i + 1] for i in range(1, len(v) - 1))

