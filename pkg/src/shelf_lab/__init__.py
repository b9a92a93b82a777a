"""Shelf-shuffle simulation and verification lab."""

from ._backend import BACKEND
from .shuffle import (
    Permutation,
    RandomWord,
    ShuffleSpec,
    invert,
    is_unimodal,
    pile_counts,
    sample_word,
    word_to_permutation,
)
from .statistics import (
    DescentDecomposition,
    KernelPoint,
    descent_decomposition,
    descents,
    h1,
    inversions_fast,
    inversions_naive,
    kernel_h,
    pair_sum_inversions,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DescentDecomposition",
    "KernelPoint",
    "Permutation",
    "RandomWord",
    "ShuffleSpec",
    "descent_decomposition",
    "descents",
    "h1",
    "inversions_fast",
    "inversions_naive",
    "invert",
    "is_unimodal",
    "kernel_h",
    "pair_sum_inversions",
    "pile_counts",
    "sample_word",
    "word_to_permutation",
]
