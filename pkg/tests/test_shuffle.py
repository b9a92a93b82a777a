import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EXAMPLE_PERM, EXAMPLE_WORD
from reference import shelf_shuffle
from shelf_lab.rng import CounterStream, ReplayStream
from shelf_lab.shuffle import (
    Permutation,
    RandomWord,
    ShuffleSpec,
    invert,
    is_unimodal,
    parse_rational,
    pile_counts,
    sample_word,
    word_to_permutation,
)


@st.composite
def words(draw, max_n=40, max_m=6):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(1, max_n))
    letters = draw(st.lists(st.integers(1, 2 * m), min_size=n, max_size=n))
    return RandomWord(tuple(letters), m)


class TestSpec:
    def test_rejects_empty_deck(self):
        with pytest.raises(ValueError):
            ShuffleSpec(0, 1)

    def test_rejects_no_shelves(self):
        with pytest.raises(ValueError):
            ShuffleSpec(3, 0)

    def test_single_card_allowed(self):
        assert ShuffleSpec(1, 1).n == 1

    def test_rejects_float_probabilities(self):
        with pytest.raises(ValueError, match="pile probability 1"):
            ShuffleSpec(3, 1, (0.5, 0.5))

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError, match="sum"):
            ShuffleSpec(3, 1, ("1/3", "1/3"))

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="expected 4"):
            ShuffleSpec(3, 2, ("1/2", "1/2"))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            ShuffleSpec(3, 1, ("3/2", "-1/2"))

    def test_accepts_pairs_and_strings(self):
        spec = ShuffleSpec(3, 1, ((1, 4), "3/4"))
        assert spec.pile_probs == (Fraction(1, 4), Fraction(3, 4))

    def test_parse_rational_refuses_decimals(self):
        with pytest.raises(ValueError):
            parse_rational("0.25")

    def test_uniform_thresholds(self):
        assert ShuffleSpec(5, 2).thresholds.tolist() == [0.25, 0.5, 0.75]


class TestSampleWord:
    def test_letters_in_range(self):
        word = sample_word(ShuffleSpec(5, 1), CounterStream.from_seed(7))
        assert set(word.letters) <= {1, 2}
        assert len(word) == 5

    def test_replays_example_assignment(self):
        stream = ReplayStream.for_letters(EXAMPLE_WORD, 2)
        assert sample_word(ShuffleSpec(12, 2), stream).letters == EXAMPLE_WORD

    def test_degenerate_bias(self):
        word = sample_word(ShuffleSpec(3, 1, ("1", "0")), CounterStream.from_seed(1))
        assert word.letters == (1, 1, 1)

    def test_one_draw_per_letter(self):
        spec = ShuffleSpec(7, 3)
        stream = CounterStream.from_seed(11)
        sample_word(spec, stream)
        assert stream.position == 7
        second = sample_word(spec, stream)
        both = CounterStream.from_seed(11).letters(14, spec.thresholds)
        assert second.letters == tuple(both[7:].tolist())

    def test_same_seed_same_word(self):
        spec = ShuffleSpec(30, 4)
        a = sample_word(spec, CounterStream.from_seed(123))
        b = sample_word(spec, CounterStream.from_seed(123))
        assert a == b

    def test_biased_frequencies(self):
        spec = ShuffleSpec(200_000, 1, ("1/4", "3/4"))
        word = sample_word(spec, CounterStream.from_seed(5))
        share = np.mean(np.array(word.letters) == 2)
        # 5 standard errors of a Bernoulli(3/4) mean
        assert abs(share - 0.75) < 5 * np.sqrt(0.75 * 0.25 / spec.n)


class TestWordToPermutation:
    def test_worked_example(self):
        assert word_to_permutation(RandomWord(EXAMPLE_WORD, 2)).one_line == EXAMPLE_PERM

    def test_all_odd_pile_is_identity(self):
        assert word_to_permutation(RandomWord((1,) * 6, 1)) == Permutation.identity(6)

    def test_all_even_pile_is_reversal(self):
        assert word_to_permutation(RandomWord((2,) * 6, 1)).one_line == (6, 5, 4, 3, 2, 1)

    @given(words())
    def test_matches_literal_definition(self, word):
        assert list(word_to_permutation(word).one_line) == shelf_shuffle(word.letters, word.m)

    @given(words())
    def test_deterministic(self, word):
        assert word_to_permutation(word) == word_to_permutation(word)


class TestPileCounts:
    def test_worked_example(self):
        assert pile_counts(RandomWord(EXAMPLE_WORD, 2)) == (3, 4, 3, 2)

    def test_single_pile(self):
        assert pile_counts(RandomWord((1,) * 5, 3)) == (5, 0, 0, 0, 0, 0)

    @given(words())
    def test_sums_to_n(self, word):
        assert sum(pile_counts(word)) == len(word)


class TestInvert:
    def test_identity(self):
        assert invert(Permutation.identity(5)) == Permutation.identity(5)

    def test_three_cycle(self):
        assert invert(Permutation((2, 3, 1))).one_line == (3, 1, 2)

    @given(st.permutations(list(range(1, 15))))
    def test_involution(self, values):
        p = Permutation(tuple(values))
        assert invert(invert(p)) == p


class TestUnimodal:
    def test_rise_then_fall(self):
        assert is_unimodal(Permutation((1, 3, 2)))

    def test_valley(self):
        assert not is_unimodal(Permutation((2, 1, 3)))

    @pytest.mark.parametrize("n", range(1, 11))
    def test_every_one_shelf_output(self, n):
        for letters in itertools.product((1, 2), repeat=n):
            assert is_unimodal(word_to_permutation(RandomWord(letters, 1)))


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation((1, 1, 2))


def test_word_rejects_out_of_range_letter():
    with pytest.raises(ValueError, match="letter 2"):
        RandomWord((1, 5), 2)


@settings(max_examples=50)
@given(words())
def test_output_is_bijection(word):
    p = word_to_permutation(word)
    assert sorted(p.one_line) == list(range(1, len(word) + 1))
