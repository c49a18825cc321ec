import random

import pytest

from nvfuse.alignment import AlignmentParams, align, strip_gaps
from nvfuse.errors import GranularityMismatchError, InvalidInputError
from nvfuse.model import GAP, Symbol, parse_transcript

from helpers import random_tokens, word_symbols
from oracles import lcs_len


def _tokens(seq):
    return [s.token() for s in seq]


class TestWorkedExample:
    def test_weak_vs_first_annotator(self):
        ti = parse_transcript("It's dog [laugh] on the mat").symbols
        t1 = parse_transcript("It's a cat [laugh] on the mat").symbols
        pair = align(ti, t1)
        assert pair.matched_columns == 5
        assert strip_gaps(pair.left) == ti
        assert strip_gaps(pair.right) == t1
        for a, b in pair.columns():
            assert not (a.is_gap and b.is_gap)
            if not a.is_gap and not b.is_gap:
                assert a == b

    def test_insertion_block_emits_first_sequence_first(self):
        # Tail insertions from both sides keep the first sequence's symbol
        # ahead of the second's.
        s = word_symbols(("on", "the", "mat"))
        t = word_symbols(("on", "the", "sofa"))
        pair = align(s, t)
        assert _tokens(pair.left) == ["on", "the", "mat", "-"]
        assert _tokens(pair.right) == ["on", "the", "-", "sofa"]


class TestBasics:
    def test_identity(self):
        s = parse_transcript("a b [laugh] c").symbols
        pair = align(s, s)
        assert pair.left == s and pair.right == s
        assert pair.matched_columns == len(s)

    def test_empty_second(self):
        s = word_symbols(("x", "y"))
        pair = align(s, ())
        assert pair.left == s
        assert all(b.is_gap for b in pair.right)

    def test_both_empty(self):
        pair = align((), ())
        assert len(pair) == 0 and pair.matched_columns == 0

    def test_granularity_mismatch(self):
        words = word_symbols(("a",))
        chars = (Symbol.char("a"),)
        with pytest.raises(GranularityMismatchError):
            align(words, chars)

    def test_gap_input_rejected(self):
        with pytest.raises(InvalidInputError):
            align((GAP,), ())

    def test_length_guard(self):
        s = tuple(Symbol.word("a") for _ in range(100_001))
        with pytest.raises(InvalidInputError):
            align(s, ())

    def test_params_validation(self):
        with pytest.raises(InvalidInputError):
            AlignmentParams(match_score=0)
        with pytest.raises(InvalidInputError):
            AlignmentParams(gap_penalty=1)

    def test_deterministic(self):
        s = word_symbols(("a", "b", "a", "c"))
        t = word_symbols(("b", "a", "b"))
        assert align(s, t) == align(s, t)


class TestProperties:
    def test_random_pairs_match_lcs_oracle(self):
        rng = random.Random(7)
        for _ in range(300):
            s_tok = random_tokens(rng, 10)
            t_tok = random_tokens(rng, 10)
            pair = align(word_symbols(s_tok), word_symbols(t_tok))
            assert pair.matched_columns == lcs_len(s_tok, t_tok)
            assert strip_gaps(pair.left) == word_symbols(s_tok)
            assert strip_gaps(pair.right) == word_symbols(t_tok)
            assert not any(a.is_gap and b.is_gap for a, b in pair.columns())
            assert all(a == b for a, b in pair.columns() if not a.is_gap and not b.is_gap)

    def test_symmetric_matched_count(self):
        rng = random.Random(8)
        for _ in range(100):
            s = word_symbols(random_tokens(rng, 9))
            t = word_symbols(random_tokens(rng, 9))
            assert align(s, t).matched_columns == align(t, s).matched_columns

    def test_negative_gap_penalty_same_matches(self):
        # Gaps cost, but maximizing matches still dominates; matched-column
        # counts stay at the LCS length.
        rng = random.Random(9)
        params = AlignmentParams(match_score=2, gap_penalty=-1)
        for _ in range(100):
            s_tok = random_tokens(rng, 8)
            t_tok = random_tokens(rng, 8)
            pair = align(word_symbols(s_tok), word_symbols(t_tok), params)
            assert pair.matched_columns == lcs_len(s_tok, t_tok)


class TestStripGaps:
    def test_basic(self):
        seq = (Symbol.word("It's"), GAP, Symbol.word("mat"))
        assert strip_gaps(seq) == (Symbol.word("It's"), Symbol.word("mat"))

    def test_all_gap(self):
        assert strip_gaps((GAP, GAP)) == ()
