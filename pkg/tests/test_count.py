"""Occurrence counting: scalar engine, bulk tables, densities, tie-break map."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from wordpack.core import Pattern, WeightedPatternSet, Word, flatten, parse_pattern, parse_word
from wordpack.count import (
    CountReport,
    count_classical,
    count_generalized,
    density,
    occurrence_denominator,
    pattern_table,
    table_lookup,
    tiebreak_permutation,
    weighted_count,
)


class TestFrozenValues:
    """Anchor values, each independently verified by the brute-force oracle."""

    def test_opening_example(self):
        assert count_classical(parse_pattern("122"), parse_word("213322")) == 3

    def test_scalar_anchors(self):
        cases = [
            ("132", "1423", 2),
            ("112", "213322", 0),
            ("12-1", "1211", 2),
            ("11-2", "112", 1),
            ("121", "1212", 1),
            ("121", "1213", 1),
            ("112", "1212", 1),
            ("123g", "1234", 2),
        ]
        for ptxt, wtxt, expect in cases:
            p, w = parse_pattern(ptxt), parse_word(wtxt)
            assert count_generalized(p, w) == expect, ptxt
            assert oracles.naive_count(p.letters, set(p.hyphens), w.letters) == expect

    def test_density_anchors(self):
        assert density(parse_pattern("112"), parse_word("1112")).density == Fraction(3, 4)
        rep = density(parse_pattern("12-1"), parse_word("121"))
        assert rep.count == 1 and rep.denom == 1 and rep.density == Fraction(1)
        assert density(parse_pattern("122"), parse_word("213322")).density == Fraction(3, 20)

    def test_constant_pattern_saturates_subword_bound(self):
        p = parse_pattern("111g")
        w = Word((1,) * 7, 1)
        rep = density(p, w)
        assert rep.count == rep.denom == occurrence_denominator(3, 1, 7) == 5
        assert rep.density == 1


class TestDenominator:
    def test_classical_is_binomial(self):
        from math import comb

        for m in range(1, 5):
            for n in range(m, 10):
                assert occurrence_denominator(m, m, n) == comb(n, m)

    def test_subword_is_window_count(self):
        for m in range(1, 5):
            for n in range(m, 10):
                assert occurrence_denominator(m, 1, n) == n - m + 1

    def test_vincular_anchor(self):
        assert occurrence_denominator(3, 2, 3) == 1
        assert occurrence_denominator(3, 2, 6) == 10

    def test_short_word(self):
        assert occurrence_denominator(3, 3, 2) == 0
        with pytest.raises(ValueError):
            density(parse_pattern("123"), parse_word("12"))


class TestEngineAgainstOracle:
    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_random_cases(self, data):
        letters = tuple(
            data.draw(st.lists(st.integers(1, 4), min_size=1, max_size=4))
        )
        flat = flatten(letters)
        gaps = frozenset(
            g
            for g in range(1, len(flat))
            if data.draw(st.booleans(), label=f"gap{g}")
        )
        p = Pattern(flat, gaps)
        n = data.draw(st.integers(p.m, 8))
        k = data.draw(st.integers(1, n))
        w = tuple(data.draw(st.integers(1, k)) for _ in range(n))
        assert count_generalized(p, Word(w, k)) == oracles.naive_count(
            flat, gaps, w
        )

    def test_weighted_count(self):
        ps = WeightedPatternSet.uniform(
            [parse_pattern("112"), parse_pattern("121")]
        )
        w = parse_word("1212")
        expect = Fraction(
            oracles.naive_count((1, 1, 2), {1, 2}, w.letters)
            + oracles.naive_count((1, 2, 1), {1, 2}, w.letters),
            1,
        )
        assert weighted_count(ps, w) == expect

    def test_report_shape(self):
        rep = density(parse_pattern("122"), parse_word("213322"))
        assert isinstance(rep, CountReport)
        assert rep.m == 3 and rep.b == 3 and rep.n == 6
        assert rep.density == Fraction(rep.count, rep.denom)


class TestPatternTable:
    def test_exhaustive_small(self):
        for n in range(1, 6):
            for letters in oracles.canonical_words(n, n):
                w = Word(letters)
                table = pattern_table(w, max_m=4)
                naive = oracles.naive_table(letters, max_m=4)
                assert table == naive, letters

    def test_lookup_matches_scalar(self):
        rng = random.Random(11)
        pats = [
            parse_pattern(t)
            for t in ("132", "112", "1122", "12-1", "11-2", "121g", "1234")
        ]
        for _ in range(40):
            n = rng.randint(4, 8)
            k = rng.randint(2, n)
            w = Word(tuple(rng.randint(1, k) for _ in range(n)), k).canonical()
            table = pattern_table(w, max_m=4)
            for p in pats:
                assert table_lookup(table, p) == count_generalized(p, w), (p, w)

    def test_missing_pattern_is_zero(self):
        w = parse_word("111")
        table = pattern_table(w, max_m=3)
        assert table_lookup(table, parse_pattern("123")) == 0


class TestTiebreak:
    def test_anchors(self):
        assert tiebreak_permutation(parse_word("121")).letters == (2, 3, 1)
        assert tiebreak_permutation(parse_word("213322")).letters == (4, 1, 6, 5, 3, 2)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(1, 5), min_size=1, max_size=7))
    def test_output_is_permutation(self, letters):
        w = Word(tuple(letters)).canonical()
        f = tiebreak_permutation(w)
        assert sorted(f.letters) == list(range(1, w.n + 1))

    @settings(max_examples=150, deadline=None)
    @given(st.data())
    def test_never_loses_classical_permutation_occurrences(self, data):
        perm = data.draw(
            st.permutations(list(range(1, data.draw(st.integers(2, 4)) + 1)))
        )
        p = Pattern.classical(tuple(perm))
        n = data.draw(st.integers(p.m, 7))
        w = Word(
            tuple(data.draw(st.integers(1, 4)) for _ in range(n))
        ).canonical()
        f = tiebreak_permutation(w)
        assert count_generalized(p, f) >= count_generalized(p, w)

    def test_ties_broken_right_to_left(self):
        # equal letters receive decreasing ranks left to right
        f = tiebreak_permutation(parse_word("1111"))
        assert f.letters == (4, 3, 2, 1)
