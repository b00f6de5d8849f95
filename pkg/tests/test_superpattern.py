"""Tests for universality checking and shortest-superpattern search."""

from __future__ import annotations

import itertools

import pytest

from wordpack.core import Pattern, Word, flatten
from wordpack.search import SearchBudget, canonical_count
from wordpack.superpattern import (
    is_universal,
    pattern_universe,
    shortest_superpattern,
)
from wordpack.construct import superpattern_word


def brute_is_universal(letters, l, m):
    """Independent universality check from first principles."""
    spec = pattern_universe(l, m)
    found = {flatten(c) for c in itertools.combinations(letters, m)}
    return all(p.letters in found for p in spec.patterns)


def brute_shortest(l, m, max_len=12):
    """Smallest L such that some word in {1..l}^L is universal, by full
    enumeration of the unrestricted space (no canonical-form reduction)."""
    for length in range(m, max_len + 1):
        for letters in itertools.product(range(1, l + 1), repeat=length):
            if brute_is_universal(letters, l, m):
                return length
    raise AssertionError(f"no universal word up to length {max_len}")


class TestPatternUniverse:
    def test_two_two(self):
        spec = pattern_universe(2, 2)
        texts = {"".join(map(str, p.letters)) for p in spec.patterns}
        assert texts == {"11", "12", "21"}
        assert spec.size == 3

    def test_three_three_count_and_members(self):
        spec = pattern_universe(3, 3)
        assert spec.size == 13
        texts = {"".join(map(str, p.letters)) for p in spec.patterns}
        assert texts == {
            "111", "112", "121", "122", "211", "212", "221",
            "123", "132", "213", "231", "312", "321",
        }

    def test_size_matches_canonical_count(self):
        for l in range(1, 5):
            for m in range(1, 5):
                spec = pattern_universe(l, m)
                assert spec.size == canonical_count(m, min(l, m))

    def test_wide_alphabet_reduces(self):
        assert pattern_universe(5, 3) is pattern_universe(3, 3)
        assert pattern_universe(7, 2).size == 3

    def test_patterns_are_classical_and_lex_sorted(self):
        spec = pattern_universe(3, 3)
        assert all(p.is_classical for p in spec.patterns)
        letters = [p.letters for p in spec.patterns]
        assert letters == sorted(letters)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            pattern_universe(0, 3)
        with pytest.raises(ValueError):
            pattern_universe(2, 0)


class TestIsUniversal:
    def test_known_witness(self):
        ok, missing = is_universal(Word((1, 2, 1, 3, 1, 2, 1)), 3, 3)
        assert ok and missing == ()

    def test_missing_patterns_exact(self):
        ok, missing = is_universal(Word((1, 2, 3, 1, 2, 3)), 3, 3)
        assert not ok
        texts = {"".join(map(str, p.letters)) for p in missing}
        assert "321" in texts and "221" in texts

    def test_constant_word(self):
        ok, missing = is_universal(Word((1, 1, 1, 1)), 2, 2)
        assert not ok
        texts = {"".join(map(str, p.letters)) for p in missing}
        assert texts == {"12", "21"}

    def test_agrees_with_brute_force(self):
        for letters in itertools.product((1, 2), repeat=5):
            ok, _ = is_universal(Word(letters), 2, 2)
            assert ok == brute_is_universal(letters, 2, 2)

    def test_wide_alphabet_reduction(self):
        ok, _ = is_universal(Word((1, 2, 1)), 9, 2)
        assert ok


class TestShortestSuperpattern:
    def test_two_two(self):
        res = shortest_superpattern(2, 2)
        assert res.length == 3
        assert res.witness.letters == (1, 2, 1)
        assert res.lower_bound == 3 and res.lower_bound_certified
        assert brute_shortest(2, 2) == 3

    def test_three_three(self):
        res = shortest_superpattern(3, 3)
        assert res.length == 7
        assert res.witness.letters == (1, 2, 1, 3, 1, 2, 1)
        assert res.lower_bound == 7 and res.lower_bound_certified
        verdicts = [(v.length, v.verdict) for v in res.log]
        assert verdicts == [(6, "exhausted"), (7, "witness")]

    def test_three_three_matches_brute(self):
        assert brute_shortest(3, 3) == 7

    def test_two_three(self):
        res = shortest_superpattern(2, 3)
        assert res.length == 5
        assert res.witness.letters == (1, 2, 1, 2, 1)
        assert res.lower_bound_certified
        assert brute_shortest(2, 3) == 5

    def test_two_four(self):
        res = shortest_superpattern(2, 4)
        assert res.length == 7
        assert res.lower_bound_certified
        assert brute_shortest(2, 4) == 7

    def test_one_letter_and_single_position(self):
        res = shortest_superpattern(1, 5)
        assert res.length == 5
        assert res.witness.letters == (1,) * 5
        assert shortest_superpattern(1, 1).length == 1

    def test_wide_alphabet_reduces(self):
        res = shortest_superpattern(4, 2)
        assert res.l == 2 and res.length == 3

    def test_witness_always_reverified_universal(self):
        for l, m in [(2, 2), (2, 3), (3, 3), (2, 4)]:
            res = shortest_superpattern(l, m)
            ok, missing = is_universal(res.witness, l, m)
            assert ok and missing == ()

    def test_length_within_constructive_bound(self):
        for l, m in [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4)]:
            res = shortest_superpattern(l, m)
            assert res.length <= l * (m - 1) + 1
            assert res.length >= m

    def test_lex_least_witness(self):
        """No universal word of the optimal length precedes the witness."""
        res = shortest_superpattern(2, 3)
        earlier = [
            w
            for w in itertools.product((1, 2), repeat=res.length)
            if w < res.witness.letters and brute_is_universal(w, 2, 3)
        ]
        assert earlier == []


class TestBudgets:
    def test_budget_exhaustion_is_honest(self):
        res = shortest_superpattern(3, 4, budget=SearchBudget(max_nodes=500))
        assert not res.lower_bound_certified
        assert res.length == 10  # constructive fallback 3*(4-1)+1
        assert res.lower_bound == 8  # counting bound, nothing exhausted
        assert res.log[-1].verdict == "inconclusive"
        ok, _ = is_universal(res.witness, 3, 4)
        assert ok

    def test_int_budget_accepted(self):
        res = shortest_superpattern(3, 4, budget=500)
        assert not res.lower_bound_certified

    def test_large_budget_certifies(self):
        res = shortest_superpattern(3, 4, budget=SearchBudget(max_nodes=10**7))
        assert res.lower_bound_certified
        assert res.length == 10
        assert res.lower_bound == 10

    def test_time_budget_is_honest(self):
        res = shortest_superpattern(4, 4, budget=SearchBudget(max_seconds=0.1))
        assert not res.lower_bound_certified
        assert res.length == 13  # constructive fallback
        ok, _ = is_universal(res.witness, 4, 4)
        assert ok


class TestDeterminism:
    def test_threads_do_not_change_results(self):
        for kwargs in (
            {},
            {"budget": SearchBudget(max_nodes=500)},
            {"budget": SearchBudget(max_nodes=10**6)},
        ):
            a = shortest_superpattern(3, 4, **kwargs)
            b = shortest_superpattern(3, 4, threads=4, **kwargs)
            assert a.length == b.length
            assert a.witness == b.witness
            assert a.lower_bound == b.lower_bound
            assert a.lower_bound_certified == b.lower_bound_certified
            assert a.log == b.log  # even per-length node counts agree

    def test_reverse_shards_reverifies_exhausted_lengths(self):
        normal = shortest_superpattern(3, 3)
        rev = shortest_superpattern(3, 3, reverse_shards=True)
        assert normal.length == rev.length
        assert normal.lower_bound == rev.lower_bound
        norm_exh = {v.length: v.nodes for v in normal.log if v.verdict == "exhausted"}
        rev_exh = {v.length: v.nodes for v in rev.log if v.verdict == "exhausted"}
        assert norm_exh == rev_exh  # full-length sweeps are order-independent

    def test_repeat_runs_identical(self):
        a = shortest_superpattern(3, 4)
        b = shortest_superpattern(3, 4)
        assert a == b


class TestConstructiveWordBridge:
    def test_constructive_word_universal_small_grid(self):
        for m in range(1, 6):
            for l in range(1, m + 1):
                built = superpattern_word(l, m)
                ok, missing = is_universal(built.word, l, m)
                assert ok, (l, m, missing)
                assert built.word.n == l * (m - 1) + 1
