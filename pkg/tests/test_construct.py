"""Builder tests: every predicted count must recount exactly on the engine."""

from __future__ import annotations

from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wordpack.construct import (
    Construction,
    balanced_monotone_word,
    layered_word,
    nested_word,
    pqr_word,
    sqrt_layer_perm,
    superpattern_word,
    twelve_one_word,
)
from wordpack.core import Pattern, Word, format_word, parse_pattern
from wordpack.count import count_generalized, density


class TestConstructionType:
    def test_counts_must_align_with_targets(self):
        with pytest.raises(ValueError):
            Construction(Word((1, 2)), "x", targets=(parse_pattern("12"),), predicted_counts=())

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            Construction(Word((1, 2)), "x", (parse_pattern("12"),), (-1,))

    def test_recount_and_verify(self):
        c = Construction(Word((1, 2, 2)), "x", (parse_pattern("12"),), (2,))
        assert c.recount() == (2,)
        assert c.verify()
        bad = Construction(Word((1, 2, 2)), "x", (parse_pattern("12"),), (3,))
        assert not bad.verify()


class TestBalancedMonotone:
    def test_exact_division(self):
        assert format_word(balanced_monotone_word(6, 3).word) == "112233"
        assert format_word(balanced_monotone_word(5, 5).word) == "12345"

    def test_tiebreak_documented_cases(self):
        # 7 into 3: partial-sum rounding of 7/3, 14/3, 7 gives cuts 2, 5, 7
        assert format_word(balanced_monotone_word(7, 3).word) == "1122233"
        # 6 into 4: the half-integer targets 1.5 and 4.5 round up
        assert format_word(balanced_monotone_word(6, 4).word) == "112334"

    @given(st.integers(1, 60).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))))
    @settings(max_examples=60, deadline=None)
    def test_double_inequality_and_exact_counts(self, nk):
        n, k = nk
        c = balanced_monotone_word(n, k)
        letters = c.word.letters
        assert len(letters) == n
        assert all(a <= b for a, b in zip(letters, letters[1:]))
        sizes = [letters.count(v) for v in range(1, k + 1)]
        for r in range(1, k + 1):
            assert abs(sizes[r - 1] - Fraction(n, k)) < 1
            assert abs(sum(sizes[:r]) - Fraction(r * n, k)) < 1
        assert c.verify()

    def test_identity_density_at_exact_division(self):
        for k, m in [(4, 2), (5, 3), (6, 2)]:
            n = 3 * k
            c = balanced_monotone_word(n, k, ident=m)
            rep = density(c.targets[1], c.word)
            assert rep.density == Fraction(comb(k, m) * (n // k) ** m, comb(n, m))

    def test_adjacent_rise_density_anchor(self):
        c = balanced_monotone_word(25, 5)
        assert c.predicted_counts[0] == 200
        assert c.predicted_density == Fraction(100, 138)

    def test_bounds_rejected(self):
        with pytest.raises(ValueError):
            balanced_monotone_word(3, 4)
        with pytest.raises(ValueError):
            balanced_monotone_word(5, 0)


class TestPqrWord:
    def test_examples(self):
        c = pqr_word(1, 1, 2, 8)
        assert format_word(c.word) == "11222211"
        assert c.predicted_counts == (comb(2, 1) * comb(4, 2) * comb(2, 1),)
        assert c.verify()
        assert format_word(pqr_word(2, 1, 2, 10).word) == "1111222211"

    def test_middle_exponent_one_rejected(self):
        with pytest.raises(ValueError):
            pqr_word(1, 1, 1, 9)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            pqr_word(0, 1, 2, 9)
        with pytest.raises(ValueError):
            pqr_word(1, 1, 2, 3)

    @given(
        st.integers(1, 3),
        st.integers(1, 3),
        st.integers(2, 4),
        st.integers(0, 20),
    )
    @settings(max_examples=50, deadline=None)
    def test_shape_and_exact_count(self, p, q, r, extra):
        n = p + q + r + extra
        c = pqr_word(p, q, r, n)
        letters = c.word.letters
        assert len(letters) == n
        # three blocks: ones, twos, ones
        twos = [i for i, v in enumerate(letters) if v == 2]
        assert twos == list(range(twos[0], twos[0] + len(twos)))
        s = p + q + r
        a = twos[0]
        cmid = len(twos)
        b = n - a - cmid
        assert abs(a - Fraction(n * p, s)) < 1
        assert abs(cmid - Fraction(n * r, s)) < 1
        assert abs(b - Fraction(n * q, s)) < 1
        assert c.verify()


class TestNestedWord:
    @given(
        st.integers(1, 3),
        st.integers(1, 3),
        st.integers(1, 4),
        st.integers(1, 80),
    )
    @settings(max_examples=40, deadline=None)
    def test_length_exact_and_count_verifies(self, p, q, depth, n):
        c = nested_word(p, q, p + q, depth, n)
        assert c.word.n == n
        assert c.verify()

    def test_heights_rise_then_fall(self):
        c = nested_word(1, 1, 2, 3, 50)
        letters = c.word.letters
        peak = letters.index(max(letters))
        assert all(a <= b for a, b in zip(letters[:peak], letters[1 : peak + 1]))
        assert all(a >= b for a, b in zip(letters[peak:], letters[peak + 1 :]))

    def test_depth_one_is_three_blocks(self):
        c = nested_word(1, 1, 2, 1, 12)
        assert format_word(c.word) == "111122221111"
        assert c.verify()

    def test_mismatched_s_rejected(self):
        with pytest.raises(ValueError):
            nested_word(1, 1, 3, 2, 10)
        with pytest.raises(ValueError):
            nested_word(1, 1, 2, 0, 10)


class TestLayeredWord:
    def test_permutation_examples(self):
        c = layered_word([Fraction(1, 2), Fraction(1, 2)], 4, mode="permutation")
        assert format_word(c.word) == "2143"
        c = layered_word([4, 2], 6, mode="permutation", target=parse_pattern("213"))
        assert format_word(c.word) == "432165"
        assert c.verify()

    def test_word_examples(self):
        c = layered_word([Fraction(2, 3), Fraction(1, 3)], 6, mode="word", target=parse_pattern("112"))
        assert format_word(c.word) == "111122"
        assert c.predicted_counts == (12,)
        assert c.verify()
        assert format_word(layered_word([1], 3, mode="word").word) == "111"

    def test_permutation_is_permutation(self):
        c = layered_word([3, 1, 2], 11, mode="permutation")
        assert sorted(c.word.letters) == list(range(1, 12))

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            layered_word([1, 1], 4, mode="matrix")
        with pytest.raises(ValueError):  # subword target has no closed count here
            layered_word([1, 1], 6, mode="word", target=parse_pattern("112g"))
        with pytest.raises(ValueError):  # not layered
            layered_word([1, 1], 6, mode="word", target=parse_pattern("2413"))
        with pytest.raises(ValueError):  # constant layer cannot embed in a permutation
            layered_word([1, 1], 6, mode="permutation", target=parse_pattern("112"))
        with pytest.raises(ValueError):  # decreasing layer cannot embed in constant blocks
            layered_word([1, 1], 6, mode="word", target=parse_pattern("213"))

    @given(
        st.lists(st.integers(1, 5), min_size=1, max_size=4),
        st.integers(1, 24),
        st.sampled_from(["112", "1122", "123", "12", "1", "111223"]),
    )
    @settings(max_examples=40, deadline=None)
    def test_word_mode_count_formula(self, weights, n, text):
        c = layered_word(weights, n, mode="word", target=parse_pattern(text))
        assert c.word.n == n
        assert c.verify()

    @given(
        st.lists(st.integers(1, 5), min_size=1, max_size=4),
        st.integers(1, 16),
        st.sampled_from(["21", "213", "2143", "321", "1", "12", "21435"]),
    )
    @settings(max_examples=40, deadline=None)
    def test_permutation_mode_count_formula(self, weights, n, text):
        c = layered_word(weights, n, mode="permutation", target=parse_pattern(text))
        assert c.word.n == n
        assert c.verify()


class TestSuperpatternWord:
    def test_examples(self):
        assert format_word(superpattern_word(3, 3).word) == "1231231"
        assert format_word(superpattern_word(2, 2).word) == "121"
        w = superpattern_word(4, 4).word
        assert format_word(w) == "1234123412341" and w.n == 13

    def test_length_formula(self):
        for m in range(1, 7):
            for l in range(1, m + 1):
                assert superpattern_word(l, m).word.n == l * (m - 1) + 1

    def test_wide_alphabet_rejected(self):
        with pytest.raises(ValueError):
            superpattern_word(4, 3)


class TestTwelveOneWord:
    def test_examples(self):
        c = twelve_one_word(9, 3)
        assert format_word(c.word) == "121212111"
        assert c.predicted_counts == (12,)
        assert c.verify()
        c = twelve_one_word(4, 2)
        assert format_word(c.word) == "1212"
        assert c.predicted_counts == (1,)
        assert c.verify()

    def test_formula_across_grid(self):
        for n in range(1, 13):
            for d in range(0, n // 2 + 1):
                c = twelve_one_word(n, d)
                assert c.predicted_counts == (d * (d - 1) // 2 + d * (n - 2 * d),)
                assert c.verify()

    def test_bounds(self):
        with pytest.raises(ValueError):
            twelve_one_word(5, 3)
        with pytest.raises(ValueError):
            twelve_one_word(5, -1)


class TestSqrtLayerPerm:
    def test_examples(self):
        assert format_word(sqrt_layer_perm(4).word) == "2143"
        assert format_word(sqrt_layer_perm(9).word) == "321654987"

    def test_perfect_squares_balanced(self):
        for r in range(1, 8):
            c = sqrt_layer_perm(r * r)
            letters = c.word.letters
            for u in range(r):
                layer = letters[u * r : (u + 1) * r]
                assert list(layer) == list(range((u + 1) * r, u * r, -1))

    @given(st.integers(1, 60))
    @settings(max_examples=60, deadline=None)
    def test_count_verifies(self, n):
        c = sqrt_layer_perm(n)
        assert c.word.n == n
        assert sorted(c.word.letters) == list(range(1, n + 1))
        assert c.verify()

    def test_density_anchor_at_hundred(self):
        c = sqrt_layer_perm(100)
        assert c.predicted_density == Fraction(450, 539)
        assert c.predicted_density > Fraction(4, 5)
        assert c.verify()


class TestCapMaximizerBridge:
    def test_materialized_cap_maximizer_density_close(self):
        from wordpack.core import LayeredShape
        from wordpack.density import layered_density_cap

        cap = layered_density_cap(LayeredShape((2, 1)), 6, starts=8, seed=12345)
        masses = cap.aux["proportions"]
        c = layered_word(
            [Fraction(x).limit_denominator(10**9) for x in masses],
            600,
            mode="word",
            target=parse_pattern("112"),
        )
        got = density(c.targets[0], c.word).density
        assert abs(float(got) - cap.value) < 2e-2
        assert c.verify()
