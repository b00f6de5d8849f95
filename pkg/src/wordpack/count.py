"""Exact occurrence counting.

An occurrence of a pattern p in a word w is a subsequence of w that is
order-isomorphic to p's letters (equalities must match equalities) and whose
letters are consecutive in w across every non-hyphenated gap.  Counts are
exact integers; densities are exact rationals with denominator
C(n - m + b, b), which reduces to C(n, m) for classical patterns.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, Optional, Tuple, Union

from .core import Pattern, WeightedPatternSet, Word


def _prefix_steps(letters: Tuple[int, ...], l: int) -> Tuple[Tuple[int, bool, int, int], ...]:
    """Per matched-prefix-length transition data: (next value, already
    assigned, nearest assigned value below, nearest assigned value above).
    Zero stands for no neighbor."""
    steps = []
    for j in range(len(letters)):
        v = letters[j]
        dom = set(letters[:j])
        assigned = v in dom
        lo = max((u for u in dom if u < v), default=0)
        hi = min((u for u in dom if u > v), default=0)
        steps.append((v, assigned, lo, hi))
    return tuple(steps)


def _count_engine(letters: Tuple[int, ...], hyphens: frozenset, w: Word) -> int:
    """Left-to-right scan; a state is (j, phi) where phi is the partial
    monotone map from pattern values to word values built by the first j
    matched letters.  States whose next gap is unhyphenated must extend at
    the very next position or die."""
    m = len(letters)
    l = max(letters)
    steps = _prefix_steps(letters, l)
    phi0 = (0,) * l
    free: Dict[Tuple[int, Tuple[int, ...]], int] = {(0, phi0): 1}
    hot: Dict[Tuple[int, Tuple[int, ...]], int] = {}
    total = 0
    for x in w.letters:
        new_hot: Dict[Tuple[int, Tuple[int, ...]], int] = {}
        free_add = []
        for pool in (free, hot):
            for (j, phi), cnt in pool.items():
                if j == m:
                    continue
                v, assigned, lo, hi = steps[j]
                if assigned:
                    if phi[v - 1] != x:
                        continue
                    phi2 = phi
                else:
                    if lo and phi[lo - 1] >= x:
                        continue
                    if hi and phi[hi - 1] <= x:
                        continue
                    phi2 = phi[: v - 1] + (x,) + phi[v:]
                j2 = j + 1
                if j2 == m:
                    total += cnt
                elif j2 in hyphens:
                    free_add.append(((j2, phi2), cnt))
                else:
                    key = (j2, phi2)
                    new_hot[key] = new_hot.get(key, 0) + cnt
        for key, cnt in free_add:
            free[key] = free.get(key, 0) + cnt
        hot = new_hot
    return total


def count_generalized(p: Pattern, w: Word) -> int:
    """Occurrences of p in w honoring p's hyphen structure."""
    return _count_engine(p.letters, p.hyphens, w)


def count_classical(p: Pattern, w: Word) -> int:
    """Occurrences of a classical pattern (every gap hyphenated)."""
    if not p.is_classical:
        raise ValueError(f"pattern {p} is not classical; use count_generalized")
    return _count_engine(p.letters, p.hyphens, w)


def weighted_count(ps: WeightedPatternSet, w: Word) -> Fraction:
    """Weighted occurrence total over the set."""
    return sum((wt * count_generalized(p, w) for p, wt in ps.entries), Fraction(0))


def occurrence_denominator(m: int, b: int, n: int) -> int:
    """Number of candidate placements: C(n - m + b, b)."""
    return comb(n - m + b, b) if n - m + b >= b else 0


@dataclass(frozen=True)
class CountReport:
    """Exact count, placement denominator, and density d = count / denom."""

    count: Fraction
    denom: int
    density: Fraction
    m: int
    b: int
    n: int


def density(ps: Union[Pattern, WeightedPatternSet], w: Word) -> CountReport:
    """Exact finite packing density of a pattern or weighted set in w."""
    if isinstance(ps, Pattern):
        ps = WeightedPatternSet.single(ps)
    denom = occurrence_denominator(ps.m, ps.b, w.n)
    if denom == 0:
        raise ValueError(f"word shorter than pattern (n={w.n} < m={ps.m}): no placements")
    cnt = weighted_count(ps, w)
    return CountReport(cnt, denom, cnt / denom, ps.m, ps.b, w.n)


def tiebreak_permutation(w: Word) -> Word:
    """Resolve ties to a permutation: the j-th occurrence (left to right) of
    letter i becomes (number of letters <= i) - j + 1.  Equal letters turn
    into descending runs; occurrence counts of classical permutation
    pattern sets never decrease under this map."""
    counts = [0] * (w.k + 1)
    for v in w.letters:
        counts[v] += 1
    cum = [0] * (w.k + 1)
    run = 0
    for i in range(1, w.k + 1):
        run += counts[i]
        cum[i] = run
    seen = [0] * (w.k + 1)
    out = []
    for v in w.letters:
        seen[v] += 1
        out.append(cum[v] - seen[v] + 1)
    return Word(tuple(out), w.n)


def pattern_table(w: Word, max_m: int) -> Dict[Tuple[Tuple[int, ...], int], int]:
    """Occurrence counts of every pattern of length <= max_m in w, over all
    hyphenations, in one scan.

    Keys are (canonical letters, gap mask) where bit g-1 of the mask marks a
    hyphen at gap g.  Only patterns with a positive count appear.  The scan
    aggregates subsequences by (letter values, adjacency mask); each class
    then feeds every hyphenation that keeps its non-adjacent gaps hyphenated.
    """
    # states: (valueseq, adjmask) -> count; split by whether the subsequence
    # ends at the previous position (may still grow a block) or earlier
    older: Dict[Tuple[Tuple[int, ...], int], int] = {}
    end_prev: Dict[Tuple[Tuple[int, ...], int], int] = {}
    for x in w.letters:
        new_end: Dict[Tuple[Tuple[int, ...], int], int] = {((x,), 0): 1}
        for pool, adjacent in ((end_prev, True), (older, False)):
            for (seq, adj), cnt in pool.items():
                j = len(seq)
                if j >= max_m:
                    continue
                adj2 = adj | (1 << (j - 1)) if adjacent else adj
                key = (seq + (x,), adj2)
                new_end[key] = new_end.get(key, 0) + cnt
        for key, cnt in end_prev.items():
            older[key] = older.get(key, 0) + cnt
        end_prev = new_end
    for key, cnt in end_prev.items():
        older[key] = older.get(key, 0) + cnt

    flat_cache: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    table: Dict[Tuple[Tuple[int, ...], int], int] = {}
    for (seq, adj), cnt in older.items():
        flat = flat_cache.get(seq)
        if flat is None:
            rank = {v: i + 1 for i, v in enumerate(sorted(set(seq)))}
            flat = tuple(rank[v] for v in seq)
            flat_cache[seq] = flat
        j = len(seq)
        fullmask = (1 << (j - 1)) - 1
        nonadj = fullmask & ~adj
        # every hyphenation containing the non-adjacent gaps
        sub = adj
        while True:
            key = (flat, nonadj | sub)
            table[key] = table.get(key, 0) + cnt
            if sub == 0:
                break
            sub = (sub - 1) & adj
    return table


def table_lookup(
    table: Dict[Tuple[Tuple[int, ...], int], int], p: Pattern
) -> int:
    """Count of p in the word a pattern_table was built from."""
    mask = 0
    for g in p.hyphens:
        mask |= 1 << (g - 1)
    return table.get((p.letters, mask), 0)
