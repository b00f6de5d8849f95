"""Extremal search over words: maxima of occurrence counts and exact finite
packing densities.

Order-isomorphic words contain every pattern equally often, so all searches
run over canonical words (distinct letters exactly {1..d}, d <= min(k, n)),
one representative per isomorphism class.  Enumeration is lexicographic and
the reported witness is always the lexicographically least maximizer, which
makes results independent of sharding and thread count.

Two engines sit behind max_count: an exhaustive vectorized sweep used when no
node budget is given and the space is small enough, and a branch-and-bound
depth-first search with incremental occurrence counters for budgeted runs.
Both track the best word per alphabet-support size d, so one sweep of the
n-letter space answers every k at once.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import Pattern, WeightedPatternSet, Word, layered_decompose
from .count import count_generalized, occurrence_denominator, tiebreak_permutation

#: refuse exhaustive runs beyond this many candidate words unless budgeted
EXHAUSTIVE_WORD_LIMIT = 8_000_000


def surjection_count(n: int, d: int) -> int:
    """Words of length n using every letter of {1..d}."""
    return sum((-1) ** i * comb(d, i) * (d - i) ** n for i in range(d + 1))


def canonical_count(n: int, k: Optional[int] = None) -> int:
    """Number of canonical words of length n on at most k letters."""
    cap = n if k is None else min(k, n)
    return sum(surjection_count(n, d) for d in range(1, cap + 1))


def enumerate_canonical(n: int, k: Optional[int] = None) -> Iterator[Word]:
    """Canonical words of length n on at most k letters, lexicographically.

    A prefix is extendable iff the letters missing below its maximum still
    fit in the remaining slots, so each canonical word is produced once.
    """
    cap = n if k is None else min(k, n)
    if n == 0:
        return
    prefix = [0] * n

    def rec(t: int, maxv: int, dcount: int) -> Iterator[Word]:
        slots = n - t - 1
        for x in range(1, cap + 1):
            newmax = x if x > maxv else maxv
            newd = dcount + (0 if x in prefix[:t] else 1)
            if newmax - newd > slots:
                continue
            prefix[t] = x
            if t + 1 == n:
                yield Word(tuple(prefix), newmax)
            else:
                yield from rec(t + 1, newmax, newd)
        prefix[t] = 0

    yield from rec(0, 0, 0)


@dataclass(frozen=True)
class SearchBudget:
    """Node and wall-clock allowance for branch-and-bound runs; None means
    unbounded.  Node budgets keep results deterministic; time budgets are
    inherently run-dependent and mark results non-exhaustive when hit."""

    max_nodes: Optional[int] = None
    max_seconds: Optional[float] = None

    @property
    def bounded(self) -> bool:
        return self.max_nodes is not None or self.max_seconds is not None


@dataclass(frozen=True)
class SearchResult:
    """Maximum weighted count over the searched space with the
    lexicographically least witness."""

    count: Fraction
    denom: int
    density: Fraction
    witness: Word
    k: int
    n: int
    nodes: int
    exhaustive: bool


class _IncrementalCounter:
    """Occurrence counter supporting push/pop of word letters.

    State (j, phi): first j pattern letters matched, phi the partial
    monotone map from pattern values to word values.  States awaiting an
    unhyphenated gap must extend at the next push or die.
    """

    __slots__ = ("m", "steps", "hyphens", "free", "hot", "count", "_undo")

    def __init__(self, p: Pattern) -> None:
        self.m = p.m
        l = p.l
        steps = []
        for j in range(self.m):
            v = p.letters[j]
            dom = set(p.letters[:j])
            steps.append(
                (
                    v,
                    v in dom,
                    max((u for u in dom if u < v), default=0),
                    min((u for u in dom if u > v), default=0),
                )
            )
        self.steps = steps
        self.hyphens = p.hyphens
        self.free: Dict[Tuple[int, Tuple[int, ...]], int] = {(0, (0,) * l): 1}
        self.hot: Dict[Tuple[int, Tuple[int, ...]], int] = {}
        self.count = 0
        self._undo: List[Tuple[list, dict, int]] = []

    def push(self, x: int) -> int:
        new_hot: Dict[Tuple[int, Tuple[int, ...]], int] = {}
        adds = []
        delta = 0
        m = self.m
        for pool in (self.free, self.hot):
            for (j, phi), cnt in pool.items():
                if j == m:
                    continue
                v, assigned, lo, hi = self.steps[j]
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
                    delta += cnt
                elif j2 in self.hyphens:
                    adds.append(((j2, phi2), cnt))
                else:
                    key = (j2, phi2)
                    new_hot[key] = new_hot.get(key, 0) + cnt
        log = []
        free = self.free
        for key, cnt in adds:
            log.append((key, free.get(key)))
            free[key] = free.get(key, 0) + cnt
        self._undo.append((log, self.hot, delta))
        self.hot = new_hot
        self.count += delta
        return delta

    def pop(self) -> None:
        log, old_hot, delta = self._undo.pop()
        free = self.free
        for key, prev in reversed(log):
            if prev is None:
                del free[key]
            else:
                free[key] = prev
        self.hot = old_hot
        self.count -= delta


def _normalize_weights(ps: WeightedPatternSet) -> Tuple[List[Tuple[Pattern, int]], int]:
    """Scale weights to integers; returns (entries, scale)."""
    scale = 1
    for _, w in ps.entries:
        scale = scale * w.denominator // gcd(scale, w.denominator)
    return [(p, int(w * scale)) for p, w in ps.entries], scale


class _BudgetExceeded(Exception):
    pass


class _Shard:
    """Branch-and-bound DFS over one canonical subtree, tracking per-d
    maxima (d = alphabet support of the complete word)."""

    def __init__(
        self,
        entries: List[Tuple[Pattern, int]],
        n: int,
        cap: int,
        crem: List[int],
        wsum: int,
        max_nodes: Optional[int],
        deadline: Optional[float] = None,
    ) -> None:
        self.entries = entries
        self.n = n
        self.cap = cap
        self.crem = crem
        self.wsum = wsum
        self.max_nodes = max_nodes
        self.deadline = deadline
        self.counters = [_IncrementalCounter(p) for p, _ in entries]
        self.weights = [w for _, w in entries]
        self.best: List[int] = [-1] * (cap + 1)
        self.bestw: List[Optional[Tuple[int, ...]]] = [None] * (cap + 1)
        self.nodes = 0
        self.exhausted = False
        self.prefix: List[int] = []
        self.used = [0] * (cap + 2)
        self.cur = 0

    def _push(self, x: int) -> None:
        if (
            self.deadline is not None
            and (self.nodes & 1023) == 0
            and time.monotonic() > self.deadline
        ):
            raise _BudgetExceeded
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            self.nodes -= 1
            raise _BudgetExceeded
        for c, w in zip(self.counters, self.weights):
            self.cur += w * c.push(x)
        self.prefix.append(x)
        self.used[x] += 1

    def _pop(self) -> None:
        x = self.prefix.pop()
        self.used[x] -= 1
        for c, w in zip(self.counters, self.weights):
            self.cur -= w * c._undo[-1][2]
            c.pop()

    def run(self, prefix: Sequence[int]) -> None:
        maxv = 0
        dcount = 0
        try:
            for x in prefix:
                if x > maxv:
                    maxv = x
                dcount += 0 if self.used[x] else 1
                self._push(x)
            self._dfs(len(prefix), maxv, dcount)
        except _BudgetExceeded:
            self.exhausted = True
        finally:
            while self.prefix:
                self._pop()

    def _dfs(self, t: int, maxv: int, dcount: int) -> None:
        n = self.n
        slots = n - t - 1
        for x in range(1, self.cap + 1):
            newmax = x if x > maxv else maxv
            newd = dcount + (0 if self.used[x] else 1)
            if newmax - newd > slots:
                continue
            self._push(x)
            if t + 1 == n:
                c = self.cur
                if c > self.best[newd]:
                    self.best[newd] = c
                    self.bestw[newd] = tuple(self.prefix)
            else:
                bound = self.cur + self.wsum * self.crem[t + 1]
                dlo = max(newmax, 1)
                dhi = min(self.cap, newd + slots)
                floor = min(self.best[d] for d in range(dlo, dhi + 1))
                if bound > floor:
                    self._dfs(t + 1, newmax, newd)
            self._pop()


def _shard_plan(n: int, cap: int) -> List[Tuple[int, ...]]:
    """Fixed list of canonical prefixes of depth min(2, n), lex ordered.
    The plan depends only on (n, cap) so results never depend on the
    worker pool."""
    depth = min(2, n)
    plan: List[Tuple[int, ...]] = []

    def rec(pre: Tuple[int, ...], maxv: int, dcount: int) -> None:
        if len(pre) == depth:
            plan.append(pre)
            return
        t = len(pre)
        slots = n - t - 1
        for x in range(1, cap + 1):
            newmax = x if x > maxv else maxv
            newd = dcount + (0 if x in pre else 1)
            if newmax - newd > slots:
                continue
            rec(pre + (x,), newmax, newd)

    rec((), 0, 0)
    return plan


def _dfs_by_alphabet(
    ps: WeightedPatternSet,
    n: int,
    cap: int,
    budget: Optional[SearchBudget],
    threads: int,
) -> Tuple[Dict[int, Tuple[int, Tuple[int, ...]]], int, bool, int]:
    entries, scale = _normalize_weights(ps)
    m, b = ps.m, ps.b
    total = occurrence_denominator(m, b, n)
    crem = [total - occurrence_denominator(m, b, t) for t in range(n + 1)]
    wsum = sum(w for _, w in entries)
    plan = _shard_plan(n, cap)
    max_nodes = budget.max_nodes if budget else None
    max_seconds = budget.max_seconds if budget else None
    deadline = time.monotonic() + max_seconds if max_seconds is not None else None
    per_shard = None
    if max_nodes is not None:
        per_shard = [max_nodes // len(plan)] * len(plan)
        for i in range(max_nodes % len(plan)):
            per_shard[i] += 1

    def run(idx: int) -> _Shard:
        shard = _Shard(
            entries,
            n,
            cap,
            crem,
            wsum,
            per_shard[idx] if per_shard else None,
            deadline,
        )
        shard.run(plan[idx])
        return shard

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            shards = list(pool.map(run, range(len(plan))))
    else:
        shards = [run(i) for i in range(len(plan))]

    perd: Dict[int, Tuple[int, Tuple[int, ...]]] = {}
    nodes = 0
    exhausted = False
    for shard in shards:  # lex order of the plan keeps witnesses lex-least
        nodes += shard.nodes
        exhausted = exhausted or shard.exhausted
        for d in range(1, cap + 1):
            if shard.best[d] > perd.get(d, (-1, ()))[0]:
                perd[d] = (shard.best[d], shard.bestw[d])
    return perd, nodes, not exhausted, scale


@lru_cache(maxsize=4)
def _canonical_array(n: int, cap: int) -> Tuple[np.ndarray, np.ndarray]:
    """All canonical words as an int8 array in lex order, plus the
    alphabet-support size of each row."""
    rows: List[Tuple[int, ...]] = []
    dcounts: List[int] = []
    for w in enumerate_canonical(n, cap):
        rows.append(w.letters)
        dcounts.append(w.k)
    arr = np.array(rows, dtype=np.int8)
    return arr, np.array(dcounts, dtype=np.int8)


def _count_vector(p: Pattern, words: np.ndarray, cap: int) -> np.ndarray:
    """Occurrence counts of p in every row of words."""
    nwords, n = words.shape
    m, l = p.m, p.l
    out = np.zeros(nwords, dtype=np.int64)
    if m > n:
        return out
    free_gap = [False] + [g in p.hyphens for g in range(1, m)]
    cols = [words[:, i] for i in range(n)]
    for phi in itertools.combinations(range(1, cap + 1), l):
        s = [phi[v - 1] for v in p.letters]
        F = np.zeros((m + 1, nwords), dtype=np.int32)
        F[0] = 1
        A = np.zeros((m + 1, nwords), dtype=np.int32)
        for pos in range(n):
            col = cols[pos]
            newA = np.zeros_like(A)
            for j in range(1, m + 1):
                src = F[j - 1] if (j == 1 or free_gap[j - 1]) else A[j - 1]
                newA[j] = np.where(col == s[j - 1], src, 0)
            F += newA
            A = newA
        out += F[m]
    return out


def _vector_by_alphabet(
    ps: WeightedPatternSet, n: int, cap: int
) -> Tuple[Dict[int, Tuple[int, Tuple[int, ...]]], int, bool, int]:
    entries, scale = _normalize_weights(ps)
    words, dcnt = _canonical_array(n, cap)
    counts = np.zeros(words.shape[0], dtype=np.int64)
    for p, w in entries:
        counts += w * _count_vector(p, words, cap)
    perd: Dict[int, Tuple[int, Tuple[int, ...]]] = {}
    for d in range(1, cap + 1):
        idx = np.flatnonzero(dcnt == d)
        if idx.size == 0:
            continue
        sub = counts[idx]
        pos = idx[int(np.argmax(sub))]  # argmax returns the first, lex-least
        perd[d] = (int(counts[pos]), tuple(int(v) for v in words[pos]))
    return perd, int(words.shape[0]), True, scale


def _as_set(ps: Union[Pattern, WeightedPatternSet]) -> WeightedPatternSet:
    return WeightedPatternSet.single(ps) if isinstance(ps, Pattern) else ps


def max_count_by_alphabet(
    ps: Union[Pattern, WeightedPatternSet],
    n: int,
    budget: Optional[SearchBudget] = None,
    threads: int = 1,
) -> Dict[int, SearchResult]:
    """Maximum weighted count among canonical words of length n using
    exactly d distinct letters, for every d, in one sweep."""
    ps = _as_set(ps)
    cap = n
    if budget is None or not budget.bounded:
        if canonical_count(n, cap) > EXHAUSTIVE_WORD_LIMIT:
            raise ValueError(
                f"exhaustive search over {canonical_count(n, cap)} words; "
                "supply a node budget"
            )
        perd, nodes, exhaustive, scale = _vector_by_alphabet(ps, n, cap)
    else:
        perd, nodes, exhaustive, scale = _dfs_by_alphabet(ps, n, cap, budget, threads)
    denom = occurrence_denominator(ps.m, ps.b, n)
    out = {}
    for d, (c, wl) in sorted(perd.items()):
        if c < 0:
            continue
        cnt = Fraction(c, scale)
        out[d] = SearchResult(
            cnt, denom, cnt / denom, Word(wl, max(wl)), d, n, nodes, exhaustive
        )
    return out


def max_count(
    ps: Union[Pattern, WeightedPatternSet],
    k: int,
    n: int,
    budget: Optional[SearchBudget] = None,
    threads: int = 1,
) -> SearchResult:
    """mu(ps, k, n): maximum weighted occurrence count over words in [k]^n,
    with the lexicographically least canonical maximizer."""
    ps = _as_set(ps)
    if n < ps.m:
        raise ValueError(f"n={n} shorter than pattern length m={ps.m}")
    if k < 1:
        raise ValueError("alphabet size k must be positive")
    cap = min(k, n)
    if budget is None or not budget.bounded:
        if canonical_count(n, cap) > EXHAUSTIVE_WORD_LIMIT:
            raise ValueError(
                f"exhaustive search over {canonical_count(n, cap)} words; "
                "supply a node budget"
            )
        perd, nodes, exhaustive, scale = _vector_by_alphabet(ps, n, cap)
    else:
        perd, nodes, exhaustive, scale = _dfs_by_alphabet(ps, n, cap, budget, threads)
    best: Optional[Tuple[int, Tuple[int, ...]]] = None
    for d in range(1, cap + 1):
        if d in perd and perd[d][0] >= 0:
            c, wl = perd[d]
            if best is None or c > best[0] or (c == best[0] and wl < best[1]):
                best = (c, wl)
    if best is None:
        raise RuntimeError("search explored no complete word")
    denom = occurrence_denominator(ps.m, ps.b, n)
    cnt = Fraction(best[0], scale)
    return SearchResult(
        cnt, denom, cnt / denom, Word(best[1], max(best[1])), k, n, nodes, exhaustive
    )


def delta_exact(
    ps: Union[Pattern, WeightedPatternSet],
    k: int,
    n: int,
    budget: Optional[SearchBudget] = None,
    threads: int = 1,
) -> SearchResult:
    """delta(ps, k, n) = mu / C(n - m + b, b), exact."""
    return max_count(ps, k, n, budget, threads)


@dataclass(frozen=True)
class SeriesRow:
    n: int
    k: int
    count: Fraction
    denom: int
    density: Fraction
    witness: Word


@dataclass(frozen=True)
class SeriesReport:
    """delta(ps, k, n) over a range of n with a monotonicity audit.

    Diagonal series (k policy None) use k = n; densities must then be
    nonincreasing in n.  Fixed-k series must be nonincreasing in n as well;
    violations list (n_prev, n) pairs and should always be empty.
    """

    rows: Tuple[SeriesRow, ...]
    violations: Tuple[Tuple[int, int], ...]


def delta_series(
    ps: Union[Pattern, WeightedPatternSet],
    n_range: Sequence[int],
    k: Optional[int] = None,
    budget: Optional[SearchBudget] = None,
    threads: int = 1,
) -> SeriesReport:
    """Exact density table over n_range (diagonal k=n when k is None)."""
    rows = []
    for n in sorted(n_range):
        k_eff = n if k is None else k
        r = max_count(_as_set(ps), k_eff, n, budget, threads)
        rows.append(SeriesRow(n, k_eff, r.count, r.denom, r.density, r.witness))
    violations = []
    for a, b in zip(rows, rows[1:]):
        if b.density > a.density:
            violations.append((a.n, b.n))
    return SeriesReport(tuple(rows), tuple(violations))


@dataclass(frozen=True)
class PermRestrictionReport:
    """Ties never hurt: over permutation-pattern sets the word maximum is
    attained by a permutation."""

    n: int
    word_max: Fraction
    perm_max: Fraction
    equal: bool
    word_witness: Word
    perm_witness: Word


def _iter_permutations(n: int) -> Iterator[Tuple[int, ...]]:
    yield from itertools.permutations(range(1, n + 1))


def verify_perm_restriction(
    ps: Union[Pattern, WeightedPatternSet], n: int
) -> PermRestrictionReport:
    """Compare the canonical-word maximum with the permutation-only maximum
    for a classical permutation-pattern set."""
    ps = _as_set(ps)
    for p in ps.patterns():
        if not (p.is_permutation and p.is_classical):
            raise ValueError(f"{p} is not a classical permutation pattern")
    word_res = max_count(ps, n, n)
    best = None
    for perm in _iter_permutations(n):
        w = Word(perm, n)
        c = sum((wt * count_generalized(p, w) for p, wt in ps.entries), Fraction(0))
        if best is None or c > best[0]:
            best = (c, w)
    perm_max, perm_witness = best
    return PermRestrictionReport(
        n,
        word_res.count,
        perm_max,
        word_res.count == perm_max,
        word_res.witness,
        perm_witness,
    )


@dataclass(frozen=True)
class TiebreakReport:
    """Sampled check that the tie-breaking map never loses occurrences."""

    n: int
    samples: int
    violations: int


def verify_tiebreak_map(
    ps: Union[Pattern, WeightedPatternSet], n: int, samples: int, seed: int
) -> TiebreakReport:
    """Sample canonical words (flatten of uniform words in [n]^n, fixed
    seed) and check nu(ps, f(w)) >= nu(ps, w)."""
    import random

    ps = _as_set(ps)
    rng = random.Random(seed)
    bad = 0
    for _ in range(samples):
        w = Word(tuple(rng.randint(1, n) for _ in range(n))).canonical()
        before = sum(
            (wt * count_generalized(p, w) for p, wt in ps.entries), Fraction(0)
        )
        after_word = tiebreak_permutation(w)
        after = sum(
            (wt * count_generalized(p, after_word) for p, wt in ps.entries),
            Fraction(0),
        )
        if after < before:
            bad += 1
    return TiebreakReport(n, samples, bad)


@dataclass(frozen=True)
class LayeredWitnessReport:
    """Existence (and when promised, exclusivity) of layered maximizers
    among permutations for a layered permutation-pattern set."""

    n: int
    mu: Fraction
    layered_maximizer_exists: bool
    all_maximizers_layered: Optional[bool]
    maximizers: int


def verify_layered_witness(
    ps: Union[Pattern, WeightedPatternSet], n: int
) -> LayeredWitnessReport:
    """Enumerate S_n, find all maximizers of the weighted count, and check
    layered structure.  When every pattern layer has length > 1 the theory
    promises every maximizer is layered, so all_maximizers_layered is
    reported; otherwise it is None."""
    ps = _as_set(ps)
    shapes = []
    for p in ps.patterns():
        if not (p.is_permutation and p.is_classical):
            raise ValueError(f"{p} is not a classical permutation pattern")
        shape = layered_decompose(p)
        if shape is None:
            raise ValueError(f"{p} is not layered")
        shapes.append(shape)
    promise = all(all(s >= 2 for s in shape.lengths) for shape in shapes)
    best: Fraction = Fraction(-1)
    maximizers: List[Word] = []
    for perm in _iter_permutations(n):
        w = Word(perm, n)
        c = sum((wt * count_generalized(p, w) for p, wt in ps.entries), Fraction(0))
        if c > best:
            best = c
            maximizers = [w]
        elif c == best:
            maximizers.append(w)
    layered_flags = [layered_decompose(Pattern.classical(w.letters)) is not None
                     for w in maximizers]
    return LayeredWitnessReport(
        n,
        best,
        any(layered_flags),
        all(layered_flags) if promise else None,
        len(maximizers),
    )
