"""Universality checking and shortest-superpattern search.

A word is universal for (l, m) when it classically contains every pattern
of length m on at most l distinct letters.  ``shortest_superpattern`` finds
the least length admitting a universal word by iterative deepening: each
candidate length is searched exhaustively by a DFS over words in
first-occurrence-canonical form (each new letter value appears in
increasing order), in lexicographic order, so the first witness found is
the lexicographically least one.

The restriction to first-occurrence-canonical words is lossless: the
universe is the set of all patterns, so relabeling a universal word to its
first-occurrence form preserves universality, and the relabeled form is
never lexicographically larger.  This was verified exhaustively for every
(l, m, length) this module can certify.

Pruning is admissible on two counts: a missing pattern whose longest
contained prefix leaves more letters to place than remain kills the
branch, and so does having more missing patterns than the number of
position subsets that touch the unwritten suffix.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

from .core import Pattern, Word, flatten
from .construct import superpattern_word
from .search import SearchBudget, enumerate_canonical

__all__ = [
    "UniverseSpec",
    "SuperResult",
    "LengthVerdict",
    "pattern_universe",
    "is_universal",
    "shortest_superpattern",
]


@dataclass(frozen=True)
class UniverseSpec:
    """All patterns of length m on at most l distinct letters."""

    l: int
    m: int
    patterns: Tuple[Pattern, ...]

    @property
    def size(self) -> int:
        return len(self.patterns)


@dataclass(frozen=True)
class LengthVerdict:
    """Outcome of the exhaustive search at one candidate length."""

    length: int
    verdict: str  # "exhausted" | "witness" | "inconclusive"
    nodes: int


@dataclass(frozen=True)
class SuperResult:
    """Shortest universal word, or best-known bounds under a budget.

    ``length`` is exact when ``lower_bound_certified``; otherwise it is the
    best upper bound and ``lower_bound`` the best certified lower bound.
    """

    l: int
    m: int
    length: int
    witness: Word
    lower_bound: int
    lower_bound_certified: bool
    nodes: int
    log: Tuple[LengthVerdict, ...]


@lru_cache(maxsize=None)
def _universe_cached(l: int, m: int) -> UniverseSpec:
    patterns = tuple(
        Pattern.classical(w.letters) for w in enumerate_canonical(m, l)
    )
    return UniverseSpec(l, m, patterns)


def pattern_universe(l: int, m: int) -> UniverseSpec:
    """The universe for (l, m), reduced to (m, m) when m <= l.

    A length-m pattern uses at most m distinct letters, so alphabets wider
    than m add nothing and the shortest-superpattern question coincides
    with the (m, m) one.
    """
    if l < 1 or m < 1:
        raise ValueError(f"need l, m >= 1, got l={l}, m={m}")
    return _universe_cached(min(l, m), m)


def is_universal(w: Word, l: int, m: int) -> Tuple[bool, Tuple[Pattern, ...]]:
    """Whether w classically contains every (l, m) pattern; missing list exact."""
    spec = pattern_universe(l, m)
    found = set()
    target = spec.size
    for combo in combinations(w.letters, m):
        f = flatten(combo)
        if max(f) <= spec.l:
            found.add(f)
            if len(found) == target:
                return True, ()
    missing = tuple(p for p in spec.patterns if p.letters not in found)
    return not missing, missing


class _MatchTracker:
    """Partial-match states of one classical pattern along a DFS prefix.

    A state (j, phi) means some subsequence of the prefix realizes the
    first j pattern letters with phi the partial map from pattern values
    to word values.  Classical patterns have no adjacency constraints, so
    states persist; pushes only add.  ``mm`` is the high-water mark of j,
    i.e. the longest pattern prefix contained so far, and mm == m means
    the full pattern is contained.
    """

    __slots__ = ("m", "steps", "states", "mm")

    def __init__(self, p: Pattern) -> None:
        self.m = p.m
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
        self.states = {(0, (0,) * p.l)}
        self.mm = 0

    def push(self, x: int) -> Tuple[List[Tuple[int, Tuple[int, ...]]], int]:
        added = []
        old_mm = self.mm
        m = self.m
        best = old_mm
        for j, phi in self.states:
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
            if j2 > best:
                best = j2
            if j2 < m:
                st = (j2, phi2)
                if st not in self.states:
                    added.append(st)
        if added:
            self.states.update(added)
        self.mm = best
        return added, old_mm

    def pop(self, undo: Tuple[List[Tuple[int, Tuple[int, ...]]], int]) -> None:
        added, old_mm = undo
        for st in added:
            self.states.discard(st)
        self.mm = old_mm


class _BudgetExhausted(Exception):
    pass


class _ShardOutcome(NamedTuple):
    witness: Optional[Tuple[int, ...]]
    spent: int
    hit_budget: bool


class _LengthSearch:
    """Exhaustive DFS for a universal word of one fixed length, split into
    independent root shards so shards can run concurrently without changing
    any result field."""

    def __init__(self, spec: UniverseSpec, length: int):
        self.spec = spec
        self.length = length
        self.comb_row = [comb(t, spec.m) for t in range(length + 1)]
        self.total_sets = comb(length, spec.m)

    def shards(self, reverse: bool) -> List[Tuple[int, ...]]:
        """Root prefixes covering the first-occurrence-canonical space, in
        lexicographic order (reversed only for independent re-verification)."""
        if self.length < 2 or self.spec.l == 1:
            return [()]
        out = [(1, 1), (1, 2)]
        return out[::-1] if reverse else out

    def search_shard(
        self,
        shard: Tuple[int, ...],
        allowance: Optional[int],
        deadline: Optional[float],
    ) -> _ShardOutcome:
        """Exhaust one root shard; all state is local so shards may run in
        parallel.  The witness, if any, is the lexicographically least word
        in the shard (found first because the DFS is lex-ordered and the
        prunes are admissible)."""
        spec = self.spec
        trackers = [_MatchTracker(p) for p in spec.patterns]
        missing = spec.size
        prefix: List[int] = []
        nodes = 0
        witness: Optional[Tuple[int, ...]] = None

        def push(x: int) -> List[Tuple[int, object]]:
            nonlocal missing, nodes
            if (
                deadline is not None
                and (nodes & 1023) == 0
                and time.monotonic() > deadline
            ):
                raise _BudgetExhausted
            nodes += 1
            if allowance is not None and nodes > allowance:
                nodes -= 1
                raise _BudgetExhausted
            undos = []
            done = 0
            for idx, tr in enumerate(trackers):
                if tr.mm == tr.m:
                    continue
                undo = tr.push(x)
                undos.append((idx, undo))
                if tr.mm == tr.m:
                    done += 1
            missing -= done
            prefix.append(x)
            return undos

        def pop(undos: List[Tuple[int, object]]) -> None:
            nonlocal missing
            prefix.pop()
            done = 0
            for idx, undo in undos:
                tr = trackers[idx]
                was_done = tr.mm == tr.m
                tr.pop(undo)
                if was_done and tr.mm < tr.m:
                    done += 1
            missing += done

        def dfs(t: int, maxval: int) -> bool:
            nonlocal witness
            if missing == 0:
                witness = tuple(prefix) + (1,) * (self.length - t)
                return True
            rem = self.length - t
            if rem == 0:
                return False
            if missing > self.total_sets - self.comb_row[t]:
                return False
            need = 0
            for tr in trackers:
                lack = tr.m - tr.mm
                if lack > need:
                    need = lack
            if need > rem:
                return False
            top = min(maxval + 1, spec.l)
            for x in range(1, top + 1):
                undos = push(x)
                try:
                    if dfs(t + 1, maxval if x <= maxval else x):
                        return True
                finally:
                    pop(undos)
            return False

        hit = False
        try:
            maxval = 0
            ok = True
            for x in shard:
                if x > min(maxval + 1, spec.l):
                    ok = False
                    break
                push(x)
                maxval = max(maxval, x)
            if ok:
                dfs(len(shard), maxval)
        except _BudgetExhausted:
            hit = True
        return _ShardOutcome(witness, nodes, hit)


def shortest_superpattern(
    l: int,
    m: int,
    budget: Optional[Union[SearchBudget, int]] = None,
    reverse_shards: bool = False,
    threads: int = 1,
) -> SuperResult:
    """Least length of a universal word for (l, m), by iterative deepening.

    Starts from the counting lower bound (C(L, m) must reach the universe
    size) and searches each length exhaustively until a witness appears;
    the witness is then lexicographically least and the length exact.  If
    the budget runs out first, the result carries the constructive upper
    bound l(m-1)+1, the largest certified lower bound, and
    ``lower_bound_certified`` False.  ``reverse_shards`` reorders the root
    shards for independent re-verification of exhausted lengths.

    A node budget is apportioned over each length's shards by a fixed
    rule and shard outcomes merge in shard order, so every result field,
    including per-length node counts in the log, is identical whatever
    ``threads`` is; only ``nodes`` (total work actually executed) may
    grow when parallel shards outrun an early witness.  Under a budget
    the witness is the least in the explored region: if an earlier shard
    was cut short, minimality of the witness is not certified (the length
    still is).  Wall-clock budgets make results run-dependent.
    """
    spec = pattern_universe(l, m)
    upper = superpattern_word(spec.l, m)
    assert is_universal(upper.word, spec.l, m)[0], "constructive word must be universal"
    if isinstance(budget, int):
        budget = SearchBudget(max_nodes=budget)
    remaining = budget.max_nodes if budget else None
    max_seconds = budget.max_seconds if budget else None
    deadline = time.monotonic() + max_seconds if max_seconds is not None else None

    lower = spec.m
    while comb(lower, spec.m) < spec.size:
        lower += 1

    log: List[LengthVerdict] = []
    executed = 0
    witness: Optional[Word] = None
    found_length: Optional[int] = None
    certified = True
    length = lower
    pool = None
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        pool = ThreadPoolExecutor(max_workers=threads)
    try:
        while length <= upper.word.n:
            search = _LengthSearch(spec, length)
            shards = search.shards(reverse_shards)
            if remaining is not None:
                base, extra = divmod(remaining, len(shards))
                allowances = [
                    base + (1 if i < extra else 0) for i in range(len(shards))
                ]
            else:
                allowances = [None] * len(shards)
            outcomes: List[_ShardOutcome]
            if pool is not None and len(shards) > 1:
                outcomes = list(
                    pool.map(
                        lambda i: search.search_shard(
                            shards[i], allowances[i], deadline
                        ),
                        range(len(shards)),
                    )
                )
            else:
                outcomes = []
                for i, shard in enumerate(shards):
                    oc = search.search_shard(shard, allowances[i], deadline)
                    outcomes.append(oc)
                    if oc.witness is not None:
                        break  # a found witness cancels the remaining shards
            executed += sum(oc.spent for oc in outcomes)
            spent = 0
            chosen: Optional[Tuple[int, ...]] = None
            hit = False
            for oc in outcomes:  # merge in shard order: results thread-free
                spent += oc.spent
                if oc.witness is not None:
                    chosen = oc.witness
                    break
                hit = hit or oc.hit_budget
            if chosen is not None:
                log.append(LengthVerdict(length, "witness", spent))
                witness = Word(chosen)
                found_length = length
                break
            if hit:
                log.append(LengthVerdict(length, "inconclusive", spent))
                certified = False
                break
            log.append(LengthVerdict(length, "exhausted", spent))
            lower = length + 1
            if remaining is not None:
                remaining -= spent
            length += 1
    finally:
        if pool is not None:
            pool.shutdown()

    if witness is None:
        witness = upper.word
        found_length = upper.word.n
        certified = certified and lower >= found_length
    flag, missing = is_universal(witness, spec.l, m)
    assert flag, f"witness failed re-verification; missing {missing}"
    return SuperResult(
        l=spec.l,
        m=spec.m,
        length=found_length,
        witness=witness,
        lower_bound=min(lower, found_length),
        lower_bound_certified=certified,
        nodes=executed,
        log=tuple(log),
    )
