"""Asymptotic packing densities of patterns in words.

Every routine here evaluates a closed form or solves a one-dimensional root
problem attached to a specific structural route:

* simple layered shapes: an exact product formula;
* two layers with a singleton: the root of k*a^(k+1) - (k+1)*a + 1;
* ones-block / rise / ones-block patterns: a multinomial closed form, or for
  a single rise the coupled root of (1-s*x)^(s+1) = 1 - (s+1)*x;
* capped layer counts: maximization of the occurrence polynomial over the
  probability simplex by a monotone growth transform with multistart
  certification;
* subword (all-adjacent) patterns: the minimal self-overlap shift M, whose
  reciprocal is the density.

Exact answers are Fractions; solved roots carry explicit error bounds.
The classifier asymptotic_density picks the route from pattern structure
alone and refuses honestly when no route applies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    KIND_MIXED,
    LayeredShape,
    Pattern,
    blocks,
    layered_decompose,
    symmetry_class,
)

Number = Union[Fraction, float]


class DensityRouteError(ValueError):
    """No implemented closed-form route applies to the input."""


@dataclass(frozen=True, eq=False)
class DensityValue:
    """A packing density with its provenance and any auxiliary quantities
    (roots, overlap shifts, layer caps, maximizing proportions)."""

    value: Number
    provenance: str
    error_bound: Optional[float] = None
    aux: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        v = float(self.value)
        slop = 0.0 if isinstance(self.value, Fraction) else 1e-9
        if not (-slop <= v <= 1 + slop):
            raise ValueError(f"density {v} out of [0, 1]")
        if not isinstance(self.value, Fraction) and self.error_bound is None:
            raise ValueError("non-exact density requires an error bound")

    @property
    def exact(self) -> bool:
        return isinstance(self.value, Fraction)

    def as_float(self) -> float:
        return float(self.value)


def simple_layered_density(shape: LayeredShape) -> DensityValue:
    """Exact density of a layered permutation whose shape is simple:
    r + 1 <= 2^(min layer length).  Value m!/m^m * prod m_i^m_i/m_i!."""
    lengths = shape.lengths
    r, m = len(lengths), sum(lengths)
    if r + 1 > 2 ** min(lengths):
        raise DensityRouteError(
            f"simplicity criterion fails for shape {lengths}: "
            f"{r + 1} > 2^{min(lengths)}"
        )
    val = Fraction(factorial(m), m ** m)
    for part in lengths:
        val *= Fraction(part ** part, factorial(part))
    return DensityValue(val, "simple layered product formula", aux={"shape": lengths})


def _k1_polynomial(k: int, a: float) -> float:
    return k * a ** (k + 1) - (k + 1) * a + 1


def _solve_bracketed(f, lo: float, hi: float, fprime=None) -> float:
    """Bisection to near convergence, then a few Newton polish steps."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RuntimeError(f"no sign change on [{lo}, {hi}]")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        if hi - lo < 1e-15:
            break
    x = 0.5 * (lo + hi)
    if fprime is not None:
        for _ in range(5):
            d = fprime(x)
            if d == 0:
                break
            step = f(x) / d
            x -= step
            if abs(step) < 1e-17:
                break
    return x


def k1_density(k: int) -> DensityValue:
    """Density of the pattern made of k equal letters followed by one
    larger letter: k*a*(1-a)^(k-1) at the root a in (0,1) of
    k*a^(k+1) - (k+1)*a + 1 (the root a=1 is always present and excluded)."""
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return DensityValue(Fraction(1), "two increasing letters pack perfectly")
    a = _solve_bracketed(
        lambda x: _k1_polynomial(k, x),
        1e-12,
        1 - 1e-9,
        fprime=lambda x: k * (k + 1) * x ** k - (k + 1),
    )
    residual = abs(_k1_polynomial(k, a))
    if residual > 1e-12:
        raise RuntimeError(f"root residual {residual} too large for k={k}")
    val = k * a * (1 - a) ** (k - 1)
    return DensityValue(
        val,
        "single-rise root formula",
        error_bound=1e-12,
        aux={"a": a, "k": k, "residual": residual},
    )


def r_s_density(r: int, s: int) -> DensityValue:
    """Density of r equal low letters followed by s equal high letters:
    exact C(r+s, r) r^r s^s / (r+s)^(r+s) when r, s >= 2; a single
    low or high letter reroutes to the single-rise formula by symmetry."""
    if r < 1 or s < 1:
        raise ValueError("block lengths must be positive")
    if s == 1:
        return k1_density(r)
    if r == 1:
        dv = k1_density(s)
        return DensityValue(
            dv.value,
            "single-rise root formula (after reversal and complement)",
            error_bound=dv.error_bound,
            aux=dv.aux,
        )
    val = Fraction(comb(r + s, r) * r ** r * s ** s, (r + s) ** (r + s))
    return DensityValue(val, "two-block binomial formula", aux={"r": r, "s": s})


def alpha_root(s: int) -> Tuple[float, float]:
    """The nonzero root alpha in (0, 1/s) of (1-s*x)^(s+1) = 1-(s+1)*x,
    together with a = 1 - s*alpha, which equals the single-rise root for
    k = s."""
    if s < 2:
        raise ValueError("s must be at least 2")

    def g(x: float) -> float:
        return (1 - s * x) ** (s + 1) - 1 + (s + 1) * x

    def gprime(x: float) -> float:
        return -s * (s + 1) * (1 - s * x) ** s + (s + 1)

    alpha = _solve_bracketed(g, 1e-9, 1.0 / s - 1e-12, fprime=gprime)
    residual = abs(g(alpha))
    assert residual <= 1e-14, (s, residual)
    return alpha, 1 - s * alpha


def pqr_density(p: int, q: int, r: int) -> DensityValue:
    """Density of p low letters, r high letters, then q more low letters.

    For r >= 2 the value is the exact multinomial closed form
    multinomial(p+q+r; p, q, r) * p^p q^q r^r / (p+q+r)^(p+q+r).
    For r = 1 it is the two-block prefactor C(p+q, p) p^p q^q / (p+q)^(p+q)
    times the single-rise density at k = p + q; p = 0 or q = 0 is allowed
    in that route (but not both).
    """
    if r < 1 or p < 0 or q < 0:
        raise ValueError("need r >= 1 and p, q >= 0")
    if p == 0 and q == 0:
        raise ValueError("p and q cannot both vanish (constant pattern)")
    if r >= 2:
        if p < 1 or q < 1:
            raise DensityRouteError(
                "zero-length outer block with r >= 2 is a two-block shape, "
                "not this route"
            )
        m = p + q + r
        multinom = factorial(m) // (factorial(p) * factorial(q) * factorial(r))
        val = Fraction(multinom * p ** p * q ** q * r ** r, m ** m)
        return DensityValue(
            val, "three-block multinomial formula", aux={"p": p, "q": q, "r": r}
        )
    s = p + q
    prefactor = Fraction(comb(s, p) * p ** p * q ** q, s ** s)
    if s == 1:
        return DensityValue(Fraction(1), "two increasing letters pack perfectly")
    base = k1_density(s)
    alpha, a = alpha_root(s)
    val = float(prefactor) * float(base.value)
    return DensityValue(
        val,
        "split single-rise formula",
        error_bound=1e-10,
        aux={"alpha": alpha, "a": a, "s": s, "prefactor": prefactor},
    )


def _subset_index_arrays(ell: int, r: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(ell), r)), dtype=np.int64)


def _cap_objective(
    probs: np.ndarray, subsets: np.ndarray, exponents: np.ndarray, multinom: int
) -> float:
    terms = np.prod(probs[subsets] ** exponents, axis=1)
    return multinom * float(terms.sum())


def _cap_gradient(
    probs: np.ndarray, subsets: np.ndarray, exponents: np.ndarray, multinom: int
) -> np.ndarray:
    terms = np.prod(probs[subsets] ** exponents, axis=1)
    grad = np.zeros_like(probs)
    for slot in range(subsets.shape[1]):
        idx = subsets[:, slot]
        with np.errstate(divide="ignore", invalid="ignore"):
            contrib = np.where(
                probs[idx] > 0, exponents[slot] * terms / probs[idx], 0.0
            )
        np.add.at(grad, idx, contrib)
    return multinom * grad


def layered_density_cap(
    shape: LayeredShape, ell: int, starts: int = 64, seed: int = 12345
) -> DensityValue:
    """Packing density with the alphabet capped at ell layers: the maximum
    over the ell-simplex of the occurrence polynomial

        F(p) = multinomial(m; m_1..m_r) * sum_{j_1<...<j_r} prod p_{j_i}^{m_i}.

    Maximized with the growth transform p_j <- p_j dF_j / (m F), which is
    monotone for polynomials with nonnegative coefficients, from a fixed
    family of starts; certified when at least two independent starts agree
    to 1e-11."""
    lengths = shape.lengths
    r, m = len(lengths), sum(lengths)
    if ell < r:
        raise ValueError(f"need at least r={r} layers, got ell={ell}")
    subsets = _subset_index_arrays(ell, r)
    exponents = np.array(lengths, dtype=np.float64)
    multinom = factorial(m)
    for part in lengths:
        multinom //= factorial(part)

    rng = np.random.default_rng(seed)
    start_list: List[np.ndarray] = [np.full(ell, 1.0 / ell)]
    spike = np.full(ell, 1e-3)
    spike[:r] += 1.0
    start_list.append(spike / spike.sum())
    weighted = np.full(ell, 1e-3)
    weighted[:r] += np.array(lengths, dtype=np.float64)
    start_list.append(weighted / weighted.sum())
    for _ in range(starts):
        start_list.append(rng.dirichlet(np.ones(ell)))

    def objective(probs: np.ndarray) -> float:
        return _cap_objective(probs, subsets, exponents, multinom)

    def step(probs: np.ndarray, fval: float) -> np.ndarray:
        grad = _cap_gradient(probs, subsets, exponents, multinom)
        nxt = probs * grad / (m * fval)
        nxt = np.clip(nxt, 1e-300, None)
        return nxt / nxt.sum()

    def support_newton(
        probs: np.ndarray, support: np.ndarray
    ) -> Optional[np.ndarray]:
        """Equal-partials refinement on a fixed support: at a maximum
        interior to the support's face all active partials coincide, so
        solve grad_a = grad_last with the last coordinate eliminated.
        Returns the refined point or None when the solve fails."""
        if support.size < 2:
            return None
        last = support[-1]
        head = support[:-1]

        def residual(x: np.ndarray) -> np.ndarray:
            full = np.zeros(ell)
            full[head] = x
            full[last] = 1.0 - x.sum()
            g = _cap_gradient(full, subsets, exponents, multinom)
            return g[head] - g[last]

        sub = np.clip(probs[support], 1e-6, None)
        sub = sub / sub.sum()
        x = sub[:-1].copy()
        tol = 1e-12 * max(multinom, 1)
        converged = False
        for _ in range(60):
            r0 = residual(x)
            if np.max(np.abs(r0)) < tol:
                converged = True
                break
            jac = np.empty((head.size, head.size))
            h = 1e-7
            for col in range(head.size):
                xp = x.copy()
                xp[col] += h
                xm = x.copy()
                xm[col] -= h
                jac[:, col] = (residual(xp) - residual(xm)) / (2 * h)
            try:
                delta = np.linalg.solve(jac, r0)
            except np.linalg.LinAlgError:
                return None
            t = 1.0
            moved = False
            for _ in range(40):
                xn = x - t * delta
                if xn.min() > 0 and xn.sum() < 1:
                    x = xn
                    moved = True
                    break
                t *= 0.5
            if not moved:
                break
        if not converged and np.max(np.abs(residual(x))) >= 100 * tol:
            return None
        full = np.zeros(ell)
        full[head] = x
        full[last] = 1.0 - x.sum()
        return full

    def refine(probs: np.ndarray, fval: float) -> Tuple[float, np.ndarray]:
        """Newton-refine over every nested candidate support (largest
        masses first); keep whatever scores best."""
        best_f, best_x = fval, probs
        order = np.argsort(-probs)
        for size in range(r, ell + 1):
            support = np.sort(order[:size])
            refined = support_newton(probs, support)
            if refined is None:
                continue
            frefined = objective(refined)
            if frefined > best_f:
                best_f, best_x = frefined, refined
        return best_f, best_x

    results: List[Tuple[float, np.ndarray]] = []
    for p0 in start_list:
        probs = np.clip(p0, 1e-12, None)
        probs = probs / probs.sum()
        fval = objective(probs)
        for _ in range(3000):
            # two plain growth steps, then a safeguarded extrapolation
            # (the plain map converges linearly; the extrapolated point
            # is kept only when it does not lose ground)
            x1 = step(probs, fval)
            f1 = objective(x1)
            x2 = step(x1, f1)
            f2 = objective(x2)
            move = x1 - probs
            curv = (x2 - x1) - move
            denom = float(curv @ curv)
            fnext, xnext = f2, x2
            if denom > 0:
                alpha = -np.sqrt(float(move @ move) / denom)
                cand = probs - 2 * alpha * move + alpha * alpha * curv
                cand = np.clip(cand, 1e-300, None)
                cand = cand / cand.sum()
                fcand = objective(cand)
                if fcand > f2:
                    fnext, xnext = fcand, cand
            if fnext - fval <= 1e-17 * max(fval, 1e-30):
                if fnext > fval:
                    fval, probs = fnext, xnext
                break
            fval, probs = fnext, xnext
        results.append((fval, probs))

    results.sort(key=lambda t: -t[0])
    results = [refine(probs, fval) for fval, probs in results[:8]] + results[8:]
    results.sort(key=lambda t: -t[0])
    best, best_p = results[0]
    agreeing = sum(1 for v, _ in results if best - v <= 1e-11)
    if agreeing < 2:
        raise RuntimeError(
            f"multistart disagreement: best {best}, runner-up "
            f"{results[1][0] if len(results) > 1 else None}"
        )
    grad = _cap_gradient(best_p, subsets, exponents, multinom)
    support = best_p > 1e-7
    kkt = float(np.max(np.abs(grad[support] / (m * best) - 1.0)))
    return DensityValue(
        min(best, 1.0),
        "simplex cap via growth transform (multistart certified)",
        error_bound=1e-9,
        aux={
            "ell": ell,
            "shape": lengths,
            "proportions": tuple(float(x) for x in best_p),
            "agreeing_starts": agreeing,
            "kkt_residual": kkt,
        },
    )


def _monotone_counterpart(lengths: Sequence[int]) -> Pattern:
    letters = []
    for i, a in enumerate(lengths, start=1):
        letters.extend([i] * a)
    return Pattern(tuple(letters), frozenset())


def _overlap_formula(multiplicities: Sequence[int]) -> int:
    """Minimal self-overlap shift of the monotone nondecreasing subword
    pattern with the given block multiplicities a_1..a_l."""
    a = tuple(multiplicities)
    l = len(a)
    if l < 2:
        raise ValueError("constant patterns have no overlap formula")
    for j in range(1, l - 1):
        if (
            a[0] <= a[j]
            and all(a[i - 1] == a[i + j - 1] for i in range(2, l - j))
            and a[l - j - 1] >= a[l - 1]
        ):
            return sum(a[1 : j + 1])
    return max(a[0], a[l - 1]) + sum(a[1 : l - 1])


def _overlap_consistent(letters: Tuple[int, ...], s: int) -> bool:
    """Can some word of length m+s have both its length-m prefix and its
    length-m suffix flatten to the given letters?  Union equal pairs, then
    check the strict-inequality graph on classes is acyclic."""
    m = len(letters)
    total = m + s
    parent = list(range(total))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    pairs = list(itertools.combinations(range(m), 2))
    for i, j in pairs:
        if letters[i] == letters[j]:
            union(i, j)
            union(i + s, j + s)
    edges = set()
    for i, j in pairs:
        if letters[i] < letters[j]:
            edges.add((i, j))
            edges.add((i + s, j + s))
        elif letters[i] > letters[j]:
            edges.add((j, i))
            edges.add((j + s, i + s))
    graph: Dict[int, List[int]] = {}
    for x, y in edges:
        rx, ry = find(x), find(y)
        if rx == ry:
            return False
        graph.setdefault(rx, []).append(ry)
    color: Dict[int, int] = {}

    def has_cycle(v: int) -> bool:
        color[v] = 1
        for w in graph.get(v, ()):
            c = color.get(w, 0)
            if c == 1:
                return True
            if c == 0 and has_cycle(w):
                return True
        color[v] = 2
        return False

    return not any(color.get(v, 0) == 0 and has_cycle(v) for v in list(graph))


def _overlap_oracle(letters: Tuple[int, ...]) -> int:
    for s in range(1, len(letters) + 1):
        if _overlap_consistent(letters, s):
            return s
    raise AssertionError("shift m always overlaps")  # pragma: no cover


def m_overlap(p: Pattern) -> Tuple[Optional[int], int]:
    """Minimal self-overlap shift of a subword pattern: (formula, oracle).

    The formula route applies to monotone nondecreasing nonconstant
    patterns; elsewhere it is None.  The oracle searches shifts directly
    and is authoritative.  The packing density of the pattern is 1/shift.
    """
    if not p.is_subword:
        raise ValueError("overlap shifts are defined for subword patterns")
    if p.is_constant:
        raise ValueError("constant patterns are handled upstream (density 1)")
    formula: Optional[int] = None
    if all(x <= y for x, y in zip(p.letters, p.letters[1:])):
        formula = _overlap_formula(blocks(p))
    return formula, _overlap_oracle(p.letters)


def gen_layered_density(p: Pattern) -> DensityValue:
    """Density of a layered subword pattern: reduce each layer to a block
    of equal letters and take 1/shift of the monotone counterpart."""
    if not p.is_subword:
        raise ValueError("this route handles subword patterns")
    shape = layered_decompose(p)
    if shape is None:
        raise DensityRouteError(f"{p} is not layered; no closed form is known")
    if KIND_MIXED in shape.kinds:
        raise DensityRouteError(
            f"{p} has a layer that mixes ties and descents; no closed form"
        )
    if shape.r == 1:
        return DensityValue(
            Fraction(1),
            "single-layer subword packs perfectly",
            aux={"shift": 1, "shape": shape.lengths},
        )
    counterpart = _monotone_counterpart(shape.lengths)
    formula, oracle = m_overlap(counterpart)
    if formula is not None and formula != oracle:
        raise AssertionError(
            f"overlap formula {formula} != oracle {oracle} for {counterpart}"
        )
    return DensityValue(
        Fraction(1, oracle),
        "layer-to-block reduction, reciprocal overlap shift",
        aux={"shift": oracle, "shape": shape.lengths},
    )


#: shapes whose density is imported from the permutation-packing literature
#: (two adjacent singleton layers merge with the doubled layer's behavior)
_IMPORTED_SHAPES: Dict[Tuple[int, ...], Fraction] = {
    (1, 1, 2): Fraction(3, 8),
    (2, 1, 1): Fraction(3, 8),
}


def _classical_layered_route(shape: LayeredShape) -> DensityValue:
    lengths = shape.lengths
    r = len(lengths)
    if all(a == 1 for a in lengths):
        return DensityValue(
            Fraction(1), "monotone pattern packs perfectly", aux={"shape": lengths}
        )
    if r == 1:
        return DensityValue(
            Fraction(1), "single-layer pattern packs perfectly", aux={"shape": lengths}
        )
    if r == 2 and lengths[1] == 1:
        dv = k1_density(lengths[0])
        return DensityValue(
            dv.value, dv.provenance, dv.error_bound, dict(dv.aux, shape=lengths)
        )
    if r == 2 and lengths[0] == 1:
        dv = k1_density(lengths[1])
        return DensityValue(
            dv.value,
            "single-rise root formula (after reversal)",
            dv.error_bound,
            dict(dv.aux, shape=lengths),
        )
    if r + 1 <= 2 ** min(lengths):
        dv = simple_layered_density(shape)
        return dv
    if lengths in _IMPORTED_SHAPES:
        return DensityValue(
            _IMPORTED_SHAPES[lengths],
            "merged-singleton reduction (literature value)",
            aux={"shape": lengths},
        )
    raise DensityRouteError(
        f"no closed-form route for layered shape {lengths}; "
        "layered_density_cap gives certified lower bounds"
    )


def _pqr_shape(letters: Tuple[int, ...]) -> Optional[Tuple[int, int, int]]:
    """Match 1^p 2^r 1^q with p, q >= 1 and r >= 1."""
    m = len(letters)
    if set(letters) != {1, 2}:
        return None
    p = 0
    while p < m and letters[p] == 1:
        p += 1
    r = 0
    while p + r < m and letters[p + r] == 2:
        r += 1
    q = m - p - r
    if p >= 1 and r >= 1 and q >= 1 and all(v == 1 for v in letters[p + r :]):
        return p, q, r
    return None


def asymptotic_density(p: Pattern) -> DensityValue:
    """Classify the pattern and evaluate its asymptotic packing density by
    the applicable closed-form route; raises DensityRouteError when no
    route is known (e.g. partially hyphenated patterns)."""
    if p.is_constant:
        return DensityValue(Fraction(1), "constant pattern packs perfectly")
    if p.is_subword:
        return gen_layered_density(p)
    if not p.is_classical:
        raise DensityRouteError(
            f"no closed-form route for partially hyphenated {p}; "
            "finite search gives exact values at each (k, n)"
        )
    candidates = symmetry_class(p, include_inverse=p.is_permutation)
    for q in candidates:
        shape = layered_decompose(q)
        if shape is not None and KIND_MIXED not in shape.kinds:
            try:
                return _classical_layered_route(shape)
            except DensityRouteError:
                pass
    for q in candidates:
        pqr = _pqr_shape(q.letters)
        if pqr is not None:
            return pqr_density(*pqr)
    raise DensityRouteError(f"no closed-form route known for {p}")


def three_letter_table() -> Dict[str, DensityValue]:
    """Density of every three-letter classical pattern, one row per
    symmetry-class representative."""
    two_rise = k1_density(2)
    return {
        "111": DensityValue(Fraction(1), "constant pattern packs perfectly"),
        "112": two_rise,
        "121": pqr_density(1, 1, 1),
        "123": DensityValue(Fraction(1), "monotone pattern packs perfectly"),
        "132": DensityValue(
            two_rise.value,
            "single-rise root formula (after layer reduction)",
            two_rise.error_bound,
            dict(two_rise.aux),
        ),
    }
