"""Command-line surface unifying counting, search, densities, constructions
and superpattern search, with machine-readable output.

JSON output is a versioned envelope {"schema", "command", "config",
"result", "stats"} serialized with sorted keys, so identical configurations
produce byte-identical output.  Exact rationals appear as {"num", "den",
"decimal"}; CSV uses the decimal rendering only.  Node counters live only
in the stats object, which is excluded from the determinism contract: every
result field is identical whatever the thread count.

Exit codes: 0 success; 1 usage error; 2 budget exhausted (results still
emitted); 3 internal invariant failure (always a bug).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .core import (
    ParseError,
    Pattern,
    Word,
    format_pattern,
    format_word,
    layered_decompose,
    parse_pattern,
    parse_word,
    symmetry_class,
)
from .count import density as exact_density
from .density import (
    DensityRouteError,
    DensityValue,
    asymptotic_density,
    gen_layered_density,
    k1_density,
    layered_density_cap,
    m_overlap,
    pqr_density,
    r_s_density,
    simple_layered_density,
    three_letter_table,
)
from .construct import (
    Construction,
    balanced_monotone_word,
    layered_word,
    nested_word,
    pqr_word,
    sqrt_layer_perm,
    superpattern_word,
    twelve_one_word,
)
from .search import (
    SearchBudget,
    max_count,
    verify_layered_witness,
    verify_perm_restriction,
    verify_tiebreak_map,
)
from .superpattern import is_universal, pattern_universe, shortest_superpattern

__all__ = ["RunConfig", "run", "main"]

SCHEMA = "wordpack/1"
THREADS_ENV = "WORDPACK_THREADS"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_INTERNAL = 3

_ROUTES = (
    "auto",
    "constant",
    "simple-product",
    "single-rise",
    "two-block",
    "three-block",
    "subword-overlap",
    "cap",
)

_BUILDERS = (
    "balanced",
    "pqr",
    "nested",
    "layered",
    "super-word",
    "twelve-one",
    "sqrt-layers",
)

_SUITES = ("monotonicity", "restriction", "layered-witness", "overlap-formula")


@dataclass(frozen=True)
class RunConfig:
    """One fully resolved invocation; identical configs yield byte-identical
    JSON output (the stats object is outside that contract)."""

    subcommand: str
    pattern: Optional[str] = None
    word: Optional[str] = None
    k: Optional[int] = None
    n: Optional[int] = None
    n_range: Optional[str] = None
    l: Optional[int] = None
    m: Optional[int] = None
    p: Optional[int] = None
    q: Optional[int] = None
    r: Optional[int] = None
    s: Optional[int] = None
    depth: Optional[int] = None
    d: Optional[int] = None
    ident: int = 2
    proportions: Optional[str] = None
    mode: str = "permutation"
    builder: Optional[str] = None
    emit: str = "json"
    route: str = "auto"
    ell: Optional[int] = None
    starts: int = 64
    budget_nodes: Optional[int] = None
    budget_seconds: Optional[float] = None
    threads: Optional[int] = None
    format: str = "table"
    seed: int = 12345
    suite: str = "all"


class UsageError(ValueError):
    """Bad flag combination or unparsable input; maps to exit code 1."""


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    values = {k: v for k, v in vars(args).items() if k in known}
    return RunConfig(**values)


def _resolve_threads(config: RunConfig) -> int:
    if config.threads is not None:
        if config.threads < 1:
            raise UsageError("--threads must be a positive integer")
        return config.threads
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV}={raw!r} is not an integer")
    if value < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer")
    return value


def _budget(config: RunConfig) -> Optional[SearchBudget]:
    if config.budget_nodes is None and config.budget_seconds is None:
        return None
    if config.budget_nodes is not None and config.budget_nodes < 1:
        raise UsageError("--budget-nodes must be a positive integer")
    if config.budget_seconds is not None and config.budget_seconds <= 0:
        raise UsageError("--budget-seconds must be positive")
    return SearchBudget(
        max_nodes=config.budget_nodes, max_seconds=config.budget_seconds
    )


def _parse_n_range(text: str) -> Tuple[int, int]:
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError(f"--n-range takes A:B, got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"--n-range takes integers A:B, got {text!r}")
    if lo > hi:
        raise UsageError(f"--n-range needs A <= B, got {text!r}")
    return lo, hi


# ---------------------------------------------------------------------------
# rendering


def _rational(x: Fraction) -> Dict[str, object]:
    return {"num": x.numerator, "den": x.denominator, "decimal": float(x)}


def _value_obj(v: object) -> Dict[str, object]:
    if isinstance(v, Fraction):
        return _rational(v)
    return {"decimal": float(v)}


def _jsonsafe(obj: object) -> object:
    if isinstance(obj, Fraction):
        return _rational(obj)
    if isinstance(obj, Pattern):
        return format_pattern(obj)
    if isinstance(obj, Word):
        return format_word(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonsafe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonsafe(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if hasattr(obj, "item"):  # numpy scalars
        return _jsonsafe(obj.item())
    return str(obj)


def _frac_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class _Report:
    """Collects one command's output in every format at once."""

    def __init__(self) -> None:
        self.result: Dict[str, object] = {}
        self.stats: Dict[str, object] = {}
        self.table: List[Tuple[str, str]] = []
        self.csv_columns: Optional[List[str]] = None
        self.csv_rows: Optional[List[List[object]]] = None

    def row(self, key: str, value: object) -> None:
        self.table.append((key, str(value)))


def _emit(config: RunConfig, report: _Report, stream=None) -> None:
    out = stream or sys.stdout
    if config.format == "json":
        envelope = {
            "schema": SCHEMA,
            "command": config.subcommand,
            "config": _jsonsafe(asdict(config)),
            "result": _jsonsafe(report.result),
            "stats": _jsonsafe(report.stats),
        }
        out.write(json.dumps(envelope, sort_keys=True, indent=2) + "\n")
    elif config.format == "csv":
        if report.csv_columns is None or report.csv_rows is None:
            raise UsageError(
                f"subcommand {config.subcommand!r} has no tabular form; "
                "use --format json or table"
            )
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(report.csv_columns)
        for row in report.csv_rows:
            writer.writerow(row)
    else:
        width = max((len(k) for k, _ in report.table), default=0)
        for key, value in report.table:
            out.write(f"{key.ljust(width)}  {value}".rstrip() + "\n")


def _bool_text(v: bool) -> str:
    return "true" if v else "false"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_count(config: RunConfig) -> Tuple[int, _Report]:
    if config.pattern is None or config.word is None:
        raise UsageError("count requires -p/--pattern and -w/--word")
    p = parse_pattern(config.pattern)
    w = parse_word(config.word, config.k or 0)
    rep = exact_density(p, w)
    delta = rep.density
    count = rep.count
    if isinstance(count, Fraction) and count.denominator == 1:
        count = int(count)
    report = _Report()
    report.result = {
        "pattern": format_pattern(p),
        "word": format_word(w),
        "k": w.k,
        "count": count if isinstance(count, int) else _rational(count),
        "denominator": rep.denom,
        "delta": _rational(delta),
    }
    report.row("pattern", format_pattern(p))
    report.row("word", format_word(w))
    report.row("nu", rep.count)
    report.row("denominator", rep.denom)
    report.row("delta", f"{_frac_text(delta)} ({float(delta)!r})")
    report.csv_columns = [
        "pattern",
        "word",
        "nu",
        "denominator",
        "delta_num",
        "delta_den",
        "delta_decimal",
    ]
    report.csv_rows = [
        [
            format_pattern(p),
            format_word(w),
            rep.count,
            rep.denom,
            delta.numerator,
            delta.denominator,
            float(delta),
        ]
    ]
    return EXIT_OK, report


def _match_blocks(letters: Tuple[int, ...]) -> Optional[List[Tuple[int, int]]]:
    """Run-length encode letters as (value, length) blocks."""
    if not letters:
        return None
    out: List[Tuple[int, int]] = []
    for v in letters:
        if out and out[-1][0] == v:
            out[-1] = (v, out[-1][1] + 1)
        else:
            out.append((v, 1))
    return out


def _route_density(config: RunConfig, p: Pattern) -> DensityValue:
    route = config.route
    if route == "auto":
        return asymptotic_density(p)
    if route == "constant":
        if not p.is_constant:
            raise DensityRouteError(f"{format_pattern(p)} is not constant")
        return DensityValue(Fraction(1), "constant pattern packs perfectly")
    if route == "subword-overlap":
        return gen_layered_density(p)
    if route == "cap":
        if config.ell is None:
            raise UsageError("route 'cap' requires --ell (number of layers)")
        for q in symmetry_class(p, include_inverse=p.is_permutation):
            shape = layered_decompose(q)
            if shape is not None:
                return layered_density_cap(
                    shape, config.ell, starts=config.starts, seed=config.seed
                )
        raise DensityRouteError(f"{format_pattern(p)} is not layered")
    if not p.is_classical:
        raise DensityRouteError(
            f"route {route!r} applies to classical patterns, not {format_pattern(p)}"
        )
    candidates = symmetry_class(p, include_inverse=p.is_permutation)
    if route == "simple-product":
        for q in candidates:
            shape = layered_decompose(q)
            if shape is not None:
                return simple_layered_density(shape)
        raise DensityRouteError(f"{format_pattern(p)} is not layered")
    if route == "single-rise":
        for q in candidates:
            blocks_rl = _match_blocks(q.letters)
            if (
                blocks_rl is not None
                and len(blocks_rl) == 2
                and blocks_rl[0][0] == 1
                and blocks_rl[1] == (2, 1)
            ):
                return k1_density(blocks_rl[0][1])
        raise DensityRouteError(
            f"{format_pattern(p)} is not a block of equal letters plus one rise"
        )
    if route == "two-block":
        for q in candidates:
            blocks_rl = _match_blocks(q.letters)
            if (
                blocks_rl is not None
                and len(blocks_rl) == 2
                and blocks_rl[0][0] == 1
                and blocks_rl[1][0] == 2
            ):
                return r_s_density(blocks_rl[0][1], blocks_rl[1][1])
        raise DensityRouteError(f"{format_pattern(p)} is not a two-block pattern")
    if route == "three-block":
        for q in candidates:
            blocks_rl = _match_blocks(q.letters)
            if (
                blocks_rl is not None
                and len(blocks_rl) == 3
                and [b[0] for b in blocks_rl] == [1, 2, 1]
            ):
                return pqr_density(blocks_rl[0][1], blocks_rl[2][1], blocks_rl[1][1])
        raise DensityRouteError(
            f"{format_pattern(p)} is not a low-high-low three-block pattern"
        )
    raise UsageError(f"unknown route {route!r}")


def _cmd_density(config: RunConfig) -> Tuple[int, _Report]:
    if config.pattern is None:
        raise UsageError("density requires -p/--pattern")
    p = parse_pattern(config.pattern)
    try:
        dv = _route_density(config, p)
    except (DensityRouteError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(str(exc))
    report = _Report()
    report.result = {
        "pattern": format_pattern(p),
        "route": config.route,
        "value": _value_obj(dv.value),
        "exact": dv.exact,
        "provenance": dv.provenance,
        "error_bound": dv.error_bound,
        "aux": _jsonsafe(dv.aux),
    }
    report.row("pattern", format_pattern(p))
    report.row("route", config.route)
    if dv.exact:
        report.row("density", f"{_frac_text(dv.value)} ({float(dv.value)!r})")
    else:
        report.row("density", repr(float(dv.value)))
    report.row("exact", _bool_text(dv.exact))
    report.row("provenance", dv.provenance)
    if dv.error_bound is not None:
        report.row("error_bound", repr(dv.error_bound))
    report.csv_columns = ["pattern", "route", "decimal", "error_bound", "provenance"]
    report.csv_rows = [
        [
            format_pattern(p),
            config.route,
            float(dv.value),
            "" if dv.error_bound is None else dv.error_bound,
            dv.provenance,
        ]
    ]
    return EXIT_OK, report


_SEARCH_CSV_COLUMNS = [
    "n",
    "k",
    "mu",
    "delta_num",
    "delta_den",
    "delta_decimal",
    "witness",
    "exhaustive",
    "nodes",
]


def _search_row(res) -> List[object]:
    return [
        res.n,
        res.k,
        _frac_text(res.count),
        res.density.numerator,
        res.density.denominator,
        float(res.density),
        format_word(res.witness),
        _bool_text(res.exhaustive),
        res.nodes,
    ]


def _cmd_search(config: RunConfig) -> Tuple[int, _Report]:
    if config.pattern is None or config.k is None or config.n is None:
        raise UsageError("search requires -p/--pattern, -k and -n")
    p = parse_pattern(config.pattern)
    budget = _budget(config)
    threads = _resolve_threads(config)
    report = _Report()
    try:
        res = max_count(p, config.k, config.n, budget, threads)
    except RuntimeError as exc:
        report.result = {
            "pattern": format_pattern(p),
            "k": config.k,
            "n": config.n,
            "completed": False,
            "error": str(exc),
            "exhaustive": False,
        }
        report.stats = {"nodes": None}
        report.row("error", str(exc))
        report.row("exhaustive", "false")
        return EXIT_BUDGET, report
    report.result = {
        "pattern": format_pattern(p),
        "k": res.k,
        "n": res.n,
        "mu": _rational(res.count),
        "denominator": res.denom,
        "delta": _rational(res.density),
        "witness": format_word(res.witness),
        "exhaustive": res.exhaustive,
    }
    report.stats = {"nodes": res.nodes}
    report.row("pattern", format_pattern(p))
    report.row("k", res.k)
    report.row("n", res.n)
    report.row("mu", _frac_text(res.count))
    report.row("denominator", res.denom)
    report.row("delta", f"{_frac_text(res.density)} ({float(res.density)!r})")
    report.row("witness", format_word(res.witness))
    report.row("exhaustive", _bool_text(res.exhaustive))
    report.csv_columns = list(_SEARCH_CSV_COLUMNS)
    report.csv_rows = [_search_row(res)]
    return EXIT_OK if res.exhaustive else EXIT_BUDGET, report


def _cmd_series(config: RunConfig) -> Tuple[int, _Report]:
    if config.pattern is None or config.n_range is None:
        raise UsageError("series requires -p/--pattern and --n-range A:B")
    p = parse_pattern(config.pattern)
    lo, hi = _parse_n_range(config.n_range)
    if lo < p.m:
        raise UsageError(
            f"--n-range starts below the pattern length ({lo} < {p.m})"
        )
    budget = _budget(config)
    threads = _resolve_threads(config)
    results = []
    for n in range(lo, hi + 1):
        k_eff = config.k if config.k is not None else n
        results.append(max_count(p, k_eff, n, budget, threads))
    violations = [
        [a.n, b.n] for a, b in zip(results, results[1:]) if b.density > a.density
    ]
    report = _Report()
    report.result = {
        "pattern": format_pattern(p),
        "k_policy": "fixed" if config.k is not None else "diagonal",
        "rows": [
            {
                "n": r.n,
                "k": r.k,
                "mu": _rational(r.count),
                "denominator": r.denom,
                "delta": _rational(r.density),
                "witness": format_word(r.witness),
                "exhaustive": r.exhaustive,
            }
            for r in results
        ],
        "nonincreasing": not violations,
        "violations": violations,
    }
    report.stats = {
        "nodes_total": sum(r.nodes for r in results),
        "nodes": [{"n": r.n, "nodes": r.nodes} for r in results],
    }
    for r in results:
        report.row(
            f"n={r.n} k={r.k}",
            f"mu={_frac_text(r.count)} delta={_frac_text(r.density)} "
            f"({float(r.density)!r}) witness={format_word(r.witness)}"
            + ("" if r.exhaustive else " [budget hit]"),
        )
    report.row("nonincreasing", _bool_text(not violations))
    report.csv_columns = list(_SEARCH_CSV_COLUMNS)
    report.csv_rows = [_search_row(r) for r in results]
    exhaustive = all(r.exhaustive for r in results)
    return EXIT_OK if exhaustive else EXIT_BUDGET, report


def _parse_proportions(text: str) -> Tuple[Fraction, ...]:
    parts = [s.strip() for s in text.split(",") if s.strip()]
    if not parts:
        raise UsageError("--proportions needs a comma-separated list")
    out = []
    for part in parts:
        try:
            out.append(Fraction(part))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad proportion {part!r}")
    return tuple(out)


def _require(config: RunConfig, builder: str, **needed: Optional[object]) -> None:
    missing = [flag for flag, value in needed.items() if value is None]
    if missing:
        flags = ", ".join(f"--{name.replace('_', '-')}" for name in missing)
        raise UsageError(f"builder {builder!r} requires {flags}")


def _build(config: RunConfig) -> Construction:
    b = config.builder
    if b == "balanced":
        _require(config, b, n=config.n, k=config.k)
        return balanced_monotone_word(config.n, config.k, config.ident)
    if b == "pqr":
        _require(config, b, p=config.p, q=config.q, r=config.r, n=config.n)
        return pqr_word(config.p, config.q, config.r, config.n)
    if b == "nested":
        _require(
            config, b, p=config.p, q=config.q, s=config.s,
            depth=config.depth, n=config.n,
        )
        return nested_word(config.p, config.q, config.s, config.depth, config.n)
    if b == "layered":
        _require(config, b, proportions=config.proportions, n=config.n)
        target = parse_pattern(config.pattern) if config.pattern else None
        return layered_word(
            _parse_proportions(config.proportions), config.n, config.mode, target
        )
    if b == "super-word":
        _require(config, b, l=config.l, m=config.m)
        return superpattern_word(config.l, config.m)
    if b == "twelve-one":
        _require(config, b, n=config.n, d=config.d)
        return twelve_one_word(config.n, config.d)
    if b == "sqrt-layers":
        _require(config, b, n=config.n)
        return sqrt_layer_perm(config.n)
    raise UsageError(f"unknown builder {b!r}")


def _cmd_construct(config: RunConfig) -> Tuple[int, _Report]:
    if config.builder is None:
        raise UsageError("construct requires --builder")
    built = _build(config)
    recounts = built.recount()
    verified = recounts == built.predicted_counts
    if config.builder == "super-word":
        verified = verified and is_universal(built.word, config.l, config.m)[0]
    report = _Report()
    if config.emit == "word":
        report.result = {"word": format_word(built.word)}
        report.table = [(format_word(built.word), "")]
        report.csv_columns = ["word"]
        report.csv_rows = [[format_word(built.word)]]
    else:
        report.result = {
            "builder": config.builder,
            "recipe": built.recipe,
            "word": format_word(built.word),
            "n": built.word.n,
            "k": built.word.k,
            "targets": [format_pattern(t) for t in built.targets],
            "predicted_counts": list(built.predicted_counts),
            "recounts": list(recounts),
            "predicted_density": (
                None
                if built.predicted_density is None
                else _rational(built.predicted_density)
            ),
            "verified": verified,
        }
        report.row("builder", config.builder)
        report.row("recipe", built.recipe)
        report.row("word", format_word(built.word))
        report.row("length", built.word.n)
        report.row("alphabet", built.word.k)
        for t, c, rc in zip(built.targets, built.predicted_counts, recounts):
            report.row(f"count[{format_pattern(t)}]", f"predicted={c} recounted={rc}")
        if built.predicted_density is not None:
            report.row(
                "density",
                f"{_frac_text(built.predicted_density)} "
                f"({float(built.predicted_density)!r})",
            )
        report.row("verified", _bool_text(verified))
    return (EXIT_OK if verified else EXIT_INTERNAL), report


def _cmd_super(config: RunConfig) -> Tuple[int, _Report]:
    if config.l is None or config.m is None:
        raise UsageError("super requires -l and -m")
    budget = _budget(config)
    threads = _resolve_threads(config)
    res = shortest_superpattern(config.l, config.m, budget, threads=threads)
    universe = pattern_universe(config.l, config.m)
    report = _Report()
    report.result = {
        "l": res.l,
        "m": res.m,
        "universe_size": universe.size,
        "length": res.length,
        "witness": format_word(res.witness),
        "lower_bound": res.lower_bound,
        "lower_bound_certified": res.lower_bound_certified,
        "log": [{"length": v.length, "verdict": v.verdict} for v in res.log],
    }
    report.stats = {
        "nodes_total": res.nodes,
        "nodes": [{"length": v.length, "nodes": v.nodes} for v in res.log],
    }
    report.row("l", res.l)
    report.row("m", res.m)
    report.row("universe", f"{universe.size} patterns")
    report.row("length", res.length)
    report.row("witness", format_word(res.witness))
    report.row(
        "lower_bound",
        f"{res.lower_bound}"
        + (" (certified)" if res.lower_bound_certified else " (budget hit)"),
    )
    report.row("log", "; ".join(f"{v.length} {v.verdict}" for v in res.log))
    return (EXIT_OK if res.lower_bound_certified else EXIT_BUDGET), report


def _cmd_table3(config: RunConfig) -> Tuple[int, _Report]:
    table = three_letter_table()
    report = _Report()
    rows = {}
    for text in sorted(table):
        dv = table[text]
        rows[text] = {
            "value": _value_obj(dv.value),
            "exact": dv.exact,
            "provenance": dv.provenance,
            "error_bound": dv.error_bound,
        }
        report.row(text, f"{float(dv.value)!r}  [{dv.provenance}]")
    report.result = {"rows": rows}
    report.csv_columns = ["pattern", "decimal", "error_bound", "provenance"]
    report.csv_rows = [
        [
            text,
            float(table[text].value),
            "" if table[text].error_bound is None else table[text].error_bound,
            table[text].provenance,
        ]
        for text in sorted(table)
    ]
    return EXIT_OK, report


# ---------------------------------------------------------------------------
# verify suites


def _suite_monotonicity() -> Tuple[bool, Dict[str, object]]:
    """Finite densities never increase with n, never decrease with k, and
    saturate once k reaches n."""
    texts = ["112", "121", "1122", "12-1"]
    max_n = 6
    checks = 0
    violations: List[List[object]] = []
    for text in texts:
        p = parse_pattern(text)
        vals: Dict[Tuple[int, int], Fraction] = {}
        for n in range(p.m, max_n + 1):
            for k in range(1, n + 1):
                vals[(k, n)] = max_count(p, k, n).density
        for (k, n), dv in vals.items():
            if (k, n + 1) in vals:
                checks += 1
                if vals[(k, n + 1)] > dv:
                    violations.append([text, "n-step", k, n])
            if (k + 1, n) in vals:
                checks += 1
                if vals[(k + 1, n)] < dv:
                    violations.append([text, "k-step", k, n])
        for n in range(p.m, max_n + 1):
            checks += 1
            if max_count(p, n + 2, n).density != vals[(n, n)]:
                violations.append([text, "saturation", n])
    return not violations, {
        "patterns": texts,
        "max_n": max_n,
        "checks": checks,
        "violations": violations,
    }


def _suite_restriction(seed: int) -> Tuple[bool, Dict[str, object]]:
    """Permutation-pattern maxima are attained on permutations, and the
    tie-breaking map never loses occurrences."""
    detail: Dict[str, object] = {}
    passed = True
    for text in ("132", "123"):
        rep = verify_perm_restriction(parse_pattern(text), 6)
        detail[text] = {
            "n": rep.n,
            "word_max": _rational(rep.word_max),
            "perm_max": _rational(rep.perm_max),
            "equal": rep.equal,
        }
        passed = passed and rep.equal
    tb = verify_tiebreak_map(parse_pattern("132"), 6, samples=300, seed=seed)
    detail["tiebreak"] = {
        "n": tb.n,
        "samples": tb.samples,
        "violations": tb.violations,
    }
    return passed and tb.violations == 0, detail


def _suite_layered_witness() -> Tuple[bool, Dict[str, object]]:
    """Layered pattern sets admit layered maximizers; with every layer of
    size >= 2 all maximizers are layered."""
    detail: Dict[str, object] = {}
    rep = verify_layered_witness(parse_pattern("2143"), 6)
    detail["2143"] = {
        "n": rep.n,
        "mu": _rational(rep.mu),
        "layered_maximizer_exists": rep.layered_maximizer_exists,
        "all_maximizers_layered": rep.all_maximizers_layered,
        "maximizers": rep.maximizers,
    }
    ok = rep.layered_maximizer_exists and rep.all_maximizers_layered is True
    rep2 = verify_layered_witness(parse_pattern("132"), 6)
    detail["132"] = {
        "n": rep2.n,
        "mu": _rational(rep2.mu),
        "layered_maximizer_exists": rep2.layered_maximizer_exists,
        "all_maximizers_layered": rep2.all_maximizers_layered,
        "maximizers": rep2.maximizers,
    }
    return ok and rep2.layered_maximizer_exists, detail


def _compositions(total: int) -> List[Tuple[int, ...]]:
    if total == 0:
        return [()]
    out = []
    for first in range(1, total + 1):
        for rest in _compositions(total - first):
            out.append((first,) + rest)
    return out


def _suite_overlap_formula() -> Tuple[bool, Dict[str, object]]:
    """The closed-form minimal self-overlap shift matches the direct oracle
    on every nondecreasing nonconstant block pattern of length <= 6."""
    checks = 0
    violations: List[str] = []
    for m in range(2, 7):
        for comp in _compositions(m):
            if len(comp) < 2:
                continue
            letters = "".join(
                str(i + 1) * part for i, part in enumerate(comp)
            )
            p = parse_pattern(letters + "g")
            formula, oracle = m_overlap(p)
            checks += 1
            if formula != oracle:
                violations.append(letters)
    anchors = {
        "112g": 2,
        "123g": 1,
        "1432g": 3,
    }
    anchor_results = {}
    for text, expected in anchors.items():
        _, oracle = m_overlap(parse_pattern(text))
        anchor_results[text] = {"expected": expected, "oracle": oracle}
        checks += 1
        if oracle != expected:
            violations.append(text)
    return not violations, {
        "max_m": 6,
        "checks": checks,
        "violations": violations,
        "anchors": anchor_results,
    }


def _cmd_verify(config: RunConfig) -> Tuple[int, _Report]:
    wanted = _SUITES if config.suite == "all" else (config.suite,)
    report = _Report()
    suites: Dict[str, object] = {}
    all_passed = True
    for name in wanted:
        if name == "monotonicity":
            passed, detail = _suite_monotonicity()
        elif name == "restriction":
            passed, detail = _suite_restriction(config.seed)
        elif name == "layered-witness":
            passed, detail = _suite_layered_witness()
        elif name == "overlap-formula":
            passed, detail = _suite_overlap_formula()
        else:
            raise UsageError(f"unknown suite {name!r}")
        suites[name] = {"passed": passed, "detail": detail}
        all_passed = all_passed and passed
        report.row(name, "pass" if passed else "FAIL")
    report.result = {"suites": suites, "passed": all_passed}
    return (EXIT_OK if all_passed else EXIT_INTERNAL), report


_HANDLERS = {
    "count": _cmd_count,
    "density": _cmd_density,
    "search": _cmd_search,
    "series": _cmd_series,
    "construct": _cmd_construct,
    "super": _cmd_super,
    "table3": _cmd_table3,
    "verify": _cmd_verify,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _add_output_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--format", choices=("table", "json", "csv"), default="table",
        help="output format (default table)",
    )


def _add_budget_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--budget-nodes", type=int, default=None,
                     help="stop after this many search nodes")
    sub.add_argument("--budget-seconds", type=float, default=None,
                     help="stop after this much wall-clock time")
    sub.add_argument("--threads", type=int, default=None,
                     help=f"worker threads (default ${THREADS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wordpack",
        description="Pattern-packing statistics for words over ordered alphabets.",
        allow_abbrev=False,
    )
    subs = parser.add_subparsers(dest="subcommand", metavar="subcommand")

    sp = subs.add_parser("count", help="occurrences of a pattern in a word",
                         allow_abbrev=False)
    sp.add_argument("-p", "--pattern", required=True)
    sp.add_argument("-w", "--word", required=True)
    sp.add_argument("-k", type=int, default=None, help="ambient alphabet size")
    _add_output_flags(sp)

    sp = subs.add_parser("density", help="asymptotic packing density",
                         allow_abbrev=False)
    sp.add_argument("-p", "--pattern", required=True)
    sp.add_argument("--route", choices=_ROUTES, default="auto")
    sp.add_argument("--ell", type=int, default=None,
                    help="layer count for the cap route")
    sp.add_argument("--starts", type=int, default=64,
                    help="multistart count for the cap route")
    sp.add_argument("--seed", type=int, default=12345)
    _add_output_flags(sp)

    sp = subs.add_parser("search", help="exact maximum over words in [k]^n",
                         allow_abbrev=False)
    sp.add_argument("-p", "--pattern", required=True)
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("-n", type=int, required=True)
    _add_budget_flags(sp)
    _add_output_flags(sp)

    sp = subs.add_parser("series", help="density table over a range of n",
                         allow_abbrev=False)
    sp.add_argument("-p", "--pattern", required=True)
    sp.add_argument("--n-range", required=True, metavar="A:B")
    sp.add_argument("-k", type=int, default=None,
                    help="fixed alphabet size (default: diagonal k = n)")
    _add_budget_flags(sp)
    _add_output_flags(sp)

    sp = subs.add_parser("construct", help="extremal word constructions",
                         allow_abbrev=False)
    sp.add_argument("--builder", choices=_BUILDERS, required=True)
    sp.add_argument("--emit", choices=("word", "json"), default="json")
    sp.add_argument("-n", type=int, default=None)
    sp.add_argument("-k", type=int, default=None)
    sp.add_argument("-l", type=int, default=None)
    sp.add_argument("-m", type=int, default=None)
    sp.add_argument("--p", type=int, default=None, help="low-block length")
    sp.add_argument("--q", type=int, default=None, help="second low-block length")
    sp.add_argument("--r", type=int, default=None, help="high-block length")
    sp.add_argument("--s", type=int, default=None, help="letters per repeated level")
    sp.add_argument("--depth", type=int, default=None, help="nesting depth")
    sp.add_argument("--d", type=int, default=None, help="distinct-letter count")
    sp.add_argument("--ident", type=int, default=2,
                    help="tie multiplicity for the balanced builder")
    sp.add_argument("--proportions", default=None, metavar="A,B,...",
                    help="layer proportions for the layered builder")
    sp.add_argument("--mode", choices=("permutation", "word"),
                    default="permutation")
    sp.add_argument("-p", "--pattern", default=None,
                    help="target pattern for the layered builder")
    _add_output_flags(sp)

    sp = subs.add_parser("super", help="shortest universal word for (l, m)",
                         allow_abbrev=False)
    sp.add_argument("-l", type=int, required=True)
    sp.add_argument("-m", type=int, required=True)
    _add_budget_flags(sp)
    _add_output_flags(sp)

    sp = subs.add_parser("table3", help="densities of all three-letter patterns",
                         allow_abbrev=False)
    _add_output_flags(sp)

    sp = subs.add_parser("verify", help="run the library's property suites",
                         allow_abbrev=False)
    sp.add_argument("--suite", choices=("all",) + _SUITES, default="all")
    sp.add_argument("--seed", type=int, default=12345)
    _add_output_flags(sp)

    return parser


def run(config: RunConfig, stream=None) -> int:
    """Execute one resolved configuration; returns the exit status."""
    handler = _HANDLERS.get(config.subcommand)
    if handler is None:
        raise UsageError(f"unknown subcommand {config.subcommand!r}")
    status, report = handler(config)
    _emit(config, report, stream)
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    config = _config_from_args(args)
    try:
        return run(config)
    except UsageError as exc:
        sys.stderr.write(f"wordpack: error: {exc}\n")
        return EXIT_USAGE
    except (ParseError, ValueError) as exc:
        sys.stderr.write(f"wordpack: error: {exc}\n")
        return EXIT_USAGE
    except AssertionError as exc:
        sys.stderr.write(f"wordpack: internal invariant failure: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
