"""Scalar quantities attached to Poisson Galton-Watson tree pairs.

Everything here is either an exact computation (extinction probability,
per-class tree probabilities, series for the pair-isomorphism probability)
or a Monte-Carlo estimate built on the vectorized pair engine. Monte-Carlo
results are deterministic functions of (seed, workers, samples): the budget
is split across workers, each worker runs an independent derived stream,
and the partial tallies are combined in worker order.
"""

from __future__ import annotations

import csv
import io
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from multiprocessing import get_context

import numpy as np

from . import pairsim
from .errors import InvalidGamma
from .pgw import DEFAULT_MAX_DEPTH, DEFAULT_MAX_SIZE, poisson_pmf
from .rooted import RootedGraph, RootedTree, canon_rooted_graph

__all__ = [
    "MCEstimate",
    "SeriesEstimate",
    "DecayRow",
    "DecayTable",
    "ComponentFrequencies",
    "extinction_probability",
    "tree_class_probability",
    "tree_catalog",
    "iso_series",
    "iso_mc",
    "truncated_iso_mc",
    "surviving_iso_mc",
    "surviving_iso_profile",
    "small_iso_mc",
    "spine_event_mc",
    "spine_event_profile",
    "iso_decay_rate",
    "assembly_threshold",
    "decay_diagnostics",
    "decay_table_to_csv",
    "decay_table_to_json",
    "component_class_frequencies",
]

MAX_SERIES_SIZE = 16
DEFAULT_SERIES_SIZE = 12


@dataclass(frozen=True)
class MCEstimate:
    """A Monte-Carlo frequency with its provenance.

    std_error = sqrt(mean(1-mean)/denominator) where the denominator is the
    number of pairs that actually entered the estimate. excluded_truncated
    reports pairs cut short by a size guard; depending on the estimand they
    are either removed from the denominator (depth-limited events, where the
    guard censors the answer) or kept as non-events (whole-tree isomorphism,
    where an enormous pair is known not to contribute).
    """

    mean: float
    std_error: float
    samples: int
    excluded_truncated: int
    seed: int
    workers: int = 1


@dataclass(frozen=True)
class SeriesEstimate:
    """A truncated nonnegative series with per-size terms."""

    partial_sum: float
    terms_by_size: tuple[float, ...]
    max_size: int

    def tail_allowance(self, factor: float = 10.0) -> float:
        """A crude bound on the omitted tail: last size term times factor."""
        return factor * self.terms_by_size[-1] if self.terms_by_size else 0.0


def extinction_probability(lam: float) -> float:
    """Least fixed point in [0, 1] of x = exp(-lam + lam*x).

    This is the probability that a Poisson(lam) branching process dies out:
    exactly 1 for lam <= 1, and the unique root in (0, 1) otherwise,
    located by bisection to absolute tolerance 1e-12.
    """
    if not math.isfinite(lam) or lam <= 0:
        raise ValueError("offspring mean must be positive and finite")
    if lam <= 1:
        return 1.0

    def f(x: float) -> float:
        return math.exp(-lam + lam * x) - x

    hi = 0.5
    while f(hi) >= 0:
        hi = 1.0 - (1.0 - hi) / 2
        if 1.0 - hi < 1e-15:
            return 1.0
    lo = 0.0
    for _ in range(100):
        mid = (lo + hi) / 2
        if f(mid) >= 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13:
            break
    return (lo + hi) / 2


def tree_class_probability(lam: float, tau: RootedTree) -> float:
    """Probability that a Poisson(lam) Galton-Watson tree realizes the
    isomorphism class of tau.

    Computed bottom-up: a vertex with d children grouped into isomorphism
    classes with multiplicities m_1..m_k contributes
    pmf(d) * d! / (m_1! ... m_k!) * prod of child probabilities.
    """
    order = sorted(range(tau.n), key=lambda v: -tau.depth[v])
    code: list[bytes] = [b""] * tau.n
    prob = [0.0] * tau.n
    for v in order:
        kids = tau.children[v]
        kid_codes = sorted(code[c] for c in kids)
        code[v] = b"(" + b"".join(kid_codes) + b")"
        p = poisson_pmf(lam, len(kids)) * math.factorial(len(kids))
        for m in Counter(code[c] for c in kids).values():
            p /= math.factorial(m)
        for c in kids:
            p *= prob[c]
        prob[v] = p
    return prob[0]


@lru_cache(maxsize=None)
def _tree_catalog(max_size: int) -> tuple[tuple[int, bytes, tuple[int, ...]], ...]:
    """All unordered rooted tree classes up to max_size vertices.

    Entry i is (size, canonical code, sorted child entry indices). Children
    are drawn from earlier entries with nondecreasing index, so every
    multiset of subtrees appears exactly once and no dedup pass is needed.
    """
    entries: list[tuple[int, bytes, tuple[int, ...]]] = [(1, b"()", ())]
    for s in range(2, max_size + 1):
        found: list[tuple[int, bytes, tuple[int, ...]]] = []

        def compose(i_min: int, remaining: int, acc: list[int]) -> None:
            if remaining == 0:
                codes = sorted(entries[i][1] for i in acc)
                found.append((s, b"(" + b"".join(codes) + b")", tuple(acc)))
                return
            for i in range(i_min, len(entries)):
                if entries[i][0] <= remaining:
                    acc.append(i)
                    compose(i, remaining - entries[i][0], acc)
                    acc.pop()

        compose(0, s - 1, [])
        entries.extend(sorted(found, key=lambda e: e[1]))
    return tuple(entries)


def tree_catalog(max_size: int) -> list[tuple[bytes, RootedTree]]:
    """Materialize (canonical code, representative tree) for every rooted
    tree class with at most max_size vertices."""
    if not 1 <= max_size <= MAX_SERIES_SIZE:
        raise ValueError(f"max_size must be in [1, {MAX_SERIES_SIZE}]")
    cat = _tree_catalog(max_size)

    def build(i: int, parent_slot: int, parent_list: list[int]) -> None:
        me = len(parent_list)
        parent_list.append(parent_slot)
        for c in cat[i][2]:
            build(c, me, parent_list)

    out = []
    for i, (size, code, _kids) in enumerate(cat):
        parent: list[int] = []
        build(i, -1, parent)
        out.append((code, RootedTree(parent)))
    return out


def _catalog_probs(lam: float, max_size: int) -> list[float]:
    cat = _tree_catalog(max_size)
    probs = [0.0] * len(cat)
    for i, (_size, _code, kids) in enumerate(cat):
        p = poisson_pmf(lam, len(kids)) * math.factorial(len(kids))
        for idx, m in Counter(kids).items():
            p *= probs[idx] ** m / math.factorial(m)
        probs[i] = p
    return probs


def iso_series(lam: float, max_size: int = DEFAULT_SERIES_SIZE) -> SeriesEstimate:
    """Truncated series for the probability that two independent
    Poisson(lam) trees are isomorphic: sum over tree classes of the squared
    class probability, reported size by size."""
    if not 1 <= max_size <= MAX_SERIES_SIZE:
        raise ValueError(f"max_size must be in [1, {MAX_SERIES_SIZE}]")
    cat = _tree_catalog(max_size)
    probs = _catalog_probs(lam, max_size)
    terms = [0.0] * max_size
    for (size, _code, _kids), p in zip(cat, probs):
        terms[size - 1] += p * p
    return SeriesEstimate(math.fsum(terms), tuple(terms), max_size)


def iso_decay_rate(lam: float, iso_probability: float) -> float:
    """The per-level decay rate lam^2 * iso_probability.

    Raises InvalidGamma outside (0, 1): the rate provably stays below 1 for
    every offspring mean, so a value >= 1 signals a bad input.
    """
    if not 0 < iso_probability < 1:
        raise InvalidGamma(f"pair-isomorphism probability {iso_probability!r} not in (0, 1)")
    rate = lam * lam * iso_probability
    if rate >= 1:
        raise InvalidGamma(f"decay rate {rate} >= 1; inconsistent inputs")
    return rate


def assembly_threshold(n: int, lam: float, iso_probability: float) -> float:
    """Critical neighborhood radius log(n) / log(1/rate) for assembling an
    n-vertex sparse graph from rooted neighborhoods."""
    if n < 2:
        raise ValueError("need n >= 2")
    rate = iso_decay_rate(lam, iso_probability)
    return math.log(n) / math.log(1.0 / rate)


# ---------------------------------------------------------------------------
# Monte-Carlo estimators


def _map_tasks(fn, tasks: list, parallel: bool) -> list:
    if parallel and len(tasks) > 1:
        procs = min(len(tasks), os.cpu_count() or 1)
        with get_context().Pool(procs) as pool:
            return pool.map(fn, tasks)
    return [fn(t) for t in tasks]


def _split(seed: int, workers: int, samples: int) -> list[tuple[np.random.SeedSequence, int]]:
    sizes = pairsim.worker_sizes(samples, workers)
    seqs = pairsim.split_workers(seed, workers)
    return [(ss, sz) for ss, sz in zip(seqs, sizes) if sz > 0]


def _estimate(events: int, denom: int, samples: int, excluded: int, seed: int, workers: int) -> MCEstimate:
    mean = events / denom if denom > 0 else 0.0
    se = math.sqrt(mean * (1.0 - mean) / denom) if denom > 0 else 0.0
    return MCEstimate(mean, se, samples, excluded, seed, workers)


def _task_depth_profile(args):
    ss, n, lam, r_max, size_cap = args
    rng = np.random.default_rng(ss)
    return pairsim.depth_profile_counts(rng, ("poisson", lam), n, r_max, size_cap)


def _task_full_iso(args):
    ss, n, lam, depth_cap, size_cap = args
    rng = np.random.default_rng(ss)
    return pairsim.full_iso_counts(rng, ("poisson", lam), n, depth_cap, size_cap)


def _task_small_iso(args):
    ss, n, lam, max_size = args
    rng = np.random.default_rng(ss)
    return pairsim.small_iso_counts(rng, ("poisson", lam), n, max_size)


def _task_spine(args):
    ss, n, lam, r_values, side_budget, size_cap = args
    sieve_ss, post_ss = ss.spawn(2)
    return pairsim.spine_counts(
        np.random.default_rng(sieve_ss),
        np.random.default_rng(post_ss),
        ("poisson", lam),
        n,
        r_values,
        side_budget,
        size_cap,
    )


def iso_mc(
    lam: float,
    samples: int,
    seed: int,
    workers: int = 1,
    parallel: bool = False,
    max_depth: int = DEFAULT_MAX_DEPTH,
    max_size: int = DEFAULT_MAX_SIZE,
) -> MCEstimate:
    """Monte-Carlo probability that two independent Poisson(lam) trees are
    isomorphic. Pairs that outgrow the guards are counted as non-isomorphic
    (an isomorphic infinite pair has probability zero); their count is
    reported in excluded_truncated so the bias stays visible."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    tasks = [(ss, sz, lam, max_depth, max_size) for ss, sz in _split(seed, workers, samples)]
    parts = _map_tasks(_task_full_iso, tasks, parallel)
    events = sum(p["events"] for p in parts)
    truncated = sum(p["truncated"] for p in parts)
    return _estimate(events, samples, samples, truncated, seed, workers)


def small_iso_mc(
    lam: float,
    max_size: int,
    samples: int,
    seed: int,
    workers: int = 1,
    parallel: bool = False,
) -> MCEstimate:
    """Monte-Carlo probability that two independent Poisson(lam) trees are
    isomorphic with at most max_size vertices each. Growing past max_size
    fails the event, so no sample is ever excluded."""
    if samples < 1 or max_size < 1:
        raise ValueError("need samples >= 1 and max_size >= 1")
    tasks = [(ss, sz, lam, max_size) for ss, sz in _split(seed, workers, samples)]
    parts = _map_tasks(_task_small_iso, tasks, parallel)
    events = sum(p["events"] for p in parts)
    return _estimate(events, samples, samples, 0, seed, workers)


def _depth_profile(
    lam: float,
    r_max: int,
    samples: int,
    seed: int,
    workers: int,
    parallel: bool,
    max_size: int,
) -> dict:
    tasks = [(ss, sz, lam, r_max, max_size) for ss, sz in _split(seed, workers, samples)]
    parts = _map_tasks(_task_depth_profile, tasks, parallel)
    g_ge = np.zeros(r_max + 1, dtype=np.int64)
    p_ge = np.zeros(r_max + 1, dtype=np.int64)
    excluded = 0
    for p in parts:
        g_ge += p["g_ge"]
        p_ge += p["p_ge"]
        excluded += p["excluded"]
    return {"g_ge": g_ge, "p_ge": p_ge, "excluded": excluded}


def truncated_iso_mc(
    lam: float,
    r: int,
    samples: int,
    seed: int,
    workers: int = 1,
    parallel: bool = False,
    max_size: int = DEFAULT_MAX_SIZE,
) -> MCEstimate:
    """Monte-Carlo probability that the depth-r truncations of two
    independent Poisson(lam) trees are isomorphic. r = 0 is exact: depth-0
    truncations are single roots."""
    if samples < 1 or r < 0:
        raise ValueError("need samples >= 1 and r >= 0")
    if r == 0:
        return MCEstimate(1.0, 0.0, samples, 0, seed, workers)
    tall = _depth_profile(lam, r, samples, seed, workers, parallel, max_size)
    denom = samples - tall["excluded"]
    return _estimate(int(tall["g_ge"][r]), denom, samples, tall["excluded"], seed, workers)


def surviving_iso_mc(
    lam: float,
    r: int,
    samples: int,
    seed: int,
    workers: int = 1,
    parallel: bool = False,
    max_size: int = DEFAULT_MAX_SIZE,
) -> MCEstimate:
    """Monte-Carlo probability that two independent Poisson(lam) trees both
    reach depth r and their depth-r truncations are isomorphic. r = 0 is
    exact (both trees always contain their root)."""
    if samples < 1 or r < 0:
        raise ValueError("need samples >= 1 and r >= 0")
    if r == 0:
        return MCEstimate(1.0, 0.0, samples, 0, seed, workers)
    tall = _depth_profile(lam, r, samples, seed, workers, parallel, max_size)
    denom = samples - tall["excluded"]
    return _estimate(int(tall["p_ge"][r]), denom, samples, tall["excluded"], seed, workers)


def surviving_iso_profile(
    lam: float,
    r_max: int,
    samples: int,
    seed: int,
    workers: int = 1,
    parallel: bool = False,
    max_size: int = DEFAULT_MAX_SIZE,
) -> dict:
    """One pass over the sample budget yielding estimates for every radius
    up to r_max: {"surviving": [MCEstimate]*(r_max+1), "truncated": ...}.

    Index r of each list matches radius r; index 0 is the exact value 1.
    """
    if samples < 1 or r_max < 1:
        raise ValueError("need samples >= 1 and r_max >= 1")
    tall = _depth_profile(lam, r_max, samples, seed, workers, parallel, max_size)
    excl = tall["excluded"]
    denom = samples - excl
    surviving = [MCEstimate(1.0, 0.0, samples, excl, seed, workers)]
    truncated = [MCEstimate(1.0, 0.0, samples, excl, seed, workers)]
    for r in range(1, r_max + 1):
        surviving.append(_estimate(int(tall["p_ge"][r]), denom, samples, excl, seed, workers))
        truncated.append(_estimate(int(tall["g_ge"][r]), denom, samples, excl, seed, workers))
    return {"surviving": surviving, "truncated": truncated}


def spine_event_mc(
    lam: float,
    r: int,
    side_budget: int,
    samples: int,
    seed: int,
    workers: int = 1,
    parallel: bool = False,
    max_size: int = DEFAULT_MAX_SIZE,
) -> MCEstimate:
    """Monte-Carlo frequency of the structured deep-agreement event at
    radius r with pendant budget side_budget over independent tree pairs."""
    return spine_event_profile(
        lam, [r], side_budget, samples, seed, workers, parallel, max_size
    )[r]


def spine_event_profile(
    lam: float,
    r_values: list[int],
    side_budget: int,
    samples: int,
    seed: int,
    workers: int = 1,
    parallel: bool = False,
    max_size: int = DEFAULT_MAX_SIZE,
) -> dict[int, MCEstimate]:
    """Spine-event frequencies for several radii from one shared sample."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    r_values = sorted(set(r_values))
    if not r_values or r_values[0] <= side_budget or side_budget < 1:
        raise ValueError("need every r > side_budget >= 1")
    tasks = [
        (ss, sz, lam, r_values, side_budget, max_size)
        for ss, sz in _split(seed, workers, samples)
    ]
    parts = _map_tasks(_task_spine, tasks, parallel)
    excluded = sum(p["excluded"] for p in parts)
    denom = samples - excluded
    out = {}
    for r in r_values:
        events = sum(p["events"][r] for p in parts)
        out[r] = _estimate(events, denom, samples, excluded, seed, workers)
    return out


# ---------------------------------------------------------------------------
# Decay diagnostics


@dataclass(frozen=True)
class DecayRow:
    r: int
    p_hat: float
    se: float
    g_hat: float
    ratio: float
    lower: float
    upper: float
    flag: bool


@dataclass(frozen=True)
class DecayTable:
    lam: float
    alpha_hat: float
    samples: int
    seed: int
    workers: int
    rows: tuple[DecayRow, ...] = field(default_factory=tuple)


def decay_diagnostics(
    lam: float,
    r_max: int,
    samples: int,
    seed: int,
    workers: int = 1,
    parallel: bool = False,
    series_size: int = DEFAULT_SERIES_SIZE,
    max_size: int = DEFAULT_MAX_SIZE,
) -> DecayTable:
    """Diagnostic table for the geometric decay of deep-agreement odds.

    For each radius r <= r_max the row reports the surviving-isomorphism
    frequency p_hat with its s.e., the truncation-isomorphism frequency
    g_hat, the normalized ratio p_hat / alpha_hat^r (alpha_hat from the
    series), and the product sandwich
        lam^2*g*p_prev - lam^4*g*p_prev^2 <= p <= lam^2*g*p_prev,
    flagging rows where p_hat leaves the 3-sigma-widened sandwich.
    """
    if not 1 <= r_max <= 20:
        raise ValueError("r_max must be in [1, 20]")
    prof = surviving_iso_profile(lam, r_max, samples, seed, workers, parallel, max_size)
    alpha_hat = lam * lam * iso_series(lam, series_size).partial_sum
    rows = []
    for r in range(1, r_max + 1):
        p = prof["surviving"][r]
        g = prof["truncated"][r]
        p_prev = prof["surviving"][r - 1]
        upper = lam**2 * g.mean * p_prev.mean
        lower = upper - lam**4 * g.mean * p_prev.mean**2
        d_up_g = lam**2 * p_prev.mean
        d_up_p = lam**2 * g.mean
        sig_up = math.hypot(d_up_g * g.std_error, d_up_p * p_prev.std_error)
        d_lo_g = lam**2 * p_prev.mean - lam**4 * p_prev.mean**2
        d_lo_p = lam**2 * g.mean - 2 * lam**4 * g.mean * p_prev.mean
        sig_lo = math.hypot(d_lo_g * g.std_error, d_lo_p * p_prev.std_error)
        band_lo = lower - 3 * math.hypot(sig_lo, p.std_error)
        band_up = upper + 3 * math.hypot(sig_up, p.std_error)
        flag = not (band_lo <= p.mean <= band_up)
        ratio = p.mean / alpha_hat**r
        rows.append(DecayRow(r, p.mean, p.std_error, g.mean, ratio, lower, upper, flag))
    return DecayTable(lam, alpha_hat, samples, seed, workers, tuple(rows))


def decay_table_to_csv(table: DecayTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "p_hat", "se", "g_hat", "ratio", "lower", "upper", "flag"])
    for row in table.rows:
        w.writerow(
            [
                row.r,
                repr(row.p_hat),
                repr(row.se),
                repr(row.g_hat),
                repr(row.ratio),
                repr(row.lower),
                repr(row.upper),
                int(row.flag),
            ]
        )
    return buf.getvalue()


def decay_table_to_json(table: DecayTable) -> dict:
    return {
        "lam": table.lam,
        "alpha_hat": table.alpha_hat,
        "samples": table.samples,
        "seed": table.seed,
        "workers": table.workers,
        "rows": [
            {
                "r": row.r,
                "p_hat": row.p_hat,
                "se": row.se,
                "g_hat": row.g_hat,
                "ratio": row.ratio,
                "lower": row.lower,
                "upper": row.upper,
                "flag": row.flag,
            }
            for row in table.rows
        ],
    }


# ---------------------------------------------------------------------------
# Local limit: component classes of a sparse random graph


@dataclass(frozen=True)
class ComponentFrequencies:
    counts: dict
    oversize: int
    samples: int
    seed: int
    workers: int


def _task_components(args):
    ss, samples, n, lam, max_size = args
    rng = np.random.default_rng(ss)
    p = lam / n
    counts: Counter = Counter()
    oversize = 0
    for _ in range(samples):
        # Deferred-decision exploration of one vertex's component: every
        # vertex pair is decided exactly once, either by a Bernoulli test
        # between discovered vertices or by the binomial draw against the
        # undiscovered pool, so the component law is exactly that of the
        # full n-vertex graph.
        undiscovered = n - 1
        size = 1
        edges = []
        qi = 0
        aborted = False
        while qi < size:
            for u in range(qi + 1, size):
                if rng.random() < p:
                    edges.append((qi, u))
            fresh = int(rng.binomial(undiscovered, p))
            undiscovered -= fresh
            for _j in range(fresh):
                edges.append((qi, size))
                size += 1
            if size > max_size:
                aborted = True
                break
            qi += 1
        if aborted:
            oversize += 1
            continue
        g = RootedGraph.build(size, edges, root=0)
        counts[canon_rooted_graph(g, s_max=max(12, size))] += 1
    return {"counts": counts, "oversize": oversize}


def component_class_frequencies(
    n: int,
    lam: float,
    samples: int,
    seed: int,
    max_size: int = 8,
    workers: int = 1,
    parallel: bool = False,
) -> ComponentFrequencies:
    """Empirical distribution of the rooted component of a uniform vertex
    in a sparse random graph, over independently sampled graphs.

    Components are explored lazily with fresh randomness per sample, which
    matches the marginal law of one vertex's component in a full graph
    draw. Components larger than max_size are tallied as oversize and not
    canonized (each still counts as one sample)."""
    if samples < 1 or n < 2 or max_size < 1:
        raise ValueError("need samples >= 1, n >= 2, max_size >= 1")
    if lam < 0 or lam > n:
        raise ValueError("need 0 <= lam <= n")
    tasks = [(ss, sz, n, lam, max_size) for ss, sz in _split(seed, workers, samples)]
    parts = _map_tasks(_task_components, tasks, parallel)
    counts: Counter = Counter()
    oversize = 0
    for part in parts:
        counts.update(part["counts"])
        oversize += part["oversize"]
    return ComponentFrequencies(dict(counts), oversize, samples, seed, workers)
