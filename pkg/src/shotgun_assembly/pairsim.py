"""Vectorized sampling of independent Galton-Watson tree pairs.

The estimators in this package all reduce to questions about a pair of
independent trees: are they isomorphic, to what depth do their restrictions
agree, do both survive to a given depth. Sampling pairs one at a time in
Python is far too slow for the sample sizes involved, so this module grows
many pairs level-synchronously with flat numpy draws.

The key observation is that a pair stops being interesting the moment its
two generation-size sequences diverge: if the level-l counts differ, no
restriction beyond depth l-1 can match. Each chunk therefore draws one
generation at a time for all still-live pairs, retires pairs whose counts
diverge or hit zero, and only rebuilds explicit tree structures for the
small surviving fraction that needs a real isomorphism check.

Level 1 is special-cased: the joint law of the two root offspring counts
is collapsed to a single uniform draw against the exact category table
{equal = k, both zero, exactly one zero, unequal both positive}, which
roughly halves total work since most pairs never get past the roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rooted import RootedTree, canon_tree, iso_depth, spine_event

__all__ = [
    "PairChunk",
    "offspring_spec",
    "sieve_chunks",
    "depth_profile_counts",
    "full_iso_counts",
    "small_iso_counts",
    "spine_counts",
    "split_workers",
    "worker_sizes",
]

CHUNK_PAIRS = 1 << 18

# Pair outcomes.
MISMATCH = 0  # generation sizes first differ at level `stop`
BOTH_DEAD = 1  # both generation sizes are zero at level `stop`
CAPPED = 2  # counts still equal and positive at the depth cap
OVERSIZE = 3  # joint size guard tripped while still matching

ALL_OUTCOMES = (MISMATCH, BOTH_DEAD, CAPPED)


def offspring_spec(lam: float, offspring: str = "poisson", population: int | None = None) -> tuple:
    """Validate and pack an offspring law for the samplers below."""
    if lam < 0:
        raise ValueError("offspring mean must be nonnegative")
    if offspring == "poisson":
        return ("poisson", lam)
    if offspring == "binomial":
        if population is None or population < 1 or lam > population:
            raise ValueError("binomial offspring needs population >= lam")
        return ("binomial", lam, population)
    raise ValueError("offspring must be 'poisson' or 'binomial'")


def _draws(rng: np.random.Generator, spec: tuple, k: int) -> np.ndarray:
    kind = spec[0]
    if kind == "poisson":
        return rng.poisson(spec[1], k)
    return rng.binomial(spec[2], spec[1] / spec[2], k)


def _pmf(spec: tuple, k: int) -> float:
    if spec[0] == "poisson":
        lam = spec[1]
        if lam == 0:
            return 1.0 if k == 0 else 0.0
        return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))
    lam, pop = spec[1], spec[2]
    if not 0 <= k <= pop:
        return 0.0
    p = lam / pop
    if p == 0:
        return 1.0 if k == 0 else 0.0
    if p == 1:
        return 1.0 if k == pop else 0.0
    return math.exp(
        math.lgamma(pop + 1)
        - math.lgamma(k + 1)
        - math.lgamma(pop - k + 1)
        + k * math.log(p)
        + (pop - k) * math.log1p(-p)
    )


_LEVEL1_CACHE: dict = {}


def _level1_table(spec: tuple) -> tuple[np.ndarray, int]:
    """Cumulative category boundaries for one uniform deciding the joint
    root-offspring outcome of a pair.

    Categories, in order: equal = k for k = 1..K; both zero; left zero only;
    right zero only; unequal both positive; equal beyond K (vanishing mass,
    resolved by table extension per hit). K is chosen so the beyond-K mass
    is below 1e-22.
    """
    if spec in _LEVEL1_CACHE:
        return _LEVEL1_CACHE[spec]
    p0 = _pmf(spec, 0)
    # total mass of {equal counts}, summed to machine precision
    eq_total = 0.0
    k = 0
    while True:
        t = _pmf(spec, k) ** 2
        eq_total += t
        if k > 2 and t < 1e-30:
            break
        k += 1
    kmax = k
    agree = []
    k = 1
    while k <= kmax:
        t = _pmf(spec, k) ** 2
        agree.append(t)
        if t < 1e-22 and k > 2:
            break
        k += 1
    K = len(agree)
    one_zero = p0 * (1.0 - p0)
    rem = max(eq_total - p0 * p0 - math.fsum(agree), 0.0)
    alive_mism = max(1.0 - eq_total - 2.0 * one_zero, 0.0)
    probs = agree + [p0 * p0, one_zero, one_zero, alive_mism, rem]
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    out = (cum, K)
    _LEVEL1_CACHE[spec] = out
    return out


def _level1_extend(spec: tuple, k_start: int, residual: float) -> int:
    """Resolve a uniform that landed in the beyond-K equal-count remainder."""
    k = k_start
    while True:
        t = _pmf(spec, k) ** 2
        if residual < t or t == 0.0:
            return k
        residual -= t
        k += 1


@dataclass
class PairChunk:
    """Per-pair summaries for one chunk of simulated pairs.

    match_depth is the deepest level through which the two generation-size
    sequences agree (positive at every level up to it). died1/died2 record
    whether each tree's frontier was empty at the stopping level, which
    pins the exact height of that tree at stop - 1. Offspring structures
    are rebuilt only for pairs with match_depth >= keep_min whose outcome
    is in keep_outcomes; kept_levels[j] holds the per-level offspring
    arrays of both trees for pair kept_ids[j], complete up to the
    stopping level.
    """

    outcome: np.ndarray
    stop: np.ndarray
    match_depth: np.ndarray
    died1: np.ndarray
    died2: np.ndarray
    kept_ids: np.ndarray
    kept_levels: list[tuple[list[np.ndarray], list[np.ndarray]]]

    @property
    def n_pairs(self) -> int:
        return len(self.outcome)

    def tree_pair(self, j: int) -> tuple[RootedTree, RootedTree]:
        l1, l2 = self.kept_levels[j]
        return (
            RootedTree.from_offspring_levels(l1),
            RootedTree.from_offspring_levels(l2),
        )


def _sieve_chunk(
    rng: np.random.Generator,
    spec: tuple,
    m: int,
    depth_cap: int,
    size_cap: int,
    keep_min: int,
    keep_outcomes: tuple[int, ...],
) -> PairChunk:
    outcome = np.full(m, CAPPED, dtype=np.int8)
    stop = np.full(m, depth_cap, dtype=np.int32)
    died1 = np.zeros(m, dtype=bool)
    died2 = np.zeros(m, dtype=bool)

    # level 1: one uniform per pair against the joint category table
    cum, K = _level1_table(spec)
    u = rng.random(m)
    cat = np.searchsorted(cum, u, side="right")
    z = np.where(cat < K, cat + 1, 0).astype(np.int64)
    tail = np.flatnonzero(cat == K + 4)
    for i in tail:
        z[i] = _level1_extend(spec, K + 1, float(u[i] - cum[K + 3]))
    cont1 = (cat < K) | (cat == K + 4)

    ids = np.flatnonzero(~cont1)
    c = cat[ids]
    dead = c == K
    outcome[ids] = np.where(dead, BOTH_DEAD, MISMATCH).astype(np.int8)
    stop[ids] = 1
    died1[ids] = dead | (c == K + 1)
    died2[ids] = dead | (c == K + 2)

    # Per-level records for structure rebuilding: active pair ids, the
    # shared per-node counts entering the level, and both flat draw arrays.
    # At level 1 both trees share the single root count z.
    records: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
    arange_m = np.arange(m, dtype=np.int64)
    records.append((arange_m, np.ones(m, dtype=np.int64), arange_m, z, z))

    act_ids = arange_m[cont1]
    cur = z[cont1]
    act_size = 1 + cur
    over = act_size > size_cap
    if over.any():
        ids = act_ids[over]
        outcome[ids] = OVERSIZE
        stop[ids] = 1
        keep_mask = ~over
        act_ids, cur, act_size = act_ids[keep_mask], cur[keep_mask], act_size[keep_mask]

    for lev in range(2, depth_cap + 1):
        if len(act_ids) == 0:
            break
        total = int(cur.sum())
        draws1 = _draws(rng, spec, total).astype(np.int64, copy=False)
        draws2 = _draws(rng, spec, total).astype(np.int64, copy=False)
        offs = np.zeros(len(cur), dtype=np.int64)
        np.cumsum(cur[:-1], out=offs[1:])
        z1 = np.add.reduceat(draws1, offs)
        z2 = np.add.reduceat(draws2, offs)
        records.append((act_ids, cur, offs, draws1, draws2))

        eq = z1 == z2
        dead = eq & (z1 == 0)
        mism = ~eq
        if mism.any():
            ids = act_ids[mism]
            outcome[ids] = MISMATCH
            stop[ids] = lev
            died1[ids] = z1[mism] == 0
            died2[ids] = z2[mism] == 0
        if dead.any():
            ids = act_ids[dead]
            outcome[ids] = BOTH_DEAD
            stop[ids] = lev
            died1[ids] = True
            died2[ids] = True

        idx = np.flatnonzero(eq & (z1 > 0))
        if len(idx) == 0:
            act_ids = act_ids[:0]
            break
        new_size = act_size[idx] + z1[idx]
        over = new_size > size_cap
        if over.any():
            ids = act_ids[idx[over]]
            outcome[ids] = OVERSIZE
            stop[ids] = lev
            idx = idx[~over]
            new_size = new_size[~over]
        act_ids = act_ids[idx]
        cur = z1[idx]
        act_size = new_size

    match_depth = np.where(outcome == MISMATCH, stop - 1, stop)
    match_depth[outcome == BOTH_DEAD] -= 1

    keep = match_depth >= keep_min
    if keep_outcomes != ALL_OUTCOMES:
        mask = np.zeros(m, dtype=bool)
        for oc in keep_outcomes:
            mask |= outcome == oc
        keep &= mask
    else:
        keep &= outcome != OVERSIZE
    kept_ids = np.flatnonzero(keep)
    kept_levels = _rebuild(records, kept_ids, stop)
    return PairChunk(outcome, stop, match_depth, died1, died2, kept_ids, kept_levels)


def _rebuild(
    records: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]],
    kept_ids: np.ndarray,
    stop: np.ndarray,
) -> list[tuple[list[np.ndarray], list[np.ndarray]]]:
    if len(kept_ids) == 0:
        return []
    out: list[tuple[list[np.ndarray], list[np.ndarray]]] = [([], []) for _ in kept_ids]
    for lev_idx, (ids, cur, offs, draws1, draws2) in enumerate(records):
        lev = lev_idx + 1
        pos = np.searchsorted(ids, kept_ids)
        for j, p in enumerate(kept_ids):
            if stop[p] < lev:
                continue
            q = pos[j]
            if q >= len(ids) or ids[q] != p:
                continue
            a, c = offs[q], cur[q]
            out[j][0].append(draws1[a : a + c])
            out[j][1].append(draws2[a : a + c])
    return out


def sieve_chunks(
    rng: np.random.Generator,
    spec: tuple,
    n_pairs: int,
    depth_cap: int,
    size_cap: int,
    keep_min: int = 2,
    keep_outcomes: tuple[int, ...] = ALL_OUTCOMES,
    chunk: int = CHUNK_PAIRS,
):
    """Yield PairChunk objects covering n_pairs total pairs."""
    if depth_cap < 1:
        raise ValueError("depth_cap must be >= 1")
    if size_cap < 1:
        raise ValueError("size_cap must be >= 1")
    done = 0
    while done < n_pairs:
        m = min(chunk, n_pairs - done)
        yield _sieve_chunk(rng, spec, m, depth_cap, size_cap, keep_min, keep_outcomes)
        done += m


def _pair_depths(chk: PairChunk, r_max: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pair truncation-iso depth and surviving-iso depth, capped at r_max.

    Returns (g_depth, p_depth, usable) where usable is False for pairs whose
    size guard tripped before the answer was determined.
    """
    out = chk.outcome
    usable = out != OVERSIZE

    INF = np.int64(1 << 60)
    h1 = np.where(chk.died1, chk.stop.astype(np.int64) - 1, INF)
    h2 = np.where(chk.died2, chk.stop.astype(np.int64) - 1, INF)

    # Arithmetic fast path. Pairs that both died at level <= 2 are stars of
    # equal size, hence isomorphic at every depth; mismatched pairs agree
    # exactly through match_depth when that is 0 or 1 (restrictions there
    # are determined by generation sizes alone).
    g = np.where(out == BOTH_DEAD, np.int64(r_max), chk.match_depth.astype(np.int64))
    g = np.minimum(g, r_max)

    for j, p in enumerate(chk.kept_ids):
        t1, t2 = chk.tree_pair(j)
        g[p] = iso_depth(t1, t2, r_max)

    p_depth = np.minimum(g, np.minimum(h1, h2))
    return g, p_depth, usable


def depth_profile_counts(
    rng: np.random.Generator,
    spec: tuple,
    n_pairs: int,
    r_max: int,
    size_cap: int,
) -> dict:
    """Tallies for truncation-iso and surviving-iso probabilities.

    g_ge[r] counts pairs whose depth-r truncations are isomorphic;
    p_ge[r] additionally requires both trees to reach depth r. Index 0
    counts every usable pair. Oversize pairs are excluded and tallied.
    """
    g_ge = np.zeros(r_max + 1, dtype=np.int64)
    p_ge = np.zeros(r_max + 1, dtype=np.int64)
    excluded = 0
    total = 0
    for chk in sieve_chunks(rng, spec, n_pairs, r_max, size_cap, keep_min=2):
        g, p, usable = _pair_depths(chk, r_max)
        excluded += int((~usable).sum())
        total += chk.n_pairs
        gb = np.bincount(g[usable], minlength=r_max + 1)
        pb = np.bincount(p[usable], minlength=r_max + 1)
        g_ge += gb[::-1].cumsum()[::-1]
        p_ge += pb[::-1].cumsum()[::-1]
    return {"g_ge": g_ge, "p_ge": p_ge, "excluded": excluded, "samples": total}


def full_iso_counts(
    rng: np.random.Generator,
    spec: tuple,
    n_pairs: int,
    depth_cap: int,
    size_cap: int,
) -> dict:
    """Tallies for whole-tree isomorphism between independent pairs.

    A pair counts as an event only when both trees die within the guards
    and their full shapes match. Pairs that outlive either guard are
    counted as truncated and contribute no event.
    """
    events = 0
    truncated = 0
    total = 0
    for chk in sieve_chunks(
        rng, spec, n_pairs, depth_cap, size_cap, keep_min=2, keep_outcomes=(BOTH_DEAD,)
    ):
        total += chk.n_pairs
        out = chk.outcome
        truncated += int(((out == CAPPED) | (out == OVERSIZE)).sum())
        events += int(((out == BOTH_DEAD) & (chk.stop <= 2)).sum())
        for j in range(len(chk.kept_ids)):
            t1, t2 = chk.tree_pair(j)
            if canon_tree(t1) == canon_tree(t2):
                events += 1
    return {"events": events, "truncated": truncated, "samples": total}


def small_iso_counts(
    rng: np.random.Generator,
    spec: tuple,
    n_pairs: int,
    max_size: int,
) -> dict:
    """Tallies for the event {trees isomorphic and at most max_size nodes}.

    The size guard doubles as the event boundary here: any pair that grows
    past max_size simply fails the event, so nothing is excluded.
    """
    events = 0
    total = 0
    for chk in sieve_chunks(
        rng,
        spec,
        n_pairs,
        max_size + 1,
        max_size,
        keep_min=2,
        keep_outcomes=(BOTH_DEAD,),
    ):
        total += chk.n_pairs
        events += int(((chk.outcome == BOTH_DEAD) & (chk.stop <= 2)).sum())
        for j in range(len(chk.kept_ids)):
            t1, t2 = chk.tree_pair(j)
            if canon_tree(t1) == canon_tree(t2):
                events += 1
    return {"events": events, "samples": total}


def _regrow(
    tree: RootedTree,
    rng: np.random.Generator,
    spec: tuple,
    target_depth: int,
    size_cap: int,
) -> RootedTree | None:
    """Extend a live tree by fresh draws until death or target_depth.

    Returns None when the size guard trips, meaning the event under study
    is already decided false (the tree is too large to matter).
    """
    h = tree.height()
    # nodes are in breadth-first order, so each level is a contiguous run
    out_levels: list[np.ndarray] = []
    i = 0
    for d in range(h):
        counts = []
        while i < tree.n and tree.depth[i] == d:
            counts.append(len(tree.children[i]))
            i += 1
        out_levels.append(np.asarray(counts, dtype=np.int64))
    frontier = tree.n - i
    size = tree.n
    depth = h
    while frontier > 0 and depth < target_depth:
        counts = _draws(rng, spec, frontier).astype(np.int64, copy=False)
        out_levels.append(counts)
        frontier = int(counts.sum())
        size += frontier
        depth += 1
        if size > size_cap:
            return None
    return RootedTree.from_offspring_levels(out_levels)


def _max_nonbinary_level(levels: list[np.ndarray]) -> int:
    """Deepest level holding a vertex with a child count other than 0 or 2,
    or -1 if none. levels[d] lists the child counts of the level-d vertices;
    the deepest vertices have no recorded counts and are not constrained."""
    worst = -1
    for d in range(len(levels) - 1, -1, -1):
        a = levels[d]
        if np.any((a != 0) & (a != 2)):
            worst = d
            break
    return worst


def spine_counts(
    rng: np.random.Generator,
    post_rng: np.random.Generator,
    spec: tuple,
    n_pairs: int,
    r_values: list[int],
    side_budget: int,
    size_cap: int,
) -> dict:
    """Tallies of the decorated-line pasting event for each r in r_values.

    The event at radius r requires both trees to reach depth r, agree as
    depth-r truncations, have unequal heights both at most r + side_budget,
    branch only 0-or-2-fold at levels >= r, and differ by a bounded pendant
    chain. Only pairs whose generation sizes diverge (outcome MISMATCH) can
    have unequal heights, and only those matching past min(r_values) can
    satisfy any requested radius, so just that sliver is materialized;
    post_rng extends the still-live trees past the sieve's stopping level
    to pin their exact heights.
    """
    r_values = sorted(r_values)
    r_min, r_max = r_values[0], r_values[-1]
    if r_min <= side_budget:
        raise ValueError("need r > side_budget for every requested r")
    depth_cap = r_max + side_budget + 1
    events = {r: 0 for r in r_values}
    excluded = 0
    total = 0
    for chk in sieve_chunks(
        rng,
        spec,
        n_pairs,
        depth_cap,
        size_cap,
        keep_min=r_min,
        keep_outcomes=(MISMATCH,),
    ):
        total += chk.n_pairs
        excluded += int((chk.outcome == OVERSIZE).sum())
        for j, p in enumerate(chk.kept_ids):
            l1, l2 = chk.kept_levels[j]
            # candidate radii: above every non-binary branch level, at most
            # the matched depth
            r_hi = min(r_max, int(chk.match_depth[p]))
            r_lo = max(
                r_min,
                _max_nonbinary_level(l1) + 1,
                _max_nonbinary_level(l2) + 1,
            )
            if r_lo > r_hi:
                continue
            t1, t2 = chk.tree_pair(j)
            target = r_hi + side_budget + 1
            if not chk.died1[p]:
                t1 = _regrow(t1, post_rng, spec, target, size_cap)
            if not chk.died2[p]:
                t2 = _regrow(t2, post_rng, spec, target, size_cap)
            if t1 is None or t2 is None:
                excluded += 1
                continue
            h1, h2 = t1.height(), t2.height()
            if h1 == h2:
                continue
            for r in r_values:
                if not r_lo <= r <= r_hi:
                    continue
                if min(h1, h2) < r or max(h1, h2) > r + side_budget:
                    continue
                if spine_event(t1, t2, r, side_budget):
                    events[r] += 1
    return {"events": events, "excluded": excluded, "samples": total}


def worker_sizes(n_samples: int, workers: int) -> list[int]:
    """Deterministic split of n_samples across workers."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    base, rem = divmod(n_samples, workers)
    return [base + (1 if w < rem else 0) for w in range(workers)]


def split_workers(seed: int, workers: int) -> list[np.random.SeedSequence]:
    """Independent per-worker seed streams, a pure function of (seed, workers)."""
    return np.random.SeedSequence(seed).spawn(workers)
