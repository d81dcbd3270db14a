"""Galton-Watson tree sampling with Poisson or binomial offspring."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rooted import RootedTree

__all__ = ["GWParams", "GWSample", "sample_tree", "poisson_pmf"]

DEFAULT_MAX_DEPTH = 64
DEFAULT_MAX_SIZE = 1_000_000


@dataclass(frozen=True)
class GWParams:
    """Offspring law and truncation guards for tree sampling.

    ``offspring`` is "poisson" (mean lam) or "binomial" (Binomial(population,
    lam/population), the law of fresh neighbors during sparse graph
    exploration). Sampling stops at max_depth generations or once the tree
    holds max_size nodes; hitting either guard marks the sample truncated.
    """

    lam: float
    offspring: str = "poisson"
    population: int | None = None
    max_depth: int = DEFAULT_MAX_DEPTH
    max_size: int = DEFAULT_MAX_SIZE

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("offspring mean must be nonnegative")
        if self.offspring not in ("poisson", "binomial"):
            raise ValueError("offspring must be 'poisson' or 'binomial'")
        if self.offspring == "binomial":
            if self.population is None or self.population < 1:
                raise ValueError("binomial offspring needs a population size")
            if self.lam > self.population:
                raise ValueError("lam cannot exceed the population")
        if self.max_depth < 1 or self.max_size < 1:
            raise ValueError("truncation guards must be positive")


@dataclass(frozen=True)
class GWSample:
    tree: RootedTree
    truncated: bool
    reason: str | None = None  # "depth" or "size" when truncated


def _draw_offspring(params: GWParams, rng: np.random.Generator, k: int) -> np.ndarray:
    if params.offspring == "poisson":
        return rng.poisson(params.lam, k)
    return rng.binomial(params.population, params.lam / params.population, k)


def sample_tree(params: GWParams, rng: np.random.Generator) -> GWSample:
    """Sample one tree breadth-first, one generation per batch of draws."""
    levels: list[np.ndarray] = []
    width = 1
    size = 1
    truncated = False
    reason = None
    for _ in range(params.max_depth):
        counts = _draw_offspring(params, rng, width)
        nxt = int(counts.sum())
        if size + nxt > params.max_size:
            truncated = True
            reason = "size"
            break
        levels.append(counts)
        size += nxt
        width = nxt
        if width == 0:
            break
    else:
        if width > 0:
            truncated = True
            reason = "depth"
    return GWSample(RootedTree.from_offspring_levels(levels), truncated, reason)


def poisson_pmf(lam: float, k: int) -> float:
    """P(Poisson(lam) = k), evaluated in log space for stability."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if lam == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))
