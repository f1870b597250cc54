"""Mutant construction from the Base / Ref / Diffs decomposition.

mutant = base + F_eff * (ref - target) + sum_k F * (x_a_k - x_b_k)

The ref term is dropped for ``ref='none'``. Indices used for a random base,
a random ref and the difference vectors are mutually distinct and distinct
from the target. With the archive enabled the subtrahend of the last
difference is drawn from the population together with the archive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError, InfeasibleOperatorError

P_BEST_FRACTION = 0.11

# weighted-F schedule: (progress upper bound, factor)
WEIGHTED_F_SCHEDULE = ((0.2, 0.7), (0.4, 0.8))
WEIGHTED_F_LATE = 1.2


@dataclass(frozen=True)
class MutationPlan:
    base: str = "rand"
    ref: str = "none"
    diffs: int = 1
    weighted_f: bool = False
    archive: bool = False
    p_best_fraction: float = P_BEST_FRACTION

    def __post_init__(self):
        if self.base not in ("rand", "best", "target"):
            raise ConfigurationError(f"unknown base {self.base!r}")
        if self.ref not in ("none", "pbest", "best", "rand"):
            raise ConfigurationError(f"unknown ref {self.ref!r}")
        if self.diffs not in (1, 2):
            raise ConfigurationError(f"diffs must be 1 or 2, got {self.diffs!r}")

    @classmethod
    def from_config(cls, config):
        return cls(
            base=config.base,
            ref=config.ref,
            diffs=config.diffs,
            weighted_f=config.weighted_f,
            archive=config.archive,
        )

    @property
    def required_indices(self):
        return 2 * self.diffs + (self.base == "rand") + (self.ref == "rand")

    def check_feasible(self, pop_size):
        need = self.required_indices
        if need > pop_size - 1:
            raise InfeasibleOperatorError(
                f"mutation needs {need} distinct indices besides the target; "
                f"population size {pop_size} offers only {pop_size - 1}"
            )


def weighted_f(f, progress, enabled=True):
    """Scale factor applied to the ref term at a given budget fraction."""
    if not enabled:
        return f
    for bound, factor in WEIGHTED_F_SCHEDULE:
        if progress < bound:
            return factor * f
    return WEIGHTED_F_LATE * f


def pbest_pool_size(pop_size, fraction):
    return min(pop_size, max(2, math.ceil(fraction * pop_size)))


def select_pbest(fitness, fraction, rng, size=None):
    """Uniform index(es) among the ``ceil(fraction * lambda)`` best members."""
    fitness = np.asarray(fitness)
    pool = np.argsort(fitness, kind="stable")[: pbest_pool_size(fitness.size, fraction)]
    return pool[rng.integers(pool.size, size=size)]


def archive_push(archive, loser, max_size, rng):
    """Append ``loser`` and evict uniformly random rows beyond ``max_size``."""
    loser = np.atleast_2d(np.asarray(loser, dtype=float))
    archive = np.vstack([archive, loser]) if len(archive) else loser.copy()
    return shrink_archive(archive, max_size, rng)


def shrink_archive(archive, max_size, rng):
    """Keep a uniformly random subset of ``max_size`` rows, in their original order."""
    if len(archive) <= max_size:
        return archive
    keep = np.sort(rng.choice(len(archive), size=max(int(max_size), 0), replace=False))
    return archive[keep]


def _distinct_indices(targets, pop_size, k, rng):
    # random keys with the target masked out; the k smallest give a uniform
    # ordered sample without replacement
    keys = rng.random((targets.size, pop_size))
    keys[np.arange(targets.size), targets] = np.inf
    return np.argsort(keys, axis=1)[:, :k]


def mutate_batch(plan, targets, population, fitness, archive, f, progress, rng):
    """Mutants for every index in ``targets``, built from one population snapshot.

    ``f`` is a scalar or one scale factor per target. Returns an array of
    shape ``(len(targets), D)``.
    """
    population = np.asarray(population, dtype=float)
    targets = np.atleast_1d(np.asarray(targets, dtype=int))
    pop_size = population.shape[0]
    plan.check_feasible(pop_size)
    n = targets.size
    f = np.broadcast_to(np.asarray(f, dtype=float), (n,))[:, None]

    need = plan.required_indices
    use_archive = plan.archive and archive is not None and len(archive) > 0
    from_pop = need - 1 if use_archive else need
    picks = _distinct_indices(targets, pop_size, from_pop, rng)
    cursor = 0

    if plan.base == "rand":
        base = population[picks[:, cursor]]
        cursor += 1
    elif plan.base == "best":
        base = np.broadcast_to(population[np.argmin(fitness)], (n, population.shape[1]))
    else:
        base = population[targets]
    mutant = np.array(base, dtype=float)

    if plan.ref != "none":
        if plan.ref == "rand":
            ref = population[picks[:, cursor]]
            cursor += 1
        elif plan.ref == "best":
            ref = population[np.argmin(fitness)]
        else:
            ref = population[select_pbest(fitness, plan.p_best_fraction, rng, size=n)]
        f_eff = weighted_f(f, progress, plan.weighted_f)
        mutant += f_eff * (ref - population[targets])

    for k in range(plan.diffs):
        plus = population[picks[:, cursor]]
        cursor += 1
        if k == plan.diffs - 1 and use_archive:
            union = np.vstack([population, archive])
            keys = rng.random((n, union.shape[0]))
            rows = np.arange(n)
            keys[rows, targets] = np.inf
            for col in range(cursor):
                keys[rows, picks[:, col]] = np.inf
            minus = union[np.argmin(keys, axis=1)]
        else:
            minus = population[picks[:, cursor]]
            cursor += 1
        mutant += f * (plus - minus)
    return mutant


def mutate(plan, target_index, population, fitness, archive, f, progress, rng):
    """Mutant vector for a single target."""
    return mutate_batch(
        plan, [target_index], population, fitness, archive, f, progress, rng
    )[0]
