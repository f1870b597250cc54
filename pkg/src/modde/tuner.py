"""Iterated racing over the configuration space, scored by per-run AOC.

Candidates are run block by block, one block being one problem instance
with a fixed run seed. After ``first_test`` blocks, and after every block
thereafter, a Friedman test over the candidates' ranks decides whether
they differ; if so, the candidates whose rank sum exceeds the best one's
by more than the Conover critical difference are dropped. Later
iterations sample new candidates around the surviving elites. Results are
cached per (candidate, block), so elites re-entering a race cost nothing
on blocks they have already seen.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import engine, metrics
from .config import CATEGORICAL, F_RANGE, CR_RANGE, LAMBDA_RANGE, Configuration
from .exceptions import InfeasibleOperatorError
from .mutation import MutationPlan

log = logging.getLogger(__name__)

CATEGORICAL_RESAMPLE_RATE = 0.2
NUMERIC_SIGMA_FRACTION = 0.2
N_PARAMETERS = len(CATEGORICAL) + 3


def is_feasible(config):
    """Whether the mutation admits the smallest population the run will reach."""
    smallest = 4 if config.lpsr else config.population_size(1)
    try:
        MutationPlan.from_config(config).check_feasible(smallest)
    except InfeasibleOperatorError:
        return False
    return True


def _uniform_values(rng):
    values = {name: domain[rng.integers(len(domain))] for name, domain in CATEGORICAL.items()}
    values["lambda_"] = int(rng.integers(LAMBDA_RANGE[0], LAMBDA_RANGE[1] + 1))
    values["f"] = float(rng.uniform(*F_RANGE))
    values["cr"] = float(rng.uniform(*CR_RANGE))
    return values


def _python_scalars(values):
    # numpy scalars drawn from the domains would fail the strict type check
    out = {}
    for name, value in values.items():
        if isinstance(value, np.bool_):
            value = bool(value)
        elif isinstance(value, np.integer):
            value = int(value)
        elif isinstance(value, np.floating):
            value = float(value)
        elif isinstance(value, np.str_):
            value = str(value)
        out[name] = value
    return out


def sample_configuration(rng, max_tries=1000):
    """Uniform draw from the search space, restricted to feasible mutations."""
    for _ in range(max_tries):
        config = Configuration(**_python_scalars(_uniform_values(rng)))
        if is_feasible(config):
            return config
    raise RuntimeError("could not sample a feasible configuration")


def _truncated_normal(center, sigma, low, high, rng):
    a, b = (low - center) / sigma, (high - center) / sigma
    return float(stats.truncnorm.rvs(a, b, loc=center, scale=sigma, random_state=rng))


def sample_around(elite, rng, max_tries=1000):
    """Neighbour of ``elite``: categoricals resampled at a fixed rate, numerics jittered."""
    lam_lo, lam_hi = LAMBDA_RANGE
    for _ in range(max_tries):
        values = {}
        for name, domain in CATEGORICAL.items():
            if rng.random() < CATEGORICAL_RESAMPLE_RATE:
                values[name] = domain[rng.integers(len(domain))]
            else:
                values[name] = getattr(elite, name)
        lam = elite.lambda_ if elite.lambda_ is not None else lam_lo
        lam = _truncated_normal(lam, NUMERIC_SIGMA_FRACTION * (lam_hi - lam_lo), lam_lo, lam_hi, rng)
        values["lambda_"] = int(min(max(round(lam), lam_lo), lam_hi))
        values["f"] = _truncated_normal(
            elite.f, NUMERIC_SIGMA_FRACTION * (F_RANGE[1] - F_RANGE[0]), *F_RANGE, rng
        )
        values["cr"] = _truncated_normal(
            elite.cr, NUMERIC_SIGMA_FRACTION * (CR_RANGE[1] - CR_RANGE[0]), *CR_RANGE, rng
        )
        config = Configuration(**_python_scalars(values))
        if is_feasible(config):
            return config
    raise RuntimeError("could not sample a feasible neighbour")


@dataclass
class TuningTask:
    """What to tune on and how much it may cost.

    ``tuning_budget`` counts DE runs; ``run_budget`` counts objective
    evaluations inside one run.
    """

    instances: list
    run_budget: int
    tuning_budget: int = 10_000
    first_test: int = 5
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not self.instances:
            raise ValueError("a tuning task needs at least one instance")
        if self.first_test < 1:
            raise ValueError("first_test must be >= 1")

    def block(self, k):
        """Instance and run seed of block ``k``; instances are cycled."""
        instance = self.instances[k % len(self.instances)]
        seed = int(np.random.SeedSequence([int(self.seed), k]).generate_state(1)[0])
        return instance, seed


class Evaluator:
    """Runs candidates on blocks, memoising AOCs and counting DE runs."""

    def __init__(self, task):
        self.task = task
        self.cache = {}
        self.runs = 0

    def cached(self, config, k):
        return (config.digest(), k) in self.cache

    def __call__(self, config, k):
        key = (config.digest(), k)
        if key not in self.cache:
            instance, seed = self.task.block(k)
            result = engine.run(config, instance, self.task.run_budget, seed)
            self.cache[key] = metrics.run_aoc(result.log, self.task.run_budget)
            self.runs += 1
        return self.cache[key]


def friedman_test(matrix):
    """Friedman statistic and p-value for a ``(blocks, candidates)`` matrix.

    Ties get average ranks with the usual correction; returns ``nan`` for
    the p-value when every block is fully tied.
    """
    matrix = np.asarray(matrix, dtype=float)
    n, k = matrix.shape
    ranks = stats.rankdata(matrix, axis=1)
    rank_sums = ranks.sum(axis=0)
    ties = 0.0
    for row in matrix:
        _, counts = np.unique(row, return_counts=True)
        ties += np.sum(counts**3 - counts)
    denom = n * k * (k + 1) - ties / (k - 1)
    if denom <= 0:
        return np.nan, np.nan, ranks
    statistic = 12.0 * np.sum((rank_sums - n * (k + 1) / 2.0) ** 2) / denom
    return statistic, float(stats.chi2.sf(statistic, k - 1)), ranks


def conover_survivors(ranks, alpha):
    """Indices whose rank sum is within the Conover critical difference of the best."""
    n, k = ranks.shape
    rank_sums = ranks.sum(axis=0)
    a = np.sum(ranks**2)
    spread = 2.0 * (n * a - np.sum(rank_sums**2)) / ((n - 1) * (k - 1))
    critical = stats.t.ppf(1.0 - alpha / 2.0, (n - 1) * (k - 1)) * math.sqrt(max(spread, 0.0))
    return np.flatnonzero(np.abs(rank_sums - rank_sums.min()) <= critical)


@dataclass
class RaceResult:
    survivors: list
    aoc: dict  # digest -> list of AOCs over the raced blocks
    blocks: int
    runs: int
    eliminated: dict = field(default_factory=dict)  # digest -> block index

    def mean_aoc(self, config):
        return float(np.mean(self.aoc[config.digest()]))


def _block_cost(candidates, k, evaluator):
    return sum(not evaluator.cached(c, k) for c in candidates)


def race(candidates, task, rng=None, budget=None, evaluator=None):
    """Race ``candidates`` until ``budget`` runs are spent or one remains.

    The statistical test runs after ``task.first_test`` blocks and after
    every later block. The candidate with the lowest mean AOC is never
    dropped. ``rng`` is accepted for interface symmetry; racing itself is
    deterministic given the task's block seeds.
    """
    candidates = list({c.digest(): c for c in candidates}.values())
    if len(candidates) < 2:
        raise ValueError("a race needs at least two distinct candidates")
    evaluator = evaluator or Evaluator(task)
    budget = task.tuning_budget if budget is None else budget
    upfront = sum(_block_cost(candidates, k, evaluator) for k in range(task.first_test))
    if upfront > budget:
        raise ValueError(
            f"budget of {budget} runs cannot cover {task.first_test} blocks "
            f"for {len(candidates)} candidates ({upfront} runs)"
        )
    start_runs = evaluator.runs
    alive = list(candidates)
    scores = {c.digest(): [] for c in candidates}
    eliminated = {}
    k = 0
    while len(alive) > 1:
        cost = _block_cost(alive, k, evaluator)
        if evaluator.runs - start_runs + cost > budget:
            break
        for c in alive:
            scores[c.digest()].append(evaluator(c, k))
        k += 1
        if k < task.first_test:
            continue
        matrix = np.array([scores[c.digest()] for c in alive]).T
        _, pvalue, ranks = friedman_test(matrix)
        if not (pvalue < task.alpha):
            continue
        keep = set(conover_survivors(ranks, task.alpha).tolist())
        keep.add(int(np.argmin(matrix.mean(axis=0))))
        for i, c in enumerate(alive):
            if i not in keep:
                eliminated[c.digest()] = k - 1
        alive = [c for i, c in enumerate(alive) if i in keep]
    alive.sort(key=lambda c: float(np.mean(scores[c.digest()])))
    return RaceResult(alive, scores, k, evaluator.runs - start_runs, eliminated)


@dataclass
class TuneResult:
    elites: list
    mean_aoc: list
    runs: int
    iterations: int
    log_rows: list

    def write_log(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("iteration", "candidate", "block", "function", "instance", "aoc", "eliminated"))
            writer.writerows(self.log_rows)


def default_iterations(n_parameters=N_PARAMETERS):
    return int(math.floor(2 + math.log2(n_parameters)))


def tune(task, iterations=None, rng=None, max_elites=None):
    """Iterated racing; returns survivors of the last race ranked by mean AOC."""
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = engine.make_rng(task.seed if rng is None else rng, stream=0x7E5E)
    iterations = default_iterations() if iterations is None else int(iterations)
    max_elites = default_iterations() if max_elites is None else max_elites
    evaluator = Evaluator(task)
    elites, elite_scores = [], []
    rows = []
    done = 0
    for it in range(1, iterations + 1):
        remaining = task.tuning_budget - evaluator.runs
        iteration_budget = remaining // (iterations - it + 1)
        wanted = max(2, iteration_budget // (task.first_test + min(5, it)))
        n_new = max(1, wanted - len(elites))
        pool = list(elites)
        seen = {c.digest() for c in pool}
        for _ in range(n_new):
            if it == 1 or not elites:
                cand = sample_configuration(rng)
            else:
                weights = np.arange(len(elites), 0, -1, dtype=float)
                parent = elites[rng.choice(len(elites), p=weights / weights.sum())]
                cand = sample_around(parent, rng)
            if cand.digest() not in seen:
                seen.add(cand.digest())
                pool.append(cand)

        # drop newcomers the budget cannot carry through the first test
        def upfront(cands):
            return sum(_block_cost(cands, k, evaluator) for k in range(task.first_test))

        while len(pool) > max(len(elites), 1) and upfront(pool) > iteration_budget:
            pool.pop()
        if len(pool) < 2 or upfront(pool) > iteration_budget:
            break

        result = race(pool, task, budget=iteration_budget, evaluator=evaluator)
        done = it
        for c in pool:
            d = c.digest()
            for k, value in enumerate(result.aoc[d]):
                instance, _ = task.block(k)
                flag = int(result.eliminated.get(d) == k)
                rows.append((it, d, k, instance.function, instance.instance, repr(value), flag))
        elites = result.survivors[:max_elites]
        elite_scores = [result.mean_aoc(c) for c in elites]
        log.info("iteration %d: %d candidates, %d survivors, %d runs used",
                 it, len(pool), len(result.survivors), evaluator.runs)
    return TuneResult(elites, elite_scores, evaluator.runs, done, rows)
