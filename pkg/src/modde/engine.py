"""Generation-synchronous modular DE.

Each generation builds all trials from a snapshot of the population, then
evaluates them in member order and only afterwards applies the
trial-versus-target replacement (ties go to the trial). A budget running
out mid-generation stops further evaluations; replacements for the trials
already evaluated are still applied.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import adaptation, boundary, crossover, initialization, mutation
from .adaptation import ShadeMemory
from .config import Configuration
from .exceptions import ConfigurationError
from .metrics import RunLog

log = logging.getLogger(__name__)


def make_rng(seed, stream=None):
    """Generator for a run; ``stream`` mixes a run index into the master seed."""
    entropy = [int(seed)] if stream is None else [int(seed), int(stream)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@dataclass
class Individual:
    coordinates: np.ndarray
    fitness: float = np.nan
    f: float = 0.5
    cr: float = 0.5


@dataclass
class Population:
    """Members stored row-wise with per-member fitness and jDE parameters."""

    x: np.ndarray
    fitness: np.ndarray
    f: np.ndarray
    cr: np.ndarray
    archive: np.ndarray
    generation: int = 0
    evaluations: int = 0

    @property
    def size(self):
        return self.x.shape[0]

    def member(self, i):
        return Individual(self.x[i].copy(), float(self.fitness[i]), float(self.f[i]), float(self.cr[i]))

    def best_index(self):
        return int(np.argmin(self.fitness))


@dataclass
class RunResult:
    log: RunLog
    best: Individual
    seed: int
    evaluations: int
    generations: int
    population_sizes: list = field(default_factory=list)


class ModularDE:
    """One DE run as a single-threaded state machine.

    Parameters
    ----------
    config : Configuration
        Module and parameter assignment.
    problem : ProblemInstance
        Objective with box domain and known optimum.
    budget : int
        Maximum number of objective evaluations.
    seed : int
        Seed of the run's random stream.
    stream : int, optional
        Run index mixed into ``seed`` for batch runs.
    """

    def __init__(self, config, problem, budget, seed, stream=None):
        if not isinstance(config, Configuration):
            raise ConfigurationError("config must be a Configuration")
        config.validate()
        self.config = config
        self.problem = problem
        self.dim = problem.dimension
        if self.dim < 1:
            raise ValueError("problem dimension must be >= 1")
        self.lambda_init = config.population_size(self.dim)
        self.budget = int(budget)
        if self.budget < self.lambda_init:
            raise ValueError(f"budget {self.budget} is smaller than lambda={self.lambda_init}")
        self.plan = mutation.MutationPlan.from_config(config)
        # the smallest population the run will see must still admit the mutation
        self.plan.check_feasible(adaptation.LPSR_MIN if config.lpsr else self.lambda_init)
        self.seed = int(seed)
        self.rng = make_rng(seed, stream)
        self.lower = np.asarray(problem.lower, dtype=float)
        self.upper = np.asarray(problem.upper, dtype=float)
        use_shade = config.adapt_f in ("shade", "shade_modified") or config.adapt_cr == "shade"
        self.memory = ShadeMemory() if use_shade else None
        self.pop = None
        self.best_x = None
        self.best_f = np.inf
        self._best_precision = np.inf
        self._log_evals = []
        self._log_prec = []
        self._evals = 0
        self.population_sizes = []

    # -- bookkeeping -------------------------------------------------------

    @property
    def evaluations(self):
        return 0 if self.pop is None else self.pop.evaluations

    @property
    def remaining(self):
        return self.budget - self._evals

    def _evaluate(self, x):
        """Evaluate rows of ``x`` in order, at most the remaining budget."""
        n = min(len(x), self.budget - self._evals)
        if n <= 0:
            return np.empty(0)
        x = x[:n]
        values = np.asarray(self.problem.evaluate(x), dtype=float).reshape(n)
        counts = self._evals + 1 + np.arange(n)
        self._evals += n
        i = int(np.argmin(values))
        if values[i] < self.best_f:
            self.best_f = float(values[i])
            self.best_x = x[i].copy()
        # improvement-only trace of best-so-far precision
        trace = np.minimum.accumulate(
            np.concatenate([[self._best_precision], self.problem.precision(values)])
        )
        running, prev = trace[1:], trace[:-1]
        improved = running < prev
        if improved.any():
            self._log_evals.extend(int(c) for c in counts[improved])
            self._log_prec.extend(float(p) for p in running[improved])
            self._best_precision = float(running[-1])
        return values

    def _repair(self, x, parents):
        return boundary.correct(self.config.sdis, x, parents, self.lower, self.upper, self.rng)

    # -- initialization ----------------------------------------------------

    def initialize(self):
        cfg = self.config
        n = self.lambda_init
        self._evals = 0
        domain = initialization.Domain(self.lower, self.upper)
        x = initialization.sample(cfg.sampler, n, domain, self.rng)
        # no parent exists yet; the midpoint stands in for target-based repairs
        x = self._repair(x, domain.center)
        if cfg.opposition:
            x = np.vstack([x, initialization.oppose(x, domain)])
        fitness = self._evaluate(x)
        x = x[: fitness.size]
        if fitness.size > n:
            keep = np.sort(np.argsort(fitness, kind="stable")[:n])
            x, fitness = x[keep], fitness[keep]
        self.pop = Population(
            x=x,
            fitness=fitness,
            f=np.full(len(x), cfg.f),
            cr=np.full(len(x), cfg.cr),
            archive=np.empty((0, self.dim)),
            evaluations=self._evals,
        )
        self.population_sizes.append(self.pop.size)
        return self.pop

    # -- one generation ----------------------------------------------------

    def sample_parameters(self, progress):
        cfg = self.config
        pop = self.pop
        f, cr = adaptation.sample_parameters(
            cfg.adapt_f, cfg.adapt_cr, self.memory, pop.f, pop.cr, cfg.f, cfg.cr, self.rng
        )
        if cfg.caps:
            f, cr = adaptation.apply_caps(f, cr, progress)
        return f, cr

    def make_trials(self, f, cr, progress):
        """All trials of a generation, built from the current population only."""
        cfg = self.config
        pop = self.pop
        targets = np.arange(pop.size)
        mutants = mutation.mutate_batch(
            self.plan, targets, pop.x, pop.fitness, pop.archive, f, progress, self.rng
        )
        if cfg.eigen_x:
            rotation = crossover.population_rotation(pop.x)
            trials = crossover.eigen_crossover(
                pop.x, mutants, cr, cfg.crossover, rng=self.rng, rotation=rotation
            )
        else:
            mask = crossover.make_mask(cfg.crossover, pop.x.shape, cr, self.rng)
            trials = crossover.apply_mask(pop.x, mutants, mask)
        return self._repair(trials, pop.x)

    def step(self):
        """Run one generation; returns the updated population."""
        if self.pop is None:
            self.initialize()
        if self.remaining <= 0:
            return self.pop
        cfg = self.config
        pop = self.pop
        progress = self._evals / self.budget
        f, cr = self.sample_parameters(progress)
        trials = self.make_trials(f, cr, progress)
        trial_fitness = self._evaluate(trials)
        done = trial_fitness.size

        # replacement only after every trial of the generation is built and evaluated
        idx = np.arange(done)
        wins = trial_fitness <= pop.fitness[:done]
        winners = idx[wins]
        improvement = pop.fitness[:done][wins] - trial_fitness[wins]
        if cfg.archive and winners.size:
            losers = pop.x[winners]
            archive = np.vstack([pop.archive, losers])
            pop.archive = mutation.shrink_archive(archive, pop.size, self.rng)
        pop.x[winners] = trials[winners]
        pop.fitness[winners] = trial_fitness[wins]
        # personal parameters are inherited on success (jDE only)
        if cfg.adapt_f == "jde":
            pop.f[winners] = f[winners]
        if cfg.adapt_cr == "jde":
            pop.cr[winners] = cr[winners]

        if self.memory is not None:
            strict = improvement > 0
            adaptation.shade_update(
                self.memory,
                f[winners][strict],
                cr[winners][strict],
                improvement[strict],
                update_f=cfg.adapt_f in ("shade", "shade_modified"),
                update_cr=cfg.adapt_cr == "shade",
            )
        pop.generation += 1
        pop.evaluations = self._evals

        if cfg.lpsr:
            self._reduce_population()
        self.population_sizes.append(pop.size)
        return pop

    def _reduce_population(self):
        pop = self.pop
        new_size = adaptation.lpsr_size(self.lambda_init, self._evals, self.budget)
        if new_size >= pop.size:
            return
        keep = np.sort(np.argsort(pop.fitness, kind="stable")[:new_size])
        pop.x, pop.fitness = pop.x[keep], pop.fitness[keep]
        pop.f, pop.cr = pop.f[keep], pop.cr[keep]
        pop.archive = mutation.shrink_archive(pop.archive, new_size, self.rng)

    def run(self):
        self.initialize()
        while self.remaining > 0:
            self.step()
        return self.result()

    def result(self):
        metadata = {
            "function": self.problem.function,
            "instance": self.problem.instance,
            "dimension": self.dim,
            "config_digest": self.config.digest(),
            "seed": self.seed,
            "budget": self.budget,
        }
        run_log = RunLog(self._log_evals, self._log_prec, metadata)
        best = Individual(self.best_x.copy(), float(self.best_f))
        if self.pop is not None:
            i = self.pop.best_index()
            if self.pop.fitness[i] <= best.fitness:
                best = self.pop.member(i)
        return RunResult(
            log=run_log,
            best=best,
            seed=self.seed,
            evaluations=self._evals,
            generations=self.pop.generation,
            population_sizes=list(self.population_sizes),
        )


def run(config, problem, budget, seed, stream=None):
    """Optimise ``problem`` with ``config`` for ``budget`` evaluations."""
    return ModularDE(config, problem, budget, seed, stream).run()


def step_generation(de):
    """Advance a :class:`ModularDE` state by one generation."""
    return de.step()
