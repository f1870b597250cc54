"""Initial population samplers and oppositional mirroring."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .exceptions import ConfigurationError


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``[lower, upper]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-D arrays of equal length")
        if not np.all(lower < upper):
            raise ValueError("lower must be strictly below upper in every coordinate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, dim, low=-5.0, high=5.0):
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @property
    def dimension(self):
        return self.lower.size

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, x):
        x = np.asarray(x)
        return np.all((x >= self.lower) & (x <= self.upper), axis=-1)


def _unit_sobol(n, dim, rng):
    # scramble seed drawn from the run stream keeps runs distinct yet reproducible
    seed = int(rng.integers(2**63))
    engine = qmc.Sobol(dim, scramble=True, seed=seed)
    with warnings.catch_warnings():
        # balance properties need n = 2^m; populations rarely satisfy that
        warnings.simplefilter("ignore", UserWarning)
        return engine.random(n)


def _unit_halton(n, dim):
    engine = qmc.Halton(dim, scramble=False)
    engine.fast_forward(1)  # skip the all-zero leading point
    return engine.random(n)


def sample(sampler, n, domain, rng):
    """Draw ``n`` points in problem units.

    Uniform, Sobol and Halton points lie inside ``domain``. Gaussian points
    are centred on the domain midpoint with per-coordinate standard
    deviation ``(U - L) / 6`` and may fall outside the box; the caller
    repairs them with its boundary strategy.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    dim = domain.dimension
    if sampler == "uniform":
        unit = rng.random((n, dim))
    elif sampler == "sobol":
        unit = _unit_sobol(n, dim, rng)
    elif sampler == "halton":
        unit = _unit_halton(n, dim)
    elif sampler == "gaussian":
        sigma = domain.width / 6.0
        return domain.center + sigma * rng.standard_normal((n, dim))
    else:
        raise ConfigurationError(f"unknown sampler {sampler!r}")
    return domain.lower + unit * domain.width


def oppose(points, domain):
    """Mirror points through the domain midpoint, ``L + U - x``."""
    return domain.lower + domain.upper - np.asarray(points, dtype=float)
