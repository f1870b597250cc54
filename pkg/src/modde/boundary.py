"""Strategies for dealing with infeasible solutions (SDIS).

Every strategy touches only the violated coordinates of a trial. ``trial``
and ``target`` may be single vectors or stacks of vectors (one row per
trial); the domain broadcasts over the last axis.

The stochastic strategies use these densities, parameterised by the
distance ``a`` between the violated bound and an attractor:

* ``expc_target`` / ``expc_center``: distance from the violated bound is
  exponential with mean ``a``, truncated to ``[0, a]``; the attractor is the
  parent coordinate or the domain midpoint.
* ``exps``: the same with the opposite bound as attractor, so draws spread
  over the whole coordinate range.
* ``cotn``: distance is ``|N(0, (U - L) / 100)|``, redrawn until feasible.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigurationError

COTN_SIGMA_FRACTION = 0.01
_EXP_NORM = 1.0 - np.exp(-1.0)

STRATEGIES = (
    "none",
    "saturate",
    "unif_resample",
    "cotn",
    "toroidal",
    "mirror",
    "hvb",
    "expc_target",
    "expc_center",
    "exps",
)


def truncated_exponential_cdf(d, a):
    """CDF of the distance-from-bound used by the ``exp*`` strategies."""
    d = np.clip(d, 0.0, a)
    return (1.0 - np.exp(-d / a)) / _EXP_NORM


def _truncated_exponential(a, rng):
    # inverse CDF of Exp(mean=a) restricted to [0, a]
    u = rng.random(np.shape(a))
    return -a * np.log1p(-u * _EXP_NORM)


def _wrap(x, lower, width):
    return lower + np.mod(x - lower, width)


def _fold(x, lower, width):
    y = np.mod(x - lower, 2.0 * width)
    return lower + np.where(y > width, 2.0 * width - y, y)


def correct(strategy, trial, target, lower, upper, rng):
    """Map the violated coordinates of ``trial`` back into ``[lower, upper]``.

    Returns a new array; ``strategy='none'`` returns an unmodified copy.
    Use :func:`is_feasible` to flag the result.
    """
    x = np.array(trial, dtype=float, copy=True)
    if strategy not in STRATEGIES:
        raise ConfigurationError(f"unknown SDIS strategy {strategy!r}")
    if strategy == "none":
        return x
    lower = np.broadcast_to(np.asarray(lower, dtype=float), x.shape)
    upper = np.broadcast_to(np.asarray(upper, dtype=float), x.shape)
    below = x < lower
    above = x > upper
    bad = below | above
    if not bad.any():
        return x

    lo, hi, xb = lower[bad], upper[bad], x[bad]
    width = hi - lo
    is_below = below[bad]
    bound = np.where(is_below, lo, hi)
    inward = np.where(is_below, 1.0, -1.0)

    if strategy == "saturate":
        new = bound
    elif strategy == "unif_resample":
        new = lo + rng.random(xb.shape) * width
    elif strategy == "toroidal":
        new = _wrap(xb, lo, width)
    elif strategy == "mirror":
        new = _fold(xb, lo, width)
    elif strategy == "hvb":
        parent = np.broadcast_to(np.asarray(target, dtype=float), x.shape)[bad]
        new = 0.5 * (bound + parent)
    elif strategy in ("expc_target", "expc_center", "exps"):
        if strategy == "expc_target":
            attractor = np.broadcast_to(np.asarray(target, dtype=float), x.shape)[bad]
        elif strategy == "expc_center":
            attractor = 0.5 * (lo + hi)
        else:
            attractor = np.where(is_below, hi, lo)
        a = np.abs(attractor - bound)
        dist = np.zeros_like(a)
        pos = a > 0
        dist[pos] = _truncated_exponential(a[pos], rng)
        new = bound + inward * dist
    elif strategy == "cotn":
        sigma = COTN_SIGMA_FRACTION * width
        dist = np.abs(rng.normal(0.0, sigma))
        redo = dist > width
        while redo.any():
            dist[redo] = np.abs(rng.normal(0.0, sigma[redo]))
            redo = dist > width
        new = bound + inward * dist
    # guard against rounding pushing a repaired value a hair outside
    x[bad] = np.clip(new, lo, hi)
    return x


def is_feasible(x, lower, upper):
    x = np.asarray(x)
    return np.all((x >= lower) & (x <= upper), axis=-1)
