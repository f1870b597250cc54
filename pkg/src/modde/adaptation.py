"""Control-parameter adaptation: SHADE memories, jDE, LPSR and jSO caps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MEMORY_SIZE = 6
MEMORY_INIT = 0.5
SHADE_F_SCALE = 0.1
SHADE_CR_SCALE = 0.1

JDE_TAU_F = 0.1
JDE_TAU_CR = 0.1
JDE_F_LOW = 0.1
JDE_F_SPAN = 0.9

LPSR_MIN = 4


@dataclass
class ShadeMemory:
    """Circular memories of successful F and CR means."""

    size: int = MEMORY_SIZE
    m_f: np.ndarray = field(default=None)
    m_cr: np.ndarray = field(default=None)
    write_index: int = 0

    def __post_init__(self):
        if self.m_f is None:
            self.m_f = np.full(self.size, MEMORY_INIT)
        if self.m_cr is None:
            self.m_cr = np.full(self.size, MEMORY_INIT)

    def copy(self):
        return ShadeMemory(self.size, self.m_f.copy(), self.m_cr.copy(), self.write_index)


def _sample_cauchy_f(loc, rng):
    loc = np.asarray(loc, dtype=float)
    f = loc + SHADE_F_SCALE * rng.standard_cauchy(loc.shape)
    bad = f <= 0.0
    while bad.any():
        f[bad] = loc[bad] + SHADE_F_SCALE * rng.standard_cauchy(int(bad.sum()))
        bad = f <= 0.0
    return np.minimum(f, 1.0)


def sample_parameters(method_f, method_cr, memory, personal_f, personal_cr,
                      default_f, default_cr, rng,
                      tau_f=JDE_TAU_F, tau_cr=JDE_TAU_CR):
    """Per-individual ``(F, CR)`` arrays for one generation.

    ``personal_f`` / ``personal_cr`` are the jDE parameters carried by the
    individuals; their length sets the number of samples. Under jDE the
    returned values are candidates that the caller commits to an
    individual only if its trial survives.
    """
    personal_f = np.asarray(personal_f, dtype=float)
    personal_cr = np.asarray(personal_cr, dtype=float)
    n = personal_f.size
    slots = rng.integers(memory.size, size=n) if memory is not None else None

    if method_f == "none":
        f = np.full(n, float(default_f))
    elif method_f == "shade":
        f = _sample_cauchy_f(memory.m_f[slots], rng)
    elif method_f == "shade_modified":
        f = _sample_cauchy_f(np.full(n, memory.m_f.mean()), rng)
    elif method_f == "jde":
        redraw = rng.random(n) < tau_f
        f = np.where(redraw, JDE_F_LOW + JDE_F_SPAN * rng.random(n), personal_f)
    else:
        raise ValueError(f"unknown F adaptation {method_f!r}")

    if method_cr == "none":
        cr = np.full(n, float(default_cr))
    elif method_cr == "shade":
        cr = np.clip(memory.m_cr[slots] + SHADE_CR_SCALE * rng.standard_normal(n), 0.0, 1.0)
    elif method_cr == "jde":
        redraw = rng.random(n) < tau_cr
        cr = np.where(redraw, rng.random(n), personal_cr)
    else:
        raise ValueError(f"unknown CR adaptation {method_cr!r}")
    return f, cr


def shade_update(memory, f, cr, delta, update_f=True, update_cr=True):
    """Write the weighted means of one generation's successes into memory.

    ``delta`` are the positive fitness improvements used as weights. F uses
    the weighted Lehmer mean, CR the weighted arithmetic mean. With no
    successes the memory is returned untouched.
    """
    f = np.asarray(f, dtype=float)
    cr = np.asarray(cr, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if delta.size == 0 or not (update_f or update_cr):
        return memory
    w = delta / delta.sum()
    k = memory.write_index
    if update_f:
        memory.m_f[k] = np.sum(w * f * f) / np.sum(w * f)
    if update_cr:
        memory.m_cr[k] = np.sum(w * cr)
    memory.write_index = (k + 1) % memory.size
    return memory


def lpsr_size(lambda_init, evaluations, budget, lambda_min=LPSR_MIN):
    """Linearly reduced population size, rounded half up."""
    frac = min(max(evaluations / budget, 0.0), 1.0)
    return int(math.floor(lambda_init + (lambda_min - lambda_init) * frac + 0.5))


def apply_caps(f, cr, progress):
    """jSO budget-dependent caps: F <= 0.7 early, CR floors 0.7 then 0.6."""
    f = np.asarray(f, dtype=float)
    cr = np.asarray(cr, dtype=float)
    if progress < 0.6:
        f = np.minimum(f, 0.7)
    if progress < 0.25:
        cr = np.maximum(cr, 0.7)
    elif progress < 0.5:
        cr = np.maximum(cr, 0.6)
    return f, cr
