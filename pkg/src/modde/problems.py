"""Instanced benchmark suite with known optima.

Six functions on ``[-5, 5]^D``, each instantiated deterministically from
``(function, dimension, instance)``. Every instance has ``f_opt = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError
from .initialization import Domain

FUNCTIONS = ("sphere", "ellipsoid", "linear_slope", "rosenbrock", "rastrigin", "shell")
FUNCTION_IDS = {name: i + 1 for i, name in enumerate(FUNCTIONS)}
DOMAIN_BOUND = 5.0
ELLIPSOID_CONDITION = 1e6


def function_name(function_id):
    """Accept a suite name or its 1-based number."""
    if isinstance(function_id, str):
        key = function_id.strip().lower().replace("-", "_")
        if key in FUNCTION_IDS:
            return key
        if key.isdigit():
            function_id = int(key)
        else:
            raise ConfigurationError(f"unknown function {function_id!r}; choose from {FUNCTIONS}")
    if isinstance(function_id, (int, np.integer)) and 1 <= function_id <= len(FUNCTIONS):
        return FUNCTIONS[function_id - 1]
    raise ConfigurationError(f"unknown function {function_id!r}; choose from {FUNCTIONS}")


def random_rotation(dim, rng):
    """Orthogonal matrix from the QR factors of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def _powers(dim):
    if dim == 1:
        return np.ones(1)
    return np.arange(dim) / (dim - 1)


@dataclass(frozen=True)
class ProblemInstance:
    function: str
    dimension: int
    instance: int
    x_opt: np.ndarray
    f_opt: float = 0.0
    rotation: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def function_id(self):
        return FUNCTION_IDS[self.function]

    @property
    def domain(self):
        return Domain.box(self.dimension, -DOMAIN_BOUND, DOMAIN_BOUND)

    @property
    def lower(self):
        return np.full(self.dimension, -DOMAIN_BOUND)

    @property
    def upper(self):
        return np.full(self.dimension, DOMAIN_BOUND)

    def __call__(self, x):
        return self.evaluate(x)

    def evaluate(self, x):
        """Objective value for one point ``(D,)`` or a stack ``(n, D)``."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.ndim > 2 or x.shape[-1] != self.dimension:
            raise ValueError(
                f"expected points of dimension {self.dimension}, got shape {x.shape}"
            )
        values = _EVALUATORS[self.function](self, np.atleast_2d(x)) + self.f_opt
        return float(values[0]) if x.ndim == 1 else values

    def precision(self, f_value):
        """Distance of an objective value to the optimum, clipped at zero."""
        return np.maximum(np.asarray(f_value, dtype=float) - self.f_opt, 0.0)


def _sphere(p, x):
    z = x - p.x_opt
    return np.sum(z * z, axis=1)


def _ellipsoid(p, x):
    z = x - p.x_opt
    weights = ELLIPSOID_CONDITION ** _powers(p.dimension)
    return np.sum(weights * z * z, axis=1)


def _linear_slope(p, x):
    slope = np.sign(p.x_opt) * 10.0 ** _powers(p.dimension)
    # coordinates beyond the optimum are clamped, so the slope is flat there
    z = np.where(x * p.x_opt < DOMAIN_BOUND**2, x, p.x_opt)
    return np.sum(DOMAIN_BOUND * np.abs(slope) - slope * z, axis=1)


def _rosen_sum(z):
    return np.sum(100.0 * (z[:, :-1] ** 2 - z[:, 1:]) ** 2 + (z[:, :-1] - 1.0) ** 2, axis=1)


def _rosenbrock(p, x):
    scale = max(1.0, np.sqrt(p.dimension) / 8.0)
    return _rosen_sum(scale * (x - p.x_opt) + 1.0)


def _rastrigin(p, x):
    z = (x - p.x_opt) @ p.rotation.T
    return 10.0 * (p.dimension - np.sum(np.cos(2.0 * np.pi * z), axis=1)) + np.sum(z * z, axis=1)


def _shell(p, x):
    # Griewank over the Rosenbrock terms of a rotated, shifted point; the
    # unique minimiser z = 1 maps back to x_opt on the unit sphere
    scale = max(1.0, np.sqrt(p.dimension) / 8.0)
    z = scale * ((x - p.x_opt) @ p.rotation.T) + 1.0
    s = 100.0 * (z[:, :-1] ** 2 - z[:, 1:]) ** 2 + (z[:, :-1] - 1.0) ** 2
    return 10.0 / (p.dimension - 1) * np.sum(s / 4000.0 + 1.0 - np.cos(s), axis=1)


_EVALUATORS = {
    "sphere": _sphere,
    "ellipsoid": _ellipsoid,
    "linear_slope": _linear_slope,
    "rosenbrock": _rosenbrock,
    "rastrigin": _rastrigin,
    "shell": _shell,
}


def make_instance(function_id, dimension, instance=1):
    """Deterministic instance of a suite function."""
    name = function_name(function_id)
    dimension = int(dimension)
    if dimension < 2:
        raise ConfigurationError(f"dimension must be >= 2, got {dimension}")
    rng = np.random.default_rng([FUNCTION_IDS[name], dimension, int(instance)])
    rotation = None
    if name == "linear_slope":
        x_opt = DOMAIN_BOUND * np.where(rng.random(dimension) < 0.5, -1.0, 1.0)
    elif name == "shell":
        u = rng.standard_normal(dimension)
        x_opt = u / np.linalg.norm(u)
    else:
        x_opt = rng.uniform(-4.0, 4.0, dimension)
    if name in ("rastrigin", "shell"):
        rotation = random_rotation(dimension, rng)
    return ProblemInstance(name, dimension, int(instance), x_opt, 0.0, rotation)
