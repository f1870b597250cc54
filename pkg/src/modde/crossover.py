"""Binomial/exponential crossover and the eigenbasis transformation.

Crossover is split into mask generation and mask application so that the
eigen variant can apply the very same exchange pattern in rotated
coordinates. Masks are boolean, ``True`` meaning "take the mutant gene".
Target/mutant inputs may be single vectors or stacks of row vectors.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ConfigurationError, DegenerateCovarianceError

JACOBI_MAX_SWEEPS = 100
JACOBI_TOLERANCE = 1e-12


def binomial_mask(shape, cr, rng):
    """Genes taken from the mutant: ``u_j < CR`` plus one forced index."""
    shape = tuple(np.atleast_1d(shape))
    *lead, dim = shape
    cr = np.asarray(cr, dtype=float)
    if cr.ndim:
        cr = cr[..., None]
    mask = rng.random(shape) < cr
    forced = rng.integers(dim, size=tuple(lead))
    np.put_along_axis(mask, np.asarray(forced)[..., None], True, axis=-1)
    return mask


def exponential_mask(shape, cr, rng):
    """Run of consecutive mutant genes starting at a random index.

    The run length is one plus the number of leading successes among
    ``D - 1`` further uniform draws compared against ``CR`` (wrapping
    modulo ``D``).
    """
    shape = tuple(np.atleast_1d(shape))
    *lead, dim = shape
    cr = np.asarray(cr, dtype=float)
    if cr.ndim:
        cr = cr[..., None]
    start = rng.integers(dim, size=tuple(lead))
    draws = rng.random(tuple(lead) + (dim - 1,)) < cr
    length = 1 + np.cumprod(draws, axis=-1).sum(axis=-1)
    offset = np.mod(np.arange(dim) - np.asarray(start)[..., None], dim)
    return offset < np.asarray(length)[..., None]


def make_mask(method, shape, cr, rng):
    if method == "bin":
        return binomial_mask(shape, cr, rng)
    if method == "exp":
        return exponential_mask(shape, cr, rng)
    raise ConfigurationError(f"unknown crossover method {method!r}")


def apply_mask(target, mutant, mask):
    return np.where(mask, mutant, target)


def crossover_bin(target, mutant, cr, rng):
    target = np.asarray(target, dtype=float)
    return apply_mask(target, mutant, binomial_mask(target.shape, cr, rng))


def crossover_exp(target, mutant, cr, rng):
    target = np.asarray(target, dtype=float)
    return apply_mask(target, mutant, exponential_mask(target.shape, cr, rng))


def eigen_decompose(matrix, max_sweeps=JACOBI_MAX_SWEEPS, tol=JACOBI_TOLERANCE):
    """Cyclic-by-row Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(eigenvalues, R)`` with eigenvectors in the columns of ``R``,
    so that ``R @ diag(eigenvalues) @ R.T`` reconstructs the input. Raises
    :class:`DegenerateCovarianceError` on non-finite input or when the
    off-diagonal norm does not drop below ``tol`` times the Frobenius norm
    within ``max_sweeps`` sweeps.

    Rotations act on plain Python lists: the matrices are small and numpy
    call overhead would dominate.
    """
    a0 = np.array(matrix, dtype=float)
    if a0.ndim != 2 or a0.shape[0] != a0.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(a0)):
        raise DegenerateCovarianceError("matrix has non-finite entries")
    a0 = 0.5 * (a0 + a0.T)
    n = a0.shape[0]
    scale = float(np.linalg.norm(a0))
    if scale == 0.0:
        return np.zeros(n), np.eye(n)
    threshold = tol * scale
    # skipping only entries below threshold / n keeps their total norm below threshold
    skip = threshold / n
    a = a0.tolist()
    v = np.eye(n).tolist()
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]

    for sweep in range(max_sweeps + 1):
        off = math.sqrt(sum(a[p][q] * a[p][q] for p, q in pairs))
        if off <= threshold:
            return np.array([a[i][i] for i in range(n)]), np.array(v)
        if sweep == max_sweeps:
            break
        for p, q in pairs:
            apq = a[p][q]
            if abs(apq) <= skip:
                continue
            app, aqq = a[p][p], a[q][q]
            theta = (aqq - app) / (2.0 * apq)
            if theta == 0.0:
                t = 1.0
            else:
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            # A <- J^T A J with J the (p, q) Givens rotation; A stays symmetric
            rp, rq = a[p], a[q]
            for k in range(n):
                if k == p or k == q:
                    continue
                x, y = rp[k], rq[k]
                nx, ny = c * x - s * y, s * x + c * y
                rp[k] = a[k][p] = nx
                rq[k] = a[k][q] = ny
            rp[p] = c * c * app - 2.0 * c * s * apq + s * s * aqq
            rq[q] = s * s * app + 2.0 * c * s * apq + c * c * aqq
            rp[q] = rq[p] = 0.0
            for row in v:
                x, y = row[p], row[q]
                row[p] = c * x - s * y
                row[q] = s * x + c * y
    raise DegenerateCovarianceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def population_rotation(population):
    """Eigenbasis of the population covariance, or the identity if unusable.

    Returns ``(R, mean)``. The identity fallback covers fewer than two
    members, a fully collapsed population and Jacobi failure.
    """
    population = np.asarray(population, dtype=float)
    n, dim = population.shape
    mean = population.mean(axis=0)
    if n < 2:
        return np.eye(dim), mean
    centered = population - mean
    cov = centered.T @ centered / (n - 1)
    try:
        _, rot = eigen_decompose(cov)
    except DegenerateCovarianceError:
        return np.eye(dim), mean
    return rot, mean


def eigen_crossover(target, mutant, cr, method, population=None, rng=None,
                    rotation=None, return_mask=False):
    """Crossover performed in the eigenbasis of the population covariance.

    Target and mutant are expressed relative to the population mean,
    projected onto the eigenvectors, crossed over, and mapped back. A
    precomputed ``rotation=(R, mean)`` skips the decomposition.
    """
    if rotation is None:
        rotation = population_rotation(population)
    rot, mean = rotation
    target = np.asarray(target, dtype=float)
    mutant = np.asarray(mutant, dtype=float)
    t_rot = (target - mean) @ rot
    m_rot = (mutant - mean) @ rot
    mask = make_mask(method, target.shape, cr, rng)
    trial = apply_mask(t_rot, m_rot, mask) @ rot.T + mean
    if return_mask:
        return trial, mask
    return trial
