"""Anytime performance: run logs, target grids, ECDF and AOC.

A run log keeps one ``(evaluations, best_precision)`` record per
improvement. Before its first record a run has precision ``+inf``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import LogParseError

LOG_HEADER = ("evaluations", "best_precision")
META_SUFFIX = ".meta"
META_KEYS = ("function", "instance", "dimension", "config_digest", "seed", "budget", "label")
_INT_META = ("instance", "dimension", "seed", "budget")


def target_grid(upper=1e8, lower=1e-8, n=81):
    """Log-spaced precision targets from ``upper`` down to ``lower``."""
    if n == 81 and upper == 1e8 and lower == 1e-8:
        return 10.0 ** (8.0 - 0.2 * np.arange(81))
    return np.logspace(np.log10(upper), np.log10(lower), n)


TARGETS = target_grid()


@dataclass
class RunLog:
    evaluations: np.ndarray
    precision: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.evaluations = np.asarray(self.evaluations, dtype=np.int64).reshape(-1)
        self.precision = np.asarray(self.precision, dtype=float).reshape(-1)
        if self.evaluations.shape != self.precision.shape:
            raise ValueError("evaluations and precision must have equal length")

    def __len__(self):
        return self.evaluations.size

    @property
    def budget(self):
        return int(self.metadata["budget"])

    def validate(self):
        if np.any(np.diff(self.evaluations) <= 0):
            raise ValueError("evaluation counts must be strictly increasing")
        if np.any(np.diff(self.precision) >= 0):
            raise ValueError("precision must strictly decrease between records")
        if len(self) and self.evaluations[0] < 1:
            raise ValueError("evaluation counts start at 1")

    def precision_at(self, b):
        """Best-so-far precision after ``b`` evaluations."""
        idx = np.searchsorted(self.evaluations, b, side="right") - 1
        return np.where(idx >= 0, self.precision[np.maximum(idx, 0)], np.inf)

    def hitting_times(self, targets):
        """First evaluation count reaching each target, ``inf`` if never."""
        targets = np.asarray(targets, dtype=float)
        if len(self) == 0:
            return np.full(targets.size, np.inf)
        hit = self.precision[None, :] <= targets[:, None]
        first = np.where(hit.any(axis=1), hit.argmax(axis=1), -1)
        times = np.full(targets.size, np.inf)
        times[first >= 0] = self.evaluations[first[first >= 0]]
        return times

    def __eq__(self, other):
        return (
            isinstance(other, RunLog)
            and np.array_equal(self.evaluations, other.evaluations)
            and np.array_equal(self.precision, other.precision)
            and self.metadata == other.metadata
        )


def _check_logs(logs):
    logs = list(logs)
    if not logs:
        raise ValueError("empty log set")
    return logs


def ecdf(logs, budgets, targets=TARGETS):
    """Fraction of (run, target) pairs reached by each evaluation count."""
    logs = _check_logs(logs)
    targets = np.asarray(targets, dtype=float)
    times = np.concatenate([log.hitting_times(targets) for log in logs])
    times.sort()
    budgets = np.asarray(budgets)
    return np.searchsorted(times, budgets, side="right") / times.size


def aoc(logs, budget, targets=TARGETS):
    """Area over the ECDF curve summed over ``b = 1..budget``, divided by ``budget``.

    Since ``1 - ECDF(b)`` counts the pairs not yet hit, the sum collapses
    to ``min(hit_time, budget + 1) - 1`` per (run, target) pair.
    """
    logs = _check_logs(logs)
    targets = np.asarray(targets, dtype=float)
    times = np.concatenate([log.hitting_times(targets) for log in logs])
    clipped = np.minimum(times, budget + 1) - 1.0
    return float(np.sum(clipped) / (times.size * budget))


def run_aoc(log, budget=None, targets=TARGETS):
    return aoc([log], log.budget if budget is None else budget, targets)


def write_log(log, path):
    """Write ``<path>`` (CSV records) and ``<path>.meta`` (key=value)."""
    path = Path(path)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LOG_HEADER)
    for e, p in zip(log.evaluations, log.precision):
        writer.writerow((int(e), f"{float(p):.17g}"))
    path.write_text(buf.getvalue())
    meta = "".join(f"{k}={log.metadata[k]}\n" for k in META_KEYS if k in log.metadata)
    meta += "".join(
        f"{k}={v}\n" for k, v in sorted(log.metadata.items()) if k not in META_KEYS
    )
    Path(str(path) + META_SUFFIX).write_text(meta)


def read_metadata(path):
    meta = {}
    path = Path(path)
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise LogParseError("expected key=value", path, lineno)
        key, value = line.split("=", 1)
        key = key.strip()
        if key in _INT_META:
            try:
                value = int(value)
            except ValueError:
                raise LogParseError(f"{key} must be an integer", path, lineno) from None
        meta[key] = value
    return meta


def read_log(path):
    path = Path(path)
    evaluations, precision = [], []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != LOG_HEADER:
            raise LogParseError(f"expected header {','.join(LOG_HEADER)}", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise LogParseError(f"expected 2 columns, got {len(row)}", path, lineno)
            try:
                evaluations.append(int(row[0]))
                precision.append(float(row[1]))
            except ValueError as exc:
                raise LogParseError(str(exc), path, lineno) from None
    meta_path = Path(str(path) + META_SUFFIX)
    metadata = read_metadata(meta_path) if meta_path.exists() else {}
    log = RunLog(evaluations, precision, metadata)
    try:
        log.validate()
    except ValueError as exc:
        raise LogParseError(str(exc), path) from None
    return log


REPORT_HEADER = ("function", "dimension", "config_digest", "runs", "aoc_mean", "aoc_std", "label")
CURVE_HEADER = ("function", "dimension", "config_digest", "label", "evaluations", "ecdf")


def group_logs(logs):
    """Group logs by (function, dimension, configuration digest)."""
    groups = {}
    for log in logs:
        m = log.metadata
        key = (str(m["function"]), int(m["dimension"]), str(m["config_digest"]))
        groups.setdefault(key, []).append(log)
    return dict(sorted(groups.items()))


def _label(logs):
    labels = sorted({str(log.metadata.get("label", "")) for log in logs} - {""})
    return "|".join(labels)


def aoc_table(logs, targets=TARGETS):
    """One row per group: run count, mean and standard deviation of per-run AOC."""
    rows = []
    for (function, dim, digest), members in group_logs(logs).items():
        values = np.array([run_aoc(log, targets=targets) for log in members])
        std = float(values.std(ddof=1)) if values.size > 1 else 0.0
        rows.append((function, dim, digest, values.size, float(values.mean()), std, _label(members)))
    return rows


def budget_samples(budget, n=50):
    """Roughly log-spaced integer evaluation counts in ``[1, budget]``."""
    points = np.unique(np.round(np.logspace(0, np.log10(budget), n)).astype(np.int64))
    return points[(points >= 1) & (points <= budget)]


def ecdf_curves(logs, targets=TARGETS, n_points=50):
    rows = []
    for (function, dim, digest), members in group_logs(logs).items():
        budget = max(log.budget for log in members)
        points = budget_samples(budget, n_points)
        values = ecdf(members, points, targets)
        label = _label(members)
        rows.extend((function, dim, digest, label, int(b), float(v)) for b, v in zip(points, values))
    return rows


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
