"""Command line interface: run, benchmark, tune, report.

Exit codes: 0 success, 1 usage error (bad flags, unknown preset or
function, malformed configuration file), 2 runtime error.

Batch runs derive one seed per run from ``--seed`` and the run's index
with :func:`run_seed`, so results do not depend on ``--jobs``.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import metrics, presets, problems
from .config import load_configuration, save_configuration
from .engine import run as run_de
from .exceptions import ConfigurationError, InfeasibleOperatorError, LogParseError
from .tuner import TuningTask, tune

log = logging.getLogger("modde")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def run_seed(master_seed, index):
    """Seed of run ``index`` in a batch: first word of SeedSequence([master, index])."""
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1)[0])


def _safe(label):
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", label).strip("-")


def _prepare_out(path):
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory {path} is not writable: {exc}") from exc
    return path


def _execute(job):
    config, function, dim, instance, budget, seed, label = job
    problem = problems.make_instance(function, dim, instance)
    result = run_de(config, problem, budget, seed)
    result.log.metadata["label"] = label
    return result.log


def _map(jobs, n_jobs):
    if n_jobs <= 1:
        return [_execute(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_execute, jobs, chunksize=1))


def _batch_jobs(config, label, function, dim, instances, reps, budget, seed):
    jobs = []
    for i, instance in enumerate(range(1, instances + 1)):
        for rep in range(reps):
            jobs.append((config, function, dim, instance, budget, run_seed(seed, i * reps + rep), label))
    return jobs


def _write_logs(logs, out):
    paths = []
    for run_log in logs:
        m = run_log.metadata
        name = f"{_safe(m['label'])}_{m['function']}_d{m['dimension']}_i{m['instance']}_s{m['seed']}.csv"
        path = out / name
        metrics.write_log(run_log, path)
        paths.append(path)
    return paths


def _resolve_config(args, dim):
    if args.preset:
        return presets.resolve(args.preset, dim), args.preset
    source = args.config
    if source.strip().lower() == "default":
        return presets.resolve("default", dim), "default"
    path = Path(source)
    if not path.exists():
        raise UsageError(f"configuration file {source} does not exist")
    return load_configuration(path), path.stem


def cmd_run(args):
    config, label = _resolve_config(args, args.dim)
    function = problems.function_name(args.function)
    out = _prepare_out(args.out)
    jobs = _batch_jobs(config, label, function, args.dim, args.instances, args.reps, args.budget, args.seed)
    logs = _map(jobs, args.jobs)
    paths = _write_logs(logs, out)
    print(f"wrote {len(paths)} run logs to {out}")
    return EXIT_OK


def _functions(names):
    if names in ("all", None):
        return list(problems.FUNCTIONS)
    return [problems.function_name(f) for f in names.split(",")]


def cmd_benchmark(args):
    out = _prepare_out(args.out)
    log_dir = _prepare_out(out / "logs")
    functions = _functions(args.functions)
    all_logs = []
    for dim in args.dims:
        portfolio = presets.portfolio(args.portfolio, dim)
        for label, config in portfolio.items():
            for function in functions:
                jobs = _batch_jobs(config, label, function, dim, args.instances, args.reps, args.budget, args.seed)
                logs = _map(jobs, args.jobs)
                _write_logs(logs, log_dir)
                all_logs.extend(logs)
        log.info("dimension %d: %d configurations", dim, len(portfolio))
    rows = metrics.aoc_table(all_logs)
    metrics.write_rows(out / "aoc_report.csv", metrics.REPORT_HEADER, rows)
    print(f"benchmarked {len(rows)} (configuration, function, dimension) groups; report in {out / 'aoc_report.csv'}")
    return EXIT_OK


def tuning_instances(function, dim, n_specialist=5):
    """Specialist: first instances of one function. Generalist: one instance per function."""
    if function == "all":
        return [problems.make_instance(name, dim, 1) for name in problems.FUNCTIONS]
    name = problems.function_name(function)
    return [problems.make_instance(name, dim, i) for i in range(1, n_specialist + 1)]


def cmd_tune(args):
    out = _prepare_out(args.out)
    instances = tuning_instances(args.function, args.dim)
    rows = []
    for rep in range(args.reps):
        task = TuningTask(
            instances,
            run_budget=args.run_budget,
            tuning_budget=args.tuning_budget,
            first_test=args.first_test,
            alpha=args.alpha,
            seed=run_seed(args.seed, rep),
        )
        result = tune(task, iterations=args.iterations)
        result.write_log(out / f"tuning_log_r{rep}.csv")
        for rank, (config, score) in enumerate(zip(result.elites, result.mean_aoc), start=1):
            name = f"elite_r{rep}_{rank}.cfg"
            save_configuration(config, out / name, header=f"tuned on {args.function}, D={args.dim}, mean AOC {score!r}")
            rows.append((rep, rank, config.digest(), score, name))
        print(f"repetition {rep}: {len(result.elites)} elites, {result.runs} runs used")
    metrics.write_rows(out / "elites.csv", ("repetition", "rank", "config_digest", "mean_aoc", "file"), rows)
    if not rows:
        raise RuntimeError("tuning produced no elites; increase --tuning-budget")
    return EXIT_OK


def cmd_report(args):
    out = _prepare_out(args.out)
    targets = metrics.target_grid(args.target_max, args.target_min, args.n_targets)
    logs = []
    for path in sorted(Path(args.logs).rglob("*.csv")):
        if not Path(str(path) + metrics.META_SUFFIX).exists():
            continue
        try:
            run_log = metrics.read_log(path)
            for key in ("function", "dimension", "config_digest", "budget"):
                if key not in run_log.metadata:
                    raise LogParseError(f"metadata lacks {key}", path)
        except (LogParseError, OSError) as exc:
            log.warning("skipping %s: %s", path, exc)
            continue
        logs.append(run_log)
    if not logs:
        print(f"no run logs found under {args.logs}", file=sys.stderr)
        return EXIT_RUNTIME
    metrics.write_rows(out / "aoc_report.csv", metrics.REPORT_HEADER, metrics.aoc_table(logs, targets))
    metrics.write_rows(out / "ecdf_curves.csv", metrics.CURVE_HEADER, metrics.ecdf_curves(logs, targets))
    print(f"read {len(logs)} run logs; report in {out}")
    return EXIT_OK


def _add_batch_flags(p):
    p.add_argument("--budget", type=int, default=50_000, help="evaluations per run (default 50000)")
    p.add_argument("--instances", type=int, default=10, help="instances per function (default 10)")
    p.add_argument("--reps", type=int, default=5, help="independent runs per instance (default 5)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--out", required=True, help="output directory")


def build_parser():
    parser = _Parser(prog="modde", description="Modular differential evolution toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one configuration on one function")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="common variant name (e.g. SHADE) or single-module label (e.g. sdis=toroidal)")
    src.add_argument("--config", help="configuration file, or 'default'")
    p.add_argument("--function", default="sphere", help="suite function name or number (default sphere)")
    p.add_argument("--dim", type=int, default=5, help="problem dimension (default 5)")
    _add_batch_flags(p)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("benchmark", help="run a preset portfolio over the suite and report AOC")
    p.add_argument("--portfolio", choices=("common", "single_module", "both"), default="common",
                   help="which preset portfolio to run (default common)")
    p.add_argument("--dims", type=int, nargs="+", default=[5, 10, 20], help="dimensions (default 5 10 20)")
    p.add_argument("--functions", default="all", help="comma-separated functions or 'all' (default all)")
    _add_batch_flags(p)
    p.set_defaults(handler=cmd_benchmark)

    p = sub.add_parser("tune", help="race configurations on one function or the whole suite")
    p.add_argument("--function", required=True, help="function name for a specialist, 'all' for a generalist")
    p.add_argument("--dim", type=int, default=5, help="problem dimension (default 5)")
    p.add_argument("--tuning-budget", type=int, default=10_000, help="DE runs per tuning repetition (default 10000)")
    p.add_argument("--run-budget", type=int, default=50_000, help="evaluations per DE run (default 50000)")
    p.add_argument("--reps", type=int, default=10, help="independent tuning repetitions (default 10)")
    p.add_argument("--first-test", type=int, default=5, help="blocks before the first elimination test (default 5)")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level of the race tests (default 0.05)")
    p.add_argument("--iterations", type=int, default=None, help="racing iterations (default 2 + log2 of parameter count)")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_tune)

    p = sub.add_parser("report", help="aggregate run logs into AOC and ECDF tables")
    p.add_argument("--logs", required=True, help="directory scanned recursively for run logs")
    p.add_argument("--target-max", type=float, default=1e8, help="largest precision target (default 1e8)")
    p.add_argument("--target-min", type=float, default=1e-8, help="smallest precision target (default 1e-8)")
    p.add_argument("--n-targets", type=int, default=81, help="number of log-spaced targets (default 81)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (UsageError, ConfigurationError, LogParseError) as exc:
        print(f"modde: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleOperatorError, OSError, ValueError, RuntimeError) as exc:
        print(f"modde: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
