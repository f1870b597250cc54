"""Acceptance criteria, each run at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are repeated in the
pytest terminal summary. Run seeds follow one fixed convention: run ``i``
of criterion ``n`` uses ``run_seed(n, i)``.
"""

import time

import numpy as np
from scipy import stats

from modde import engine, metrics, presets
from modde.adaptation import ShadeMemory, lpsr_size, shade_update
from modde.boundary import STRATEGIES, correct
from modde.cli import main, run_seed
from modde.config import Configuration
from modde.crossover import apply_mask, eigen_crossover, eigen_decompose, population_rotation
from modde.metrics import TARGETS, RunLog
from modde.problems import make_instance
from modde.tuner import TuningTask, tune

from .oracles import brute_force_aoc, random_log
from .test_presets import GOLDEN


def test_convergence_sanity(verdict):
    problem = make_instance("sphere", 5, 1)
    start = time.perf_counter()
    finals = [engine.run(Configuration(), problem, 50_000, run_seed(1, i)).log.precision[-1] for i in range(10)]
    elapsed = time.perf_counter() - start
    hits = sum(p <= 1e-8 for p in finals)
    verdict(1, "default config reaches 1e-8 on sphere D=5 in >= 9/10 runs within 1 minute",
            hits >= 9 and elapsed < 60, f"{hits}/10 runs, {elapsed:.1f}s")


def test_metric_oracle(verdict):
    rng = np.random.default_rng(2)
    worst = 0.0
    runs = []
    for _ in range(50):
        budget = int(rng.integers(1, 1001))
        run = random_log(rng, budget)
        runs.append((run, budget))
        fast = metrics.aoc([RunLog(*run)], budget, TARGETS)
        worst = max(worst, abs(fast - brute_force_aoc([run], budget, TARGETS)))
    immediate = metrics.aoc([RunLog([1], [0.0])], 1000)
    never = metrics.aoc([RunLog([1], [1e12])], 1000)
    ok = worst <= 1e-12 and immediate == 0.0 and never == 1.0
    verdict(2, "aoc matches brute force to 1e-12; boundary values 0 and 1", ok,
            f"max abs error {worst:.1e}, immediate={immediate}, never={never}")


def test_sdis_feasibility(verdict):
    rng = np.random.default_rng(3)
    dim, n = 5, 100_000
    lo, hi = -5.0 * np.ones(dim), 5.0 * np.ones(dim)
    x = rng.uniform(-5, 5, size=(n, dim))
    # every vector violates at least one coordinate, some far outside
    cols = rng.integers(dim, size=n)
    x[np.arange(n), cols] = rng.choice([-1, 1], size=n) * rng.uniform(5.0 + 1e-9, 50.0, size=n)
    extra = rng.random((n, dim)) < 0.2
    x[extra] = rng.uniform(-30, 30, size=extra.sum())
    target = rng.uniform(-5, 5, size=(n, dim))
    feasible = rng.uniform(-5, 5, size=(n, dim))
    feasible[:10, 0] = -5.0
    feasible[10:20, 1] = 5.0
    failures = []
    for s in (s for s in STRATEGIES if s != "none"):
        out = correct(s, x, target, lo, hi, rng)
        same = correct(s, feasible, target, lo, hi, rng)
        if not (np.all(out >= lo) and np.all(out <= hi)):
            failures.append(f"{s}: infeasible output")
        if not np.array_equal(same, feasible):
            failures.append(f"{s}: not idempotent")
    verdict(3, "9 SDIS strategies map 1e5 infeasible vectors into the box and fix feasible ones",
            not failures, "; ".join(failures) or "all 9 strategies")


def _paired_runs(criterion, configs, function, budget, n_runs, measure):
    out = [[] for _ in configs]
    for i in range(n_runs):
        problem = make_instance(function, 5, 1 + i % 10)
        seed = run_seed(criterion, i)
        for k, cfg in enumerate(configs):
            out[k].append(measure(engine.run(cfg, problem, budget, seed)))
    return [np.array(v) for v in out]


def test_boundary_optimum_sensitivity(verdict):
    saturate = presets.single_module_baseline(5)
    toroidal = presets.resolve("sdis=toroidal", 5)
    a, b = _paired_runs(4, [saturate, toroidal], "linear_slope", 10_000, 20, lambda r: metrics.run_aoc(r.log))
    p = stats.wilcoxon(a, b, alternative="less").pvalue
    verdict(4, "saturate beats toroidal on linear slope (mean AOC, Wilcoxon 0.05)",
            a.mean() < b.mean() and p < 0.05, f"AOC {a.mean():.4f} vs {b.mean():.4f}, p={p:.2g}")


def test_shell_initialization_effect(verdict):
    gaussian = presets.resolve("sampler=gaussian", 5)
    uniform = presets.single_module_baseline(5)
    a, b = _paired_runs(5, [gaussian, uniform], "shell", 5_000, 20, lambda r: r.best.fitness)
    p = stats.wilcoxon(a, b, alternative="less").pvalue
    verdict(5, "gaussian init beats uniform on shell after 5000 evaluations (Wilcoxon 0.05)",
            a.mean() < b.mean() and p < 0.05, f"precision {a.mean():.4f} vs {b.mean():.4f}, p={p:.2g}")


def test_eigen_crossover_exactness(verdict):
    rng = np.random.default_rng(6)
    replay_err = ortho_err = recon_err = 0.0
    for k in range(100):
        n, d = int(rng.integers(4, 30)), int(rng.integers(2, 21))
        pop = rng.normal(size=(n, d)) * rng.uniform(0.01, 5.0, size=d)
        mutant = rng.normal(size=(n, d))
        method = "bin" if k % 2 else "exp"
        trial, mask = eigen_crossover(pop, mutant, rng.random(), method, population=pop, rng=rng, return_mask=True)
        R, mean = population_rotation(pop)
        replay = apply_mask((pop - mean) @ R, (mutant - mean) @ R, mask) @ R.T + mean
        replay_err = max(replay_err, np.abs(trial - replay).max())
        ortho_err = max(ortho_err, np.abs(R.T @ R - np.eye(d)).max())
        m = rng.normal(size=(d, d))
        spd = m @ m.T + 1e-3 * np.eye(d)
        w, V = eigen_decompose(spd)
        recon_err = max(recon_err, np.abs(V @ np.diag(w) @ V.T - spd).max())
    ok = replay_err <= 1e-10 and ortho_err <= 1e-10 and recon_err < 1e-8
    verdict(6, "eigen crossover replay 1e-10, R^T R = I 1e-10, Jacobi reconstruction < 1e-8", ok,
            f"replay {replay_err:.1e}, orthogonality {ortho_err:.1e}, reconstruction {recon_err:.1e}")


def test_shade_and_lpsr_oracles(verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        f, cr, delta = rng.uniform(0.01, 1, n), rng.random(n), 10.0 ** rng.uniform(-8, 4, n)
        num = den = acc = 0.0
        total = sum(delta)
        for fi, ci, di in zip(f, cr, delta):
            num += di / total * fi * fi
            den += di / total * fi
            acc += di / total * ci
        mem = shade_update(ShadeMemory(), f, cr, delta)
        worst = max(worst, abs(mem.m_f[0] - num / den), abs(mem.m_cr[0] - acc))
    endpoints = lpsr_size(90, 0, 10_000) == 90 and lpsr_size(90, 10_000, 10_000) == 4
    result = engine.run(presets.common_variant("L-SHADE", 5), make_instance("rastrigin", 5), 10_000, run_seed(7, 0))
    sizes = result.population_sizes
    monotone = all(a >= b for a, b in zip(sizes, sizes[1:]))
    ok = worst <= 1e-12 and endpoints and monotone and sizes[0] == 90 and sizes[-1] == 4
    verdict(7, "SHADE means match hand computation to 1e-12; LPSR endpoints exact and monotone", ok,
            f"max error {worst:.1e}, trace {sizes[0]}->{sizes[-1]} over {len(sizes)} generations")


def test_preset_fidelity(verdict):
    problems = []
    for dim in (5, 10, 20):
        common = presets.common_variants(dim)
        single = presets.single_module_variants(dim)
        if len(common) != 11 or len(single) != 30:
            problems.append(f"D={dim}: {len(common)} common, {len(single)} single-module")
        for cfg in [*common.values(), *single.values()]:
            cfg.validate()
        got = {name: cfg.digest() for name, cfg in {**common, **single}.items()}
        if got != GOLDEN[str(dim)]:
            problems.append(f"D={dim}: digests differ from golden file")
    dim, budget = 5, 20_000
    result = engine.run(presets.common_variant("L-SHADE", dim), make_instance("sphere", dim), budget, run_seed(8, 0))
    sizes = result.population_sizes
    distinct = [s for i, s in enumerate(sizes) if i == 0 or s != sizes[i - 1]]
    # sampled at ten evenly spaced budget fractions, the trace must drop every time
    checkpoints = [lpsr_size(18 * dim, budget * k / 10, budget) for k in range(11)]
    strictly = all(a > b for a, b in zip(distinct, distinct[1:])) and all(
        a > b for a, b in zip(checkpoints, checkpoints[1:]))
    trace_ok = sizes[0] == 18 * dim and sizes[-1] == 4 and strictly
    if not trace_ok:
        problems.append(f"L-SHADE trace {sizes[0]}->{sizes[-1]} not strictly decreasing")
    verdict(8, "11 presets and 30 single-module variants match golden digests; L-SHADE shrinks 18D -> 4",
            not problems, "; ".join(problems) or f"trace {distinct[0]}->{distinct[-1]} in {len(distinct)} steps")


def test_tuner_improvement(verdict):
    run_budget = 2000
    tuning = [make_instance("sphere", 5, i) for i in range(1, 6)]
    held_out = [make_instance("sphere", 5, i) for i in range(6, 11)]
    seeds = [run_seed(9, i) for i in range(20)]

    def held_out_aoc(cfg):
        return float(np.mean([
            metrics.run_aoc(engine.run(cfg, p, run_budget, seeds[4 * j + r]).log)
            for j, p in enumerate(held_out) for r in range(4)
        ]))

    start = time.perf_counter()
    reference = held_out_aoc(Configuration())
    wins, scores = 0, []
    for tuner_seed in range(10):
        task = TuningTask(tuning, run_budget=run_budget, tuning_budget=500, seed=tuner_seed)
        result = tune(task)
        assert result.runs <= 500
        score = held_out_aoc(result.elites[0])
        scores.append(score)
        wins += score <= reference
    elapsed = time.perf_counter() - start
    verdict(9, "tuned elite's held-out AOC <= default's in >= 9/10 tuner seeds within 10 minutes",
            wins >= 9 and elapsed < 600,
            f"{wins}/10 wins, default {reference:.3f}, elites {min(scores):.3f}-{max(scores):.3f}, {elapsed:.0f}s")


def _tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_determinism(verdict, tmp_path):
    commands = {
        "run": ["run", "--preset", "SHADE", "--function", "rastrigin", "--budget", "500", "--instances", "2",
                "--reps", "2", "--seed", "10"],
        "benchmark": ["benchmark", "--portfolio", "common", "--dims", "5", "--functions", "shell",
                      "--budget", "300", "--instances", "1", "--reps", "1", "--seed", "10"],
        "tune": ["tune", "--function", "sphere", "--dim", "3", "--tuning-budget", "60", "--run-budget", "200",
                 "--reps", "1", "--seed", "10"],
    }
    differing = []
    for name, args in commands.items():
        outputs = []
        for attempt in ("a", "b"):
            out = tmp_path / name / attempt
            assert main(args + ["--out", str(out)]) == 0
            outputs.append(_tree_bytes(out))
        if outputs[0] != outputs[1]:
            differing.append(name)
    reports = []
    for attempt in ("a", "b"):
        out = tmp_path / "report" / attempt
        assert main(["report", "--logs", str(tmp_path / "run" / "a"), "--out", str(out)]) == 0
        reports.append(_tree_bytes(out))
    if reports[0] != reports[1]:
        differing.append("report")
    verdict(10, "run, benchmark, tune and report are byte-identical under a repeated seed", not differing,
            "differs: " + ", ".join(differing) if differing else "4 commands checked")
