"""Acceptance suite: ten end-to-end criteria, one pass/fail line each.

Run with `pytest -v tests/test_acceptance.py` (add -s to stream the lines).
Every criterion prints `criterion N (<label>): PASS|FAIL <evidence>` and
asserts both the statistical target and, where stated, the runtime budget.
"""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np

from clipcov.bench import run_benchmark, validate_coverage
from clipcov.certify import (
    normalized_products,
    paired_variance_proxy,
    suffix_max,
)
from clipcov.clipping import clip_rows, clip_vector, pilot_radius
from clipcov.select import lepski_select, mom_mean, run_pipeline
from clipcov.symmat import op_norm
from clipcov.synth import ScenarioConfig

NATIVE = dict(n=400, d=200, r=5, theta=10.0, replications=3, seed=11)


def report(num, label, ok, detail):
    line = f"criterion {num} ({label}): {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    assert ok, line


def test_criterion_01_deterministic_invariants():
    t0 = time.perf_counter()
    rng = np.random.default_rng(100)
    problems = []

    # variance proxy norm never above 1/2, products between 0 and I
    worst_proxy = 0.0
    for i in range(1000):
        n_k = 2 * int(rng.integers(1, 16))
        d = int(rng.integers(1, 8))
        r = float(rng.uniform(0.2, 4.0))
        rows = clip_rows(rng.standard_normal((n_k, d)) * rng.uniform(0.1, 5.0), r)
        prods = normalized_products(rows, r)
        v_star = paired_variance_proxy(prods)
        worst_proxy = max(worst_proxy, op_norm(v_star))
        if i % 100 == 0:
            vals = np.linalg.eigvalsh(prods[0])
            if vals.min() < -1e-12 or vals.max() > 1.0 + 1e-12:
                problems.append("product outside [0, I]")
    if worst_proxy > 0.5 + 1e-12:
        problems.append(f"proxy norm {worst_proxy}")

    # pilot radius nonincreasing in gamma
    for _ in range(100):
        w = rng.gamma(2.0, 2.0, size=int(rng.integers(20, 200)))
        gammas = np.sort(rng.uniform(2.0 / w.size, 0.5, size=4))
        radii = [pilot_radius(w, g) for g in gammas]
        if any(a < b for a, b in zip(radii, radii[1:])):
            problems.append("radius not monotone in gamma")
            break

    # envelope monotonized above the aggregate, bias proxy nondecreasing
    for seed in range(5):
        data = np.random.default_rng(200 + seed).standard_normal((240, 8)) * 2.0
        res = run_pipeline(data, K=2, delta=0.1, seed=seed)
        if np.any(np.diff(res.envelope.psi_bar) > 1e-15):
            problems.append("psi_bar increases")
        if np.any(res.envelope.psi_bar < res.envelope.psi - 1e-15):
            problems.append("psi_bar below psi")
        if np.any(np.diff(res.proxy.aggregated) < -1e-15):
            problems.append("bias proxy decreases")
        if (suffix_max(res.envelope.psi) != res.envelope.psi_bar).any():
            problems.append("psi_bar is not the suffix max")

    # clipping: idempotent to rounding, exactly scale equivariant at c=2,
    # and inert when the radius dominates every norm
    for _ in range(200):
        d = int(rng.integers(1, 12))
        z = rng.standard_normal(d) * rng.uniform(0.1, 8.0)
        r = float(rng.uniform(0.2, 4.0))
        once = clip_vector(z, r)
        if not np.allclose(clip_vector(once, r), once, rtol=1e-14, atol=0.0):
            problems.append("clip not idempotent")
            break
        if not (clip_vector(2.0 * z, 2.0 * r) == 2.0 * once).all():
            problems.append("clip not scale equivariant")
            break
    rows = rng.standard_normal((60, 5))
    r_big = float(np.linalg.norm(rows, axis=1).max())
    if not (clip_rows(rows, r_big) == rows).all():
        problems.append("no-clip case altered rows")
    scm_direct = rows.T @ rows / 60
    from clipcov.clipping import fold_covariance

    if np.abs(fold_covariance(rows, r_big) - scm_direct).max() > 1e-13:
        problems.append("no-clip covariance differs from SCM")

    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 60.0
    report(1, "deterministic invariants", ok,
           f"worst proxy norm {worst_proxy:.6f} <= 0.5, issues={problems or 'none'} [{elapsed:.1f}s < 60s]")


def test_criterion_02_certificate_coverage():
    t0 = time.perf_counter()
    result = validate_coverage(n=200, d=20, K=2, delta=0.1, replications=500, seed=0)
    elapsed = time.perf_counter() - t0
    ok = result.fraction >= 0.90 and elapsed < 600.0
    report(2, "certificate coverage", ok,
           f"{result.successes}/{result.replications} covered "
           f"(CI [{result.ci_low:.4f}, {result.ci_high:.4f}]) >= 0.90 [{elapsed:.1f}s < 600s]")


def test_criterion_03_contaminated_student_t_benchmark():
    t0 = time.perf_counter()
    config = ScenarioConfig(distribution="t", df=4.5, epsilon=0.1, kappa=100.0, **NATIVE)
    rep = run_benchmark(config, ("ours-minupper", "scm"))
    ours = rep.aggregates["ours-minupper"]["cov_err"][0]
    ours_eig = rep.aggregates["ours-minupper"]["eig_err"][0]
    scm_err = rep.aggregates["scm"]["cov_err"][0]
    elapsed = time.perf_counter() - t0
    ok = 0.25 <= ours <= 0.90 and scm_err > 10.0 and ours_eig < 0.7 and elapsed < 120.0
    report(3, "contaminated t(4.5) benchmark", ok,
           f"ours cov_err={ours:.3f} in [0.25, 0.90], scm={scm_err:.2f} > 10, "
           f"ours eig_err={ours_eig:.3f} < 0.7 [{elapsed:.1f}s < 120s]")


def test_criterion_04_contaminated_lognormal_benchmark():
    t0 = time.perf_counter()
    config = ScenarioConfig(distribution="signed_lognormal", epsilon=0.1, kappa=100.0, **NATIVE)
    rep = run_benchmark(config, ("ours-minupper", "scm"))
    ours = rep.aggregates["ours-minupper"]["cov_err"][0]
    scm_err = rep.aggregates["scm"]["cov_err"][0]
    elapsed = time.perf_counter() - t0
    ok = 0.2 <= ours <= 0.6 and scm_err > 10.0 and elapsed < 120.0
    report(4, "contaminated signed log-normal benchmark", ok,
           f"ours cov_err={ours:.3f} in [0.2, 0.6], scm={scm_err:.2f} > 10 [{elapsed:.1f}s < 120s]")


def test_criterion_05_uncontaminated_stress():
    t0 = time.perf_counter()
    details = []
    ok = True
    for dist, kw in (("t", {"df": 3.0}), ("signed_F", {})):
        config = ScenarioConfig(distribution=dist, epsilon=0.0, kappa=1.0, **NATIVE, **kw)
        rep = run_benchmark(config, ("ours-minupper", "scm"))
        ours = [r.cov_err for r in rep.rows if r.estimator == "ours-minupper"]
        scm_errs = [r.cov_err for r in rep.rows if r.estimator == "scm"]
        wins = sum(o < s for o, s in zip(ours, scm_errs))
        ok = ok and wins >= 2 and max(ours) < 1.0
        details.append(f"{dist}: wins {wins}/3, max ours {max(ours):.3f} < 1.0")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 120.0
    report(5, "clean heavy-tail stress", ok, "; ".join(details) + f" [{elapsed:.1f}s < 120s]")


def test_criterion_06_mom_coverage():
    t0 = time.perf_counter()
    # Pareto(2.5) shifted to start at 1: mean 5/3, second moment 5
    a = 2.5
    mu = a / (a - 1.0)
    sd = math.sqrt(a / (a - 2.0) - mu * mu)
    m, delta = 2000, 0.1
    B = math.ceil(8.0 * math.log(2.0 / delta))
    bound = 4.0 * sd * math.sqrt(math.log(2.0 / delta) / m)
    hits = 0
    for rep in range(500):
        g = np.random.default_rng(np.random.SeedSequence(entropy=777, spawn_key=(9, rep)))
        x = g.pareto(a, size=m) + 1.0
        hits += abs(mom_mean(x, B) - mu) <= bound
    elapsed = time.perf_counter() - t0
    ok = hits >= 450 and elapsed < 60.0
    report(6, "median-of-means coverage", ok,
           f"{hits}/500 within {bound:.4f} of the mean (need 450) [{elapsed:.1f}s < 60s]")


def test_criterion_07_lepski_contract():
    from clipcov.certify import VarianceEnvelope
    from clipcov.clipping import ClippedFamily
    from clipcov.model import GammaGrid

    def drive(gammas, ests, psi_bar):
        family = ClippedFamily(
            grid=GammaGrid(rho=2.0, values=np.asarray(gammas, dtype=np.float64)),
            aggregated=ests,
            per_fold=ests[None],
            weights=np.array([1.0]),
            fold_sizes=np.array([2]),
            fold_rows=(np.zeros((2, ests.shape[1])),),
        )
        envelope = VarianceEnvelope(
            proxy_norms=np.zeros((1, len(gammas))),
            dev_radius=np.zeros((1, len(gammas))),
            fold_psi=np.asarray(psi_bar)[None],
            psi=np.asarray(psi_bar, dtype=np.float64),
            psi_bar=np.asarray(psi_bar, dtype=np.float64),
            alpha=0.01,
            proxies=np.zeros((1, len(gammas), ests.shape[1], ests.shape[1])),
        )
        return lepski_select(family, envelope)

    rng = np.random.default_rng(300)
    bad = 0
    for _ in range(200):
        G = int(rng.integers(2, 10))
        d = int(rng.integers(1, 5))
        base = rng.standard_normal((d, d))
        ests = np.stack([base + rng.standard_normal((d, d)) * rng.uniform(0, 2) for _ in range(G)])
        ests = (ests + ests.transpose(0, 2, 1)) / 2
        psi_bar = np.sort(rng.uniform(0.05, 2.0, size=G))[::-1].copy()
        sel = drive(np.linspace(0.05, 0.5, G), ests, psi_bar)
        admissible_ok = all(
            op_norm(ests[sel.index] - ests[s]) <= 3.0 * psi_bar[s] + 1e-12
            for s in range(sel.index)
        )
        maximal_ok = all(
            any(op_norm(ests[j] - ests[s]) > 3.0 * psi_bar[s] for s in range(j))
            for j in range(sel.index + 1, G)
        )
        bad += not (admissible_ok and maximal_ok)

    # constructed violation: every level beyond the first sits 4 psi_bar
    # away, so the selector must fall back to the first level
    ests = np.stack([np.zeros((2, 2)), 4.0 * np.eye(2), 4.0 * np.eye(2)])
    sel = drive([0.1, 0.2, 0.4], ests, [1.0, 1.0, 1.0])
    fallback_ok = sel.index == 0 and sel.violation_witness is not None
    ok = bad == 0 and fallback_ok
    report(7, "adaptive selection contract", ok,
           f"200 fuzzed grids admissible+maximal (violations={bad}), "
           f"fallback to first level exercised={fallback_ok}")


def test_criterion_08_quantile_tail_bounds():
    # Exponential(1) norms: the exact tail at the pilot radius is exp(-T)
    n, p = 1000, 100
    lo, hi = 0.5 * p / n, 1.5 * p / n
    need = math.ceil((1.0 - 2.0 * math.exp(-p / 12.0)) * 500)
    hits = 0
    for rep in range(500):
        g = np.random.default_rng(np.random.SeedSequence(entropy=888, spawn_key=(4, rep)))
        w = g.exponential(1.0, size=n)
        tail = math.exp(-pilot_radius(w, p / n))
        hits += lo <= tail <= hi
    ok = hits >= need
    report(8, "quantile tail bounds", ok,
           f"{hits}/500 replications inside [{lo}, {hi}] (need {need})")


def test_criterion_09_native_scale_runtime():
    rng = np.random.default_rng(500)
    raw = rng.standard_normal((400, 200))
    t0 = time.perf_counter()
    res = run_pipeline(raw, K=2, delta=0.1, seed=0, selector="minupper")
    elapsed = time.perf_counter() - t0
    ok = elapsed < 5.0 and res.grid.size == 8
    report(9, "native-scale runtime", ok,
           f"(n, d)=(400, 200), {res.grid.size}-level grid in {elapsed:.2f}s < 5s")


def test_criterion_10_thread_count_determinism(tmp_path):
    rng = np.random.default_rng(600)
    data_path = tmp_path / "rows.csv"
    np.savetxt(data_path, rng.standard_normal((300, 8)) * 1.5, fmt="%.10g", delimiter=",")
    scenario = {
        "distribution": "t", "df": 4.5, "n": 160, "d": 6, "r": 2, "theta": 4.0,
        "epsilon": 0.1, "kappa": 25.0, "replications": 2, "seed": 3,
    }
    config_path = tmp_path / "scenario.json"
    config_path.write_text(json.dumps(scenario))

    def run_all(tag, threads):
        env = dict(os.environ)
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            env[var] = str(threads)
        out = tmp_path / f"cov_{tag}.csv"
        bench_dir = tmp_path / f"bench_{tag}"
        for argv in (
            ["estimate", "--input", str(data_path), "--output", str(out), "--seed", "4"],
            ["bench", "--config", str(config_path), "--out", str(bench_dir)],
        ):
            proc = subprocess.run(
                [sys.executable, "-m", "clipcov.cli", *argv],
                env=env, capture_output=True, text=True,
            )
            assert proc.returncode == 0, proc.stderr
        metrics = []
        for line in (bench_dir / "metrics.csv").read_text().splitlines()[1:]:
            cells = line.split(",")
            metrics.append(tuple(cells[:-1]))  # drop the wall-time column
        return out.read_bytes(), metrics

    cov_1, metrics_1 = run_all("one", 1)
    cov_4, metrics_4 = run_all("four", 4)
    cov_ok = cov_1 == cov_4
    metrics_ok = metrics_1 == metrics_4
    ok = cov_ok and metrics_ok
    report(10, "thread-count determinism", ok,
           f"covariance bytes identical={cov_ok}, metric values identical={metrics_ok} "
           f"across OMP/BLAS thread counts 1 and 4")
