"""Benchmark harness: baselines, spectral error metrics, the scenario
runner, and a Monte Carlo validator for the variance certificates.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .certify import certify_family
from .clipping import build_family
from .errors import ConfigError, DomainError, InputError
from .model import ConfidenceBudget, Dataset, as_dataset, build_grid, make_folds
from .rng import STREAM_ORACLE, STREAM_VALIDATE, derive_seed, derived_rng
from .select import mom_mean, run_pipeline
from .symmat import eig_sym, op_norm, symmetrize, top_r_projector
from .synth import ScenarioConfig, contaminate, make_spiked_sigma, sample_clean

ESTIMATORS = ("ours-minupper", "ours-lepski", "scm", "mom-entry")

# MoM-Entry block count: ceil(8 log(2 / 0.05)) = 30.
MOM_ENTRY_BLOCKS = 30


def scm(data) -> np.ndarray:
    """Sample second-moment matrix (1/n) sum z z^T of centered rows."""
    rows = as_dataset(data).rows
    return np.einsum("ij,ik->jk", rows, rows, optimize=False) / rows.shape[0]


def mom_entry_cov(data, n_blocks: int = MOM_ENTRY_BLOCKS) -> np.ndarray:
    """Entrywise median-of-means covariance baseline.

    Entry (a, b) is the median over B consecutive blocks of the block means
    of z_i[a] z_i[b], with the same lower-middle median convention as
    mom_mean. Block means are symmetric matrices, so the entrywise median is
    symmetric by construction.
    """
    rows = as_dataset(data).rows
    B = int(n_blocks)
    if B < 1:
        raise ConfigError(f"block count must be >= 1, got {B}")
    n, d = rows.shape
    if n < B:
        raise ConfigError(f"need n >= B rows, got n={n}, B={B}")
    m0 = n // B
    used = rows[: B * m0].reshape(B, m0, d)
    block_means = np.einsum("bij,bik->bjk", used, used, optimize=False) / m0
    med = np.sort(block_means, axis=0)[(B - 1) // 2]
    return symmetrize(med)


def cov_err(est, truth) -> float:
    """Relative operator-norm error ||est - truth|| / ||truth||."""
    est = np.asarray(est, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if est.shape != truth.shape:
        raise InputError(f"shape mismatch: {est.shape} vs {truth.shape}")
    denom = op_norm(truth)
    if denom == 0.0:
        raise DomainError("truth covariance has zero operator norm")
    return op_norm(est - truth) / denom


def subspace_err(est, truth, r: int) -> float:
    """Projector distance ||P_est - P_truth||_F / sqrt(2r) in [0, 1].

    Warns when either spectrum has a degenerate gap at r (the subspace is
    then ill-defined up to rotation).
    """
    d = np.asarray(truth).shape[0]
    r = int(r)
    if not 1 <= r < d:
        raise ConfigError(f"subspace rank r={r} must satisfy 1 <= r < d={d}")
    p_true = top_r_projector(truth, r)
    p_est = top_r_projector(est, r)
    if p_true.degenerate or p_est.degenerate:
        warnings.warn(f"eigenvalue gap at r={r} below tolerance; subspace ill-defined")
    err = float(np.linalg.norm(p_est.matrix - p_true.matrix)) / math.sqrt(2.0 * r)
    return min(max(err, 0.0), 1.0)


def eig_err(est, truth, r: int) -> float:
    """Mean relative error of the top-r eigenvalues."""
    r = int(r)
    vals_t = eig_sym(truth).values[:r]
    if vals_t.size < r or np.any(vals_t <= 0):
        raise DomainError("top-r eigenvalues of truth must exist and be positive")
    vals_e = eig_sym(est).values[:r]
    return float(np.mean(np.abs(vals_e - vals_t) / vals_t))


@dataclass(frozen=True)
class MetricRow:
    """Metrics for one estimator on one replication."""

    estimator: str
    replication: int
    cov_err: float
    subspace_err: float
    eig_err: float
    wall_time_seconds: float


@dataclass(frozen=True)
class BenchReport:
    """Scenario echo, per-replication rows, aggregates, and grid diagnostics.

    aggregates[estimator][metric] = (mean, std) recomputable from rows;
    diagnostics[estimator] lists per-replication dicts with the chosen gamma
    and the Psi_bar / b_hat curves for the certified estimators.
    """

    scenario: ScenarioConfig
    rows: tuple
    aggregates: dict
    diagnostics: dict


_AGG_METRICS = ("cov_err", "subspace_err", "eig_err", "wall_time_seconds")


def aggregate_rows(rows) -> dict:
    """Per-estimator (mean, sample std) of each metric; std 0 for < 2 reps."""
    out: dict = {}
    for name in sorted({row.estimator for row in rows}):
        vals = {m: np.array([getattr(r, m) for r in rows if r.estimator == name]) for m in _AGG_METRICS}
        out[name] = {
            m: (float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0)
            for m, v in vals.items()
        }
    return out


def _run_estimator(name: str, data: Dataset, seed: int):
    """Returns (estimate, pipeline diagnostics or None)."""
    if name == "ours-minupper" or name == "ours-lepski":
        selector = name.split("-", 1)[1]
        result = run_pipeline(data, K=2, delta=0.1, rho=2.0, c_bias=1.0, seed=seed, selector=selector)
        diag = {
            "gamma": result.selection.gamma,
            "grid": result.grid.values.tolist(),
            "psi_bar": result.envelope.psi_bar.tolist(),
            "b_hat": result.proxy.aggregated.tolist() if result.proxy is not None else None,
        }
        return result.selection.estimate, diag
    if name == "scm":
        return scm(data), None
    if name == "mom-entry":
        return mom_entry_cov(data, MOM_ENTRY_BLOCKS), None
    raise ConfigError(f"unknown estimator {name!r}; expected one of {ESTIMATORS}")


def run_benchmark(config: ScenarioConfig, estimators=ESTIMATORS) -> BenchReport:
    """Run a contaminated spiked-covariance scenario.

    Each replication regenerates the rotated model and data from derived
    seeds, runs every estimator with wall-clock timing around the estimator
    call only, and scores against the replication's true Sigma. Results are
    deterministic per seed except the timings.
    """
    for name in estimators:
        if name not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {name!r}; expected one of {ESTIMATORS}")
    if not 1 <= config.r < config.d:
        raise ConfigError("benchmark metrics need 1 <= r < d")
    rows = []
    diagnostics: dict = {name: [] for name in estimators if name.startswith("ours-")}
    for rep in range(config.replications):
        model = make_spiked_sigma(config.d, config.r, config.theta, seed=derive_seed(config.seed, rep, 0))
        clean = sample_clean(
            model, config.distribution, config.n, derive_seed(config.seed, rep, 1),
            df=config.df, sigma=config.sigma, df_num=config.df_num, df_den=config.df_den,
        )
        data = contaminate(clean, model, config.epsilon, config.kappa, derive_seed(config.seed, rep, 2))
        for name in estimators:
            t0 = time.perf_counter()
            est, diag = _run_estimator(name, data, derive_seed(config.seed, rep, 3))
            elapsed = time.perf_counter() - t0
            rows.append(
                MetricRow(
                    estimator=name,
                    replication=rep,
                    cov_err=cov_err(est, model.sigma),
                    subspace_err=subspace_err(est, model.sigma, config.r),
                    eig_err=eig_err(est, model.sigma, config.r),
                    wall_time_seconds=elapsed,
                )
            )
            if diag is not None:
                diagnostics[name].append(diag)
    return BenchReport(
        scenario=config,
        rows=tuple(rows),
        aggregates=aggregate_rows(rows),
        diagnostics=diagnostics,
    )


class ClipMeanOracle:
    """Fresh-sample estimate of E[clip(Z, r) clip(Z, r)^T] as a function of r.

    One large sample is drawn once and sorted by norm; blocked prefix sums
    of raw and normalized outer products make each radius query cost one
    partial block instead of a full pass. The sample is independent of
    everything the estimator under test sees; reusing it across
    replications only correlates the oracle's own Monte Carlo noise, which
    is negligible at this size.
    """

    _BLOCK = 1000

    def __init__(self, sigma_sqrt: np.ndarray, size: int, seed: int):
        d = sigma_sqrt.shape[0]
        rng = derived_rng(seed, STREAM_ORACLE)
        chunks = []
        remaining = int(size)
        while remaining > 0:
            take = min(remaining, 200_000)
            chunks.append(rng.standard_normal((take, d)) @ sigma_sqrt)
            remaining -= take
        y = np.vstack(chunks)
        norms = np.linalg.norm(y, axis=1)
        order = np.argsort(norms, kind="stable")
        self.norms = norms[order]
        self.rows = y[order]
        safe = np.where(self.norms > 0, self.norms, 1.0)
        self.unit = self.rows / safe[:, None]
        self.size = int(size)
        self.sq_cumsum = np.concatenate([[0.0], np.cumsum(self.norms**2)])

        n_blocks = (self.size + self._BLOCK - 1) // self._BLOCK
        self._raw_prefix = np.zeros((n_blocks + 1, d, d))
        self._unit_prefix = np.zeros((n_blocks + 1, d, d))
        for b in range(n_blocks):
            lo, hi = b * self._BLOCK, min((b + 1) * self._BLOCK, self.size)
            self._raw_prefix[b + 1] = self._raw_prefix[b] + np.einsum(
                "ij,ik->jk", self.rows[lo:hi], self.rows[lo:hi], optimize=False
            )
            self._unit_prefix[b + 1] = self._unit_prefix[b] + np.einsum(
                "ij,ik->jk", self.unit[lo:hi], self.unit[lo:hi], optimize=False
            )

    def _prefix_outer(self, prefix: np.ndarray, rows: np.ndarray, j: int) -> np.ndarray:
        b = j // self._BLOCK
        out = prefix[b].copy()
        if b * self._BLOCK < j:
            part = rows[b * self._BLOCK : j]
            out += np.einsum("ij,ik->jk", part, part, optimize=False)
        return out

    def mean_clip_outer(self, r: float) -> np.ndarray:
        """Monte Carlo E[clip(Z, r) clip(Z, r)^T] at radius r."""
        j = int(np.searchsorted(self.norms, r, side="right"))
        inside = self._prefix_outer(self._raw_prefix, self.rows, j)
        unit_all = self._unit_prefix[-1]
        unit_inside = self._prefix_outer(self._unit_prefix, self.unit, j)
        outside = unit_all - unit_inside
        return symmetrize((inside + r * r * outside) / self.size)

    def tail_energy(self, r: float) -> float:
        """Monte Carlo E[||Z||^2 1{||Z|| > r}]."""
        j = int(np.searchsorted(self.norms, r, side="right"))
        return float((self.sq_cumsum[-1] - self.sq_cumsum[j]) / self.size)


def _clopper_pearson(successes: int, total: int, level: float = 0.95) -> tuple[float, float]:
    from scipy.stats import beta

    a = (1.0 - level) / 2.0
    lo = float(beta.ppf(a, successes, total - successes + 1)) if successes > 0 else 0.0
    hi = float(beta.ppf(1.0 - a, successes + 1, total - successes)) if successes < total else 1.0
    return lo, hi


@dataclass(frozen=True)
class CoverageResult:
    """Fraction of replications on which every per-fold certificate held."""

    fraction: float
    ci_low: float
    ci_high: float
    successes: int
    replications: int


def validate_coverage(
    n: int,
    d: int,
    K: int,
    delta: float,
    replications: int = 500,
    seed: int = 0,
    oracle_size: int = 1_000_000,
) -> CoverageResult:
    """Monte Carlo check of the per-fold variance certificates.

    Draws Z ~ N(0, I_d), runs the radii/clipping/certification stages, and
    checks the simultaneous event {||Sigma_hat_k(gamma) - E[Sigma_hat_k |
    train]|| <= Psi_k(gamma) for all k, gamma} against the fresh-sample
    conditional-mean oracle at the frozen radii. ``delta`` is the variance
    half-budget: the per-cell allocation is alpha = delta / (2 K |G|), so
    the success fraction should be at least 1 - delta (much closer to 1 in
    practice; the envelope is conservative). Returns the fraction with a
    95% Clopper-Pearson interval.
    """
    if replications < 100:
        raise ConfigError(f"need at least 100 replications, got {replications}")
    if not 0.0 < delta < 1.0:
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    n, d, K = int(n), int(d), int(K)
    oracle = ClipMeanOracle(np.eye(d), oracle_size, seed)
    successes = 0
    for rep in range(replications):
        rng = derived_rng(seed, STREAM_VALIDATE, rep)
        data = Dataset(rng.standard_normal((n, d)))
        plan = make_folds(n, K, derive_seed(seed, rep, 1))
        grid = build_grid(plan.min_train, 2.0)
        cells = 2.0 * K * grid.size
        budget = ConfidenceBudget(
            delta=2.0 * delta,
            delta_var=delta,
            delta_bias=delta,
            alpha=delta / cells,
            B=int(math.ceil(8.0 * math.log(cells / delta))),
            K=K,
            grid_size=grid.size,
        )
        radii, family = build_family(data, plan, grid)
        envelope = certify_family(family, radii, budget)
        ok = True
        for k in range(K):
            for j in range(grid.size):
                mean = oracle.mean_clip_outer(float(radii.table[k, j]))
                dev = op_norm(family.per_fold[k, j] - mean)
                if dev > envelope.fold_psi[k, j]:
                    ok = False
                    break
            if not ok:
                break
        successes += ok
    lo, hi = _clopper_pearson(successes, replications)
    return CoverageResult(
        fraction=successes / replications,
        ci_low=lo,
        ci_high=hi,
        successes=successes,
        replications=replications,
    )
