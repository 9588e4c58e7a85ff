"""Cross-fitted Euclidean norm clipping.

Pilot radii are empirical norm quantiles of each training split J_k; rows of
the disjoint test fold I_k are clipped at that radius and averaged into
per-fold second-moment matrices, which aggregate with weights n_k / n. All
reductions use fixed-order einsums so results do not depend on BLAS
threading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .model import Dataset, FoldPlan, GammaGrid, as_dataset, floor_guarded
from .rng import STREAM_CENTER, derived_rng


def center_paired(raw, seed: int) -> Dataset:
    """Reduce raw observations to mean-zero rows by disjoint pair differences.

    A seeded permutation pairs consecutive rows; each output row is the
    difference of one pair scaled by 1/sqrt(2), which preserves the
    covariance and cancels any common mean at the cost of halving n. An odd
    trailing row is discarded.
    """
    data = as_dataset(raw)
    if data.n < 2:
        raise InputError("paired centering needs at least 2 rows")
    perm = derived_rng(seed, STREAM_CENTER).permutation(data.n)
    m = data.n // 2
    left = data.rows[perm[0 : 2 * m : 2]]
    right = data.rows[perm[1 : 2 * m : 2]]
    return Dataset((left - right) / math.sqrt(2.0))


def _pilot_radius_sorted(w_sorted: np.ndarray, gamma: float) -> tuple[float, bool]:
    """Stabilized quantile radius from ascending norms; also reports whether
    the positive-norm stabilizer overrode the order statistic."""
    m = w_sorted.size
    p = floor_guarded(gamma * m)
    if p < 1:
        raise ConfigError(f"gamma * |J_k| must be >= 1, got gamma={gamma}, m={m}")
    r_hat = float(w_sorted[m - p - 1])
    first_pos = int(np.searchsorted(w_sorted, 0.0, side="right"))
    r_min = float(w_sorted[first_pos]) if first_pos < m else 1.0
    return max(r_hat, r_min), r_min > r_hat


def pilot_radius(train_norms, gamma: float) -> float:
    """Stabilized empirical (1 - gamma)-quantile of training norms.

    Returns max(r_hat, r_min) where r_hat is the ascending order statistic
    W_(m-p) with p = floor(gamma m), so at most a gamma-fraction of training
    norms strictly exceed it, and r_min is the smallest strictly positive
    norm (1 when every norm is zero). The stabilizer keeps the radius
    positive so normalized products stay well defined.
    """
    w = np.asarray(train_norms, dtype=np.float64)
    if w.ndim != 1 or w.size == 0:
        raise InputError("train_norms must be a nonempty 1-D collection")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InputError("norms must be finite and nonnegative")
    r, _ = _pilot_radius_sorted(np.sort(w), float(gamma))
    return r


def clip_vector(z, r: float) -> np.ndarray:
    """Scale z to Euclidean norm at most r, preserving direction.

    The zero vector passes through unchanged (the ratio r / ||z|| is taken
    as +inf).
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise InputError("clip_vector expects a 1-D vector")
    # single row through clip_rows so both entry points share one norm
    # computation and agree bitwise
    return clip_rows(z[None, :], r)[0]


def clip_rows(rows: np.ndarray, r: float) -> np.ndarray:
    """Row-wise clip_vector. Rows already inside the ball are untouched bitwise."""
    if r <= 0:
        raise ConfigError(f"clip radius must be positive, got {r}")
    rows = np.asarray(rows, dtype=np.float64)
    norms = np.linalg.norm(rows, axis=1)
    scale = np.ones_like(norms)
    over = norms > r
    scale[over] = r / norms[over]
    return rows * scale[:, None]


def fold_covariance(test_rows, r: float) -> np.ndarray:
    """Clipped second-moment matrix (1/n_k) sum clip(z_i, r) clip(z_i, r)^T.

    PSD by construction with operator norm at most r^2.
    """
    rows = np.asarray(test_rows, dtype=np.float64)
    if rows.ndim != 2:
        raise InputError("test rows must form a 2-D array")
    n_k = rows.shape[0]
    if n_k < 2 or n_k % 2:
        raise InputError(f"fold size must be even and >= 2, got {n_k}")
    clipped = clip_rows(rows, r)
    return np.einsum("ij,ik->jk", clipped, clipped, optimize=False) / n_k


@dataclass(frozen=True)
class PilotRadii:
    """Per-(fold, gamma) stabilized radii; flags mark stabilizer overrides."""

    table: np.ndarray
    stabilizer_used: np.ndarray


@dataclass(frozen=True)
class ClippedFamily:
    """Clipped covariance estimates along the grid.

    fold_rows keeps each test fold's rows in fold-plan order (the order that
    fixes proxy pairing and MoM blocks downstream); per_fold[k, j] is fold
    k's estimate at grid level j; aggregated[j] is the n_k/n-weighted
    combination.
    """

    grid: GammaGrid
    aggregated: np.ndarray
    per_fold: np.ndarray
    weights: np.ndarray
    fold_sizes: np.ndarray
    fold_rows: tuple


def build_family(data, plan: FoldPlan, grid: GammaGrid) -> tuple[PilotRadii, ClippedFamily]:
    """Compute pilot radii and the clipped covariance family.

    Radii for fold k come strictly from the training split J_k; clipping and
    averaging happen on the disjoint test fold I_k, so each radius is fixed
    conditional on the training data.
    """
    data = as_dataset(data)
    if plan.n != data.n:
        raise InputError(f"fold plan built for n={plan.n}, data has n={data.n}")
    K, G, d = plan.K, grid.size, data.d
    norms = np.linalg.norm(data.rows, axis=1)

    table = np.zeros((K, G))
    flags = np.zeros((K, G), dtype=bool)
    per_fold = np.zeros((K, G, d, d))
    fold_rows = []
    for k in range(K):
        train_sorted = np.sort(norms[plan.train_indices(k)])
        rows_k = data.rows[plan.folds[k]]
        fold_rows.append(rows_k)
        for j, gamma in enumerate(grid.values):
            r, used = _pilot_radius_sorted(train_sorted, float(gamma))
            table[k, j] = r
            flags[k, j] = used
            per_fold[k, j] = fold_covariance(rows_k, r)

    sizes = plan.fold_sizes.astype(np.float64)
    weights = sizes / sizes.sum()
    aggregated = np.einsum("k,kjab->jab", weights, per_fold, optimize=False)
    family = ClippedFamily(
        grid=grid,
        aggregated=aggregated,
        per_fold=per_fold,
        weights=weights,
        fold_sizes=plan.fold_sizes,
        fold_rows=tuple(fold_rows),
    )
    return PilotRadii(table=table, stabilizer_used=flags), family
