"""Data model for the estimator: centered datasets, cross-fitting fold plans,
geometric clipping-level grids, and confidence-budget allocation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .rng import STREAM_FOLDS, derived_rng

GAMMA_MAX = 0.5

# Guard for products like gamma * m whose mathematical value is an integer
# but whose float image can fall a few ulps short (e.g. gamma = 1/200).
_FLOOR_EPS = 1e-9


def floor_guarded(x: float) -> int:
    return int(math.floor(x + _FLOOR_EPS))


@dataclass(frozen=True)
class Dataset:
    """Centered samples, one row per observation."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise InputError(f"dataset rows must form a 2-D array, got ndim={rows.ndim}")
        if rows.shape[0] < 1 or rows.shape[1] < 1:
            raise InputError("dataset needs at least one row and one column")
        if not np.all(np.isfinite(rows)):
            raise InputError("dataset contains non-finite entries")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


def as_dataset(x) -> Dataset:
    return x if isinstance(x, Dataset) else Dataset(np.asarray(x))


@dataclass(frozen=True)
class FoldPlan:
    """Disjoint test folds I_1..I_K plus indices dropped for evenness.

    Folds keep their seeded permutation order; that order is what makes the
    proxy pairing and MoM block layout deterministic downstream.
    """

    n: int
    folds: tuple
    dropped: np.ndarray

    @property
    def K(self) -> int:
        return len(self.folds)

    @property
    def fold_sizes(self) -> np.ndarray:
        return np.array([f.size for f in self.folds])

    def train_indices(self, k: int) -> np.ndarray:
        """J_k: every retained index outside fold k, in fold-plan order."""
        return np.concatenate([f for i, f in enumerate(self.folds) if i != k])

    @property
    def min_train(self) -> int:
        total = int(self.fold_sizes.sum())
        return int(total - self.fold_sizes.max())


def make_folds(n: int, K: int, seed: int) -> FoldPlan:
    """Split indices 0..n-1 into K disjoint even-sized test folds.

    A seeded permutation is cut into contiguous near-equal blocks; the last
    index of any odd-sized block is dropped so every fold supports disjoint
    pairing. Fold sizes differ by at most 2 after the adjustment.
    """
    n, K = int(n), int(K)
    if K < 2:
        raise ConfigError(f"need at least K=2 folds, got {K}")
    if n < 4 * K:
        raise ConfigError(f"need n >= 4K samples for K={K} folds, got n={n}")
    perm = derived_rng(seed, STREAM_FOLDS).permutation(n)
    base, extra = divmod(n, K)
    folds = []
    dropped = []
    start = 0
    for k in range(K):
        size = base + (1 if k < extra else 0)
        block = perm[start : start + size]
        start += size
        if size % 2:
            dropped.append(block[-1])
            block = block[:-1]
        folds.append(block.copy())
    plan = FoldPlan(n=n, folds=tuple(folds), dropped=np.array(dropped, dtype=perm.dtype))
    if plan.min_train < 4:
        raise ConfigError("every training split J_k must keep at least 4 samples")
    return plan


@dataclass(frozen=True)
class GammaGrid:
    """Ascending clipping levels gamma in (0, 1/2]."""

    rho: float
    values: np.ndarray

    @property
    def size(self) -> int:
        return self.values.size


def build_grid(min_train: int, rho: float = 2.0) -> GammaGrid:
    """Geometric grid of tail levels down from gamma_max = 1/2.

    gamma_min = min(1/4, 1/min_train) is appended so every level keeps
    gamma * |J_k| >= 1. Steps descend by the factor rho (dyadic by default);
    the ratio is capped at 2, which the level-rounding arguments behind the
    certificates require.
    """
    min_train = int(min_train)
    if min_train < 4:
        raise ConfigError(f"smallest training split must be >= 4, got {min_train}")
    rho = float(rho)
    if not 1.0 < rho <= 2.0:
        raise ConfigError(f"grid ratio rho must lie in (1, 2], got {rho}")
    gamma_min = min(0.25, 1.0 / min_train)
    n_steps = floor_guarded(math.log(GAMMA_MAX / gamma_min) / math.log(rho))
    values = [GAMMA_MAX * rho ** (-l) for l in range(n_steps + 1)]
    values.append(gamma_min)
    return GammaGrid(rho=rho, values=np.unique(np.asarray(values)))


@dataclass(frozen=True)
class ConfidenceBudget:
    """Failure-probability split across certificate cells and the bias proxy.

    alpha is the per-(fold, gamma) allocation delta_var / (2 K |G|); B is the
    MoM block count ceil(8 log(2 K |G| / delta_bias)).
    """

    delta: float
    delta_var: float
    delta_bias: float
    alpha: float
    B: int
    K: int
    grid_size: int


def alloc_confidence(delta: float, K: int, grid_size: int) -> ConfidenceBudget:
    """Split a global failure probability delta into certificate and proxy halves."""
    delta = float(delta)
    if not 0.0 < delta < 1.0:
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    K, grid_size = int(K), int(grid_size)
    if K < 2:
        raise ConfigError(f"need at least K=2 folds, got {K}")
    if grid_size < 1:
        raise ConfigError("grid must be nonempty")
    delta_var = delta / 2.0
    delta_bias = delta / 2.0
    cells = 2.0 * K * grid_size
    return ConfidenceBudget(
        delta=delta,
        delta_var=delta_var,
        delta_bias=delta_bias,
        alpha=delta_var / cells,
        B=int(math.ceil(8.0 * math.log(cells / delta_bias))),
        K=K,
        grid_size=grid_size,
    )
