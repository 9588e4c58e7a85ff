"""Clipping-level selection and the end-to-end pipeline.

Two selectors over the certified family: MinUpper minimizes the monotonized
variance envelope plus a median-of-means estimate of the clipped-away tail
energy; the one-sided Lepski rule picks the most aggressive level whose
estimate stays within 3 Psi_bar of every less aggressive one.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .certify import VarianceEnvelope, certify_family
from .clipping import ClippedFamily, PilotRadii, build_family, center_paired
from .errors import ClipcovError, ConfigError, InputError
from .model import (
    ConfidenceBudget,
    Dataset,
    FoldPlan,
    GammaGrid,
    alloc_confidence,
    as_dataset,
    build_grid,
    make_folds,
)
from .symmat import op_norm


def mom_mean(values, n_blocks: int) -> float:
    """Median of B consecutive-block means.

    The first B * floor(m/B) values are split into B equal consecutive
    blocks; the trailing remainder is discarded. The median convention for
    even B is the lower-middle order statistic, so the result is always an
    actual block mean.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise InputError("values must be 1-D")
    B = int(n_blocks)
    if B < 1:
        raise ConfigError(f"block count must be >= 1, got {B}")
    if x.size < B:
        raise InputError(f"need at least B={B} values, got {x.size}")
    m0 = x.size // B
    means = x[: B * m0].reshape(B, m0).mean(axis=1)
    return float(np.sort(means)[(B - 1) // 2])


@dataclass(frozen=True)
class BiasProxy:
    """MoM tail-energy proxies b_hat per fold and aggregated per level."""

    per_fold: np.ndarray
    aggregated: np.ndarray
    B: int
    block_sizes: np.ndarray


def bias_proxy(
    data, plan: FoldPlan, radii: PilotRadii, budget: ConfidenceBudget
) -> BiasProxy:
    """Median-of-means estimate of the clipped-away tail energy.

    Y_i = ||Z_i||^2 1{||Z_i|| > r_k(gamma)} over the test fold I_k in
    fold-plan order; blocks are the first B * floor(n_k / B) fold positions
    split consecutively. Aggregation uses the fold weights n_k / n.
    """
    data = as_dataset(data)
    K, G = radii.table.shape
    B = budget.B
    sizes = plan.fold_sizes
    for k in range(K):
        if sizes[k] < B:
            raise ConfigError(
                f"bias proxy needs every fold to hold at least B={B} samples "
                f"(MoM block count); fold {k} has n_k={sizes[k]}"
            )
    norms = np.linalg.norm(data.rows, axis=1)
    per_fold = np.zeros((K, G))
    for k in range(K):
        fold_norms = norms[plan.folds[k]]
        sq = fold_norms**2
        for j in range(G):
            r = radii.table[k, j]
            per_fold[k, j] = mom_mean(sq * (fold_norms > r), B)
    weights = sizes.astype(np.float64) / sizes.sum()
    aggregated = np.einsum("k,kj->j", weights, per_fold, optimize=False)
    return BiasProxy(
        per_fold=per_fold,
        aggregated=aggregated,
        B=B,
        block_sizes=sizes // B,
    )


@dataclass(frozen=True)
class Selection:
    """Chosen clipping level with the evidence behind the choice.

    objective is per-level Psi_bar + c_bias * b_hat for MinUpper (None for
    Lepski); admissible flags and the first violation witness
    (j, s, distance, bound) describe the Lepski scan (None for MinUpper).
    """

    method: str
    index: int
    gamma: float
    estimate: np.ndarray
    objective: np.ndarray | None = None
    admissible: np.ndarray | None = None
    violation_witness: tuple | None = None
    c_bias: float | None = None


def min_upper(
    family: ClippedFamily,
    envelope: VarianceEnvelope,
    proxy: BiasProxy,
    c_bias: float = 1.0,
) -> Selection:
    """Pick gamma minimizing Psi_bar(gamma) + c_bias * b_hat(gamma).

    Ties break toward the largest gamma (the smallest certified variance
    component).
    """
    c_bias = float(c_bias)
    if c_bias < 1.0:
        raise ConfigError(f"c_bias must be >= 1, got {c_bias}")
    if envelope.psi_bar.size != proxy.aggregated.size:
        raise InputError("envelope and proxy cover different grids")
    obj = envelope.psi_bar + c_bias * proxy.aggregated
    idx = obj.size - 1 - int(np.argmin(obj[::-1]))
    return Selection(
        method="minupper",
        index=idx,
        gamma=float(family.grid.values[idx]),
        estimate=family.aggregated[idx].copy(),
        objective=obj,
        c_bias=c_bias,
    )


def lepski_select(family: ClippedFamily, envelope: VarianceEnvelope) -> Selection:
    """Largest grid index whose estimate is within 3 Psi_bar(gamma_s) of the
    estimate at every smaller index s.

    Index 0 is always admissible (the condition is vacuous there), so the
    selection is well defined. When the next index above the choice exists,
    the witnessing violation (j, s, distance, bound) is recorded.
    """
    G = family.grid.size
    admissible = np.zeros(G, dtype=bool)
    witnesses = {}
    for j in range(G):
        ok = True
        for s in range(j):
            dist = op_norm(family.aggregated[j] - family.aggregated[s])
            bound = 3.0 * envelope.psi_bar[s]
            if dist > bound:
                ok = False
                if j not in witnesses:
                    witnesses[j] = (j, s, float(dist), float(bound))
                break
        admissible[j] = ok
    j_hat = int(np.max(np.nonzero(admissible)[0]))
    witness = witnesses.get(j_hat + 1)
    return Selection(
        method="lepski",
        index=j_hat,
        gamma=float(family.grid.values[j_hat]),
        estimate=family.aggregated[j_hat].copy(),
        admissible=admissible,
        violation_witness=witness,
    )


@dataclass(frozen=True)
class PipelineResult:
    """Everything the pipeline computed: the selection plus diagnostics."""

    selection: Selection
    radii: PilotRadii
    family: ClippedFamily
    envelope: VarianceEnvelope
    proxy: BiasProxy | None
    plan: FoldPlan
    grid: GammaGrid
    budget: ConfidenceBudget


@contextmanager
def _stage(name: str):
    # Surfaces which pipeline stage failed without changing the error type.
    try:
        yield
    except ClipcovError as err:
        err.args = (f"{name}: {err.args[0]}",) + err.args[1:]
        raise


SELECTORS = ("minupper", "lepski")


def run_pipeline(
    raw,
    K: int = 2,
    delta: float = 0.1,
    rho: float = 2.0,
    c_bias: float = 1.0,
    seed: int = 0,
    selector: str = "minupper",
    center: bool = False,
) -> PipelineResult:
    """Full estimation pipeline.

    Stages, in order: optional paired-difference centering; seeded fold
    plan; geometric level grid from the smallest training split; confidence
    budget; per-fold pilot radii, clipped covariances, variance envelopes,
    and (for MinUpper) the tail-energy proxy; suffix-max monotonization;
    selection. Deterministic for fixed inputs.
    """
    if selector not in SELECTORS:
        raise ConfigError(f"unknown selector {selector!r}; expected one of {SELECTORS}")
    data = as_dataset(raw)
    if center:
        with _stage("centering"):
            data = center_paired(data, seed)
    with _stage("fold plan"):
        plan = make_folds(data.n, K, seed)
    with _stage("grid"):
        grid = build_grid(plan.min_train, rho)
    with _stage("confidence budget"):
        budget = alloc_confidence(delta, K, grid.size)
    with _stage("clipping"):
        radii, family = build_family(data, plan, grid)
    with _stage("certification"):
        envelope = certify_family(family, radii, budget)

    proxy = None
    if selector == "minupper":
        with _stage("bias proxy"):
            proxy = bias_proxy(data, plan, radii, budget)
        with _stage("selection"):
            selection = min_upper(family, envelope, proxy, c_bias)
    else:
        if int(plan.fold_sizes.min()) >= budget.B:
            with _stage("bias proxy"):
                proxy = bias_proxy(data, plan, radii, budget)
        with _stage("selection"):
            selection = lepski_select(family, envelope)
    return PipelineResult(
        selection=selection,
        radii=radii,
        family=family,
        envelope=envelope,
        proxy=proxy,
        plan=plan,
        grid=grid,
        budget=budget,
    )
