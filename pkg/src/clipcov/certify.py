"""Empirical-Bernstein certification of the clipped covariance family.

Clipped rows are normalized into products A_i with 0 <= A_i <= I; disjoint
pairs give the variance proxy V* = (1/n_k) sum (A_odd - A_even)^2, whose
operator norm never exceeds 1/2; the closed-form deviation radius D turns
the proxy into per-fold envelopes Psi_k = r^2 D, aggregated and then
monotonized by a suffix maximum along the ascending grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clipping import ClippedFamily, PilotRadii, clip_rows
from .errors import ConfigError, InputError
from .model import ConfidenceBudget
from .symmat import op_norm, symmetrize


def normalized_products(clipped_rows, r: float) -> list:
    """Normalized outer products A_i = z_i z_i^T / r^2 of already-clipped rows.

    Each A_i satisfies 0 <= A_i <= I (operator norm at most 1).
    """
    if r <= 0:
        raise ConfigError(f"radius must be positive, got {r}")
    rows = np.asarray(clipped_rows, dtype=np.float64)
    if rows.ndim != 2:
        raise InputError("clipped rows must form a 2-D array")
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms > r * (1.0 + 1e-12)):
        raise InputError("rows exceed radius r; clip before normalizing")
    return [np.outer(z, z) / (r * r) for z in rows]


def paired_variance_proxy(a_list) -> np.ndarray:
    """Paired variance proxy V* = (1/n_k) sum_j (A_{2j-1} - A_{2j})^2.

    Pairs are consecutive entries of a_list, which callers must supply in
    the fold's deterministic order. The result is symmetric PSD with
    operator norm at most 1/2.
    """
    n_k = len(a_list)
    if n_k < 2 or n_k % 2:
        raise InputError(f"need an even number >= 2 of matrices, got {n_k}")
    total = np.zeros_like(np.asarray(a_list[0], dtype=np.float64))
    for j in range(0, n_k, 2):
        diff = np.asarray(a_list[j], dtype=np.float64) - np.asarray(a_list[j + 1], dtype=np.float64)
        total += diff @ diff
    return symmetrize(total / n_k)


def _paired_proxy_from_rows(clipped: np.ndarray, r: float) -> np.ndarray:
    """Gram-trick evaluation of paired_variance_proxy(normalized_products(...)).

    For a pair (p, q) the difference square expands to
    ||p||^2 pp^T + ||q||^2 qq^T - (p.q)(pq^T + qp^T), all over r^4, so the
    full sum reduces to weighted Gram products of the stacked odd/even rows
    instead of n_k dense matrix squarings. Fixed-order einsums keep the
    result independent of BLAS threading.
    """
    n_k = clipped.shape[0]
    p = clipped[0::2]
    q = clipped[1::2]
    wp = np.einsum("ij,ij->i", p, p, optimize=False)
    wq = np.einsum("ij,ij->i", q, q, optimize=False)
    wpq = np.einsum("ij,ij->i", p, q, optimize=False)
    t_p = np.einsum("ji,j,jk->ik", p, wp, p, optimize=False)
    t_q = np.einsum("ji,j,jk->ik", q, wq, q, optimize=False)
    t_x = np.einsum("ji,j,jk->ik", p, wpq, q, optimize=False)
    return symmetrize(t_p + t_q - t_x - t_x.T) / (n_k * r**4)


def bernstein_radius(n: int, d: int, alpha: float, v: float) -> float:
    """Closed-form empirical-Bernstein deviation radius.

    D = L/(3n) + sqrt(2 v L / n) + (sqrt(5/3) + 1) sqrt(L L') / n
    with L = log(n d / ((n - 1) alpha)) and L' = log(2 n d / alpha).
    Strictly increasing in v for fixed (n, d, alpha).
    """
    n, d = int(n), int(d)
    if n < 2:
        raise ConfigError(f"need n >= 2 summands, got {n}")
    if d < 1:
        raise ConfigError(f"dimension must be positive, got {d}")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    if v < 0:
        raise ConfigError(f"variance-proxy norm must be >= 0, got {v}")
    big_l = math.log(n * d / ((n - 1.0) * alpha))
    big_lp = math.log(2.0 * n * d / alpha)
    return (
        big_l / (3.0 * n)
        + math.sqrt(2.0 * v * big_l / n)
        + (math.sqrt(5.0 / 3.0) + 1.0) * math.sqrt(big_l * big_lp) / n
    )


def suffix_max(values) -> np.ndarray:
    """Running maximum from the right: out[j] = max(values[j:]).

    Flattens dips so the output is nonincreasing whenever scanned in the
    input order.
    """
    v = np.asarray(values, dtype=np.float64)
    return np.maximum.accumulate(v[::-1])[::-1].copy()


@dataclass(frozen=True)
class VarianceEnvelope:
    """Per-cell certificates and their grid aggregation.

    proxy_norms[k, j] = ||V*_k(gamma_j)||; dev_radius holds the D values;
    fold_psi[k, j] = r_k^2 D; psi[j] aggregates with weights n_k / n;
    psi_bar is the suffix max of psi along the ascending grid. The proxy
    matrices themselves are retained for diagnostics.
    """

    proxy_norms: np.ndarray
    dev_radius: np.ndarray
    fold_psi: np.ndarray
    psi: np.ndarray
    psi_bar: np.ndarray
    alpha: float
    proxies: np.ndarray


def certify_family(
    family: ClippedFamily, radii: PilotRadii, budget: ConfidenceBudget
) -> VarianceEnvelope:
    """Variance envelopes for every (fold, gamma) cell of a clipped family.

    Pairing for the proxy uses consecutive rows of each fold in fold-plan
    order (family.fold_rows). Every cell receives the same per-cell
    allocation budget.alpha.
    """
    K, G = radii.table.shape
    if len(family.fold_rows) != K or family.grid.size != G:
        raise InputError("family and radii disagree on fold count or grid size")
    d = family.fold_rows[0].shape[1]

    proxy_norms = np.zeros((K, G))
    dev_radius = np.zeros((K, G))
    fold_psi = np.zeros((K, G))
    proxies = np.zeros((K, G, d, d))
    for k in range(K):
        rows = family.fold_rows[k]
        n_k = rows.shape[0]
        for j in range(G):
            r = float(radii.table[k, j])
            clipped = clip_rows(rows, r)
            vstar = _paired_proxy_from_rows(clipped, r)
            v = op_norm(vstar)
            dd = bernstein_radius(n_k, d, budget.alpha, v)
            proxies[k, j] = vstar
            proxy_norms[k, j] = v
            dev_radius[k, j] = dd
            fold_psi[k, j] = r * r * dd

    psi = np.einsum("k,kj->j", family.weights, fold_psi, optimize=False)
    return VarianceEnvelope(
        proxy_norms=proxy_norms,
        dev_radius=dev_radius,
        fold_psi=fold_psi,
        psi=psi,
        psi_bar=suffix_max(psi),
        alpha=budget.alpha,
        proxies=proxies,
    )
