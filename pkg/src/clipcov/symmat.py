"""Dense symmetric-matrix kernel: eigendecomposition, operator norm, PSD
square root, and top-r spectral projectors.

All functions are pure and operate on exactly symmetric float64 arrays.
``numpy.linalg.eigh`` does the factor work; this module pins down the
conventions the rest of the package relies on: descending eigenvalue order,
exact symmetry of constructed matrices, and the tolerance policy for PSD
clamping and subspace gaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, InputError

# Eigenvalues in [-PSD_CLAMP_RTOL * op_norm, 0) are treated as rounding noise.
PSD_CLAMP_RTOL = 1e-10

# Eigenvalue gap below which a top-r subspace is reported as ill-defined.
GAP_TOL = 1e-12

# Asymmetry beyond this relative tolerance is a caller bug, not rounding.
_SYM_RTOL = 1e-8


def symmetrize(a) -> np.ndarray:
    """Exactly symmetric part (a + a.T) / 2 as float64.

    A bitwise no-op on already-symmetric input.
    """
    a = np.asarray(a, dtype=np.float64)
    return 0.5 * (a + a.T)


def check_symmetric(a, name: str = "matrix") -> np.ndarray:
    """Validate a square symmetric finite matrix and return it symmetrized."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} contains non-finite entries")
    scale = float(np.abs(a).max()) if a.size else 0.0
    if float(np.abs(a - a.T).max()) > _SYM_RTOL * max(1.0, scale):
        raise InputError(f"{name} is not symmetric")
    return symmetrize(a)


@dataclass(frozen=True)
class EigenDecomp:
    """Eigenvalues sorted descending with aligned orthonormal column vectors."""

    values: np.ndarray
    vectors: np.ndarray


def eig_sym(a) -> EigenDecomp:
    """Eigendecompose a symmetric matrix.

    Parameters
    ----------
    a : (d, d) array_like
        Symmetric real matrix with finite entries.

    Returns
    -------
    EigenDecomp
        ``values`` descending; ``vectors[:, i]`` is the unit eigenvector
        paired with ``values[i]``. Deterministic for identical input.
    """
    a = check_symmetric(a)
    vals, vecs = np.linalg.eigh(a)
    return EigenDecomp(values=vals[::-1].copy(), vectors=vecs[:, ::-1].copy())


def op_norm(a) -> float:
    """Operator norm of a symmetric matrix: the largest absolute eigenvalue."""
    a = check_symmetric(a)
    return float(np.max(np.abs(np.linalg.eigvalsh(a))))


def sqrt_psd(a) -> np.ndarray:
    """PSD square root via eigendecomposition.

    Eigenvalues in [-PSD_CLAMP_RTOL * op_norm, 0) are clamped to zero;
    anything more negative raises DomainError.
    """
    dec = eig_sym(a)
    scale = float(np.max(np.abs(dec.values))) if dec.values.size else 0.0
    lo = float(np.min(dec.values))
    if lo < -PSD_CLAMP_RTOL * scale:
        raise DomainError(
            f"matrix has materially negative eigenvalue {lo:.6g}; not PSD"
        )
    vals = np.maximum(dec.values, 0.0)
    root = (dec.vectors * np.sqrt(vals)) @ dec.vectors.T
    return symmetrize(root)


@dataclass(frozen=True)
class Projector:
    """Top-r spectral projector with gap metadata.

    ``gap`` is lambda_r - lambda_{r+1} (inf when r = d); ``degenerate`` flags
    a gap below GAP_TOL, where the subspace is ill-defined up to rotation.
    """

    matrix: np.ndarray
    gap: float
    degenerate: bool


def top_r_projector(a, r: int) -> Projector:
    """Projector onto the span of the top-r eigenvectors of a.

    For degenerate spectra (gap at r below GAP_TOL) the projector is
    basis-dependent; the result is still returned, flagged via
    ``degenerate``.
    """
    dec = eig_sym(a)
    d = dec.values.shape[0]
    r = int(r)
    if not 1 <= r <= d:
        raise ConfigError(f"projector rank r={r} must satisfy 1 <= r <= d={d}")
    gap = float(dec.values[r - 1] - dec.values[r]) if r < d else float("inf")
    q = dec.vectors[:, :r]
    return Projector(matrix=symmetrize(q @ q.T), gap=gap, degenerate=gap < GAP_TOL)
