"""Synthetic benchmark data.

Randomly rotated spiked covariance models, clean samplers with covariance
exactly Sigma (Gaussian, elliptical Student-t, signed log-normal, Laplace,
and signed-F coordinates), and Huber-style row-replacement contamination.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, InputError
from .model import Dataset, as_dataset, floor_guarded
from .rng import STREAM_CLEAN, STREAM_CONTAM, STREAM_ROTATION, derived_rng
from .symmat import symmetrize

DISTRIBUTIONS = ("gaussian", "t", "signed_lognormal", "laplace", "signed_F")


@dataclass(frozen=True)
class SpikedModel:
    """Identity-plus-spikes covariance with a Haar-random rotation.

    Eigenvalues are sigma2 + theta with multiplicity r and sigma2 with
    multiplicity d - r.
    """

    d: int
    r: int
    theta: float
    sigma2: float
    rotation: np.ndarray
    sigma: np.ndarray
    sigma_sqrt: np.ndarray


def make_spiked_sigma(d: int, r: int, theta: float, seed: int, sigma2: float = 1.0) -> SpikedModel:
    """Spiked covariance Sigma = U diag(sigma2 + theta x r, sigma2 x (d-r)) U^T.

    The rotation U is the Q factor of a Gaussian matrix with column signs
    fixed by the R diagonal, which makes it orthogonally invariant.
    """
    d, r = int(d), int(r)
    if d < 1:
        raise ConfigError(f"dimension must be positive, got {d}")
    if not 0 <= r <= d:
        raise ConfigError(f"spike count r={r} must satisfy 0 <= r <= d={d}")
    if theta <= 0:
        raise ConfigError(f"spike strength theta must be positive, got {theta}")
    if sigma2 <= 0:
        raise ConfigError(f"noise floor sigma2 must be positive, got {sigma2}")
    g = derived_rng(seed, STREAM_ROTATION).standard_normal((d, d))
    q, rr = np.linalg.qr(g)
    signs = np.where(np.diag(rr) >= 0, 1.0, -1.0)
    q = q * signs
    eigs = np.concatenate([np.full(r, sigma2 + theta), np.full(d - r, sigma2)])
    if r == 0:
        sigma = sigma2 * np.eye(d)
        sigma_sqrt = math.sqrt(sigma2) * np.eye(d)
    else:
        sigma = symmetrize((q * eigs) @ q.T)
        sigma_sqrt = symmetrize((q * np.sqrt(eigs)) @ q.T)
    return SpikedModel(
        d=d, r=r, theta=float(theta), sigma2=float(sigma2),
        rotation=q, sigma=sigma, sigma_sqrt=sigma_sqrt,
    )


def _f_second_moment(df_num: int, df_den: int) -> float:
    # E F^2 = Var + mean^2; finite variance needs df_den > 4.
    if df_den <= 4:
        raise ConfigError(f"signed_F needs df_den > 4 for finite variance, got {df_den}")
    if df_num < 1:
        raise ConfigError(f"signed_F needs df_num >= 1, got {df_num}")
    mean = df_den / (df_den - 2.0)
    var = (
        2.0 * df_den**2 * (df_num + df_den - 2.0)
        / (df_num * (df_den - 2.0) ** 2 * (df_den - 4.0))
    )
    return var + mean**2


def sample_clean(
    model: SpikedModel,
    dist: str,
    n: int,
    seed: int,
    *,
    df: float | None = None,
    sigma: float = 0.5,
    df_num: int = 6,
    df_den: int = 6,
) -> Dataset:
    """Draw n i.i.d. mean-zero rows with covariance exactly model.sigma.

    Coordinate families (gaussian, signed_lognormal, laplace, signed_F) draw
    i.i.d. unit-variance coordinates Y and emit Sigma^(1/2) Y. The
    elliptical t uses X = Sigma^(1/2) g sqrt(df / chi2) sqrt((df-2)/df), so
    the rescale makes Cov(X) = Sigma exactly. Unit-variance scalings:
    signed log-normal Y = s exp(sigma Z - sigma^2) has E Y^2 = 1 for any
    sigma; Laplace scale is 1/sqrt(2); signed F divides by sqrt(E F^2)
    (equal to sqrt(6) at the 6/6 default).
    """
    n = int(n)
    if n < 1:
        raise ConfigError(f"need n >= 1 samples, got {n}")
    if dist not in DISTRIBUTIONS:
        raise ConfigError(f"unknown distribution {dist!r}; expected one of {DISTRIBUTIONS}")
    rng = derived_rng(seed, STREAM_CLEAN)
    d = model.d
    if dist == "gaussian":
        y = rng.standard_normal((n, d))
    elif dist == "t":
        if df is None:
            raise ConfigError("distribution 't' requires df")
        nu = float(df)
        if nu <= 2:
            raise ConfigError(f"t requires df > 2 for a finite covariance, got {nu}")
        g = rng.standard_normal((n, d))
        chi = rng.chisquare(nu, size=n)
        y = g * np.sqrt(nu / chi)[:, None] * math.sqrt((nu - 2.0) / nu)
    elif dist == "signed_lognormal":
        z = rng.standard_normal((n, d))
        s = rng.integers(0, 2, size=(n, d)) * 2.0 - 1.0
        y = s * np.exp(sigma * z - sigma * sigma)
    elif dist == "laplace":
        y = rng.laplace(0.0, 1.0 / math.sqrt(2.0), size=(n, d))
    else:  # signed_F
        scale = 1.0 / math.sqrt(_f_second_moment(int(df_num), int(df_den)))
        f = rng.f(int(df_num), int(df_den), size=(n, d))
        s = rng.integers(0, 2, size=(n, d)) * 2.0 - 1.0
        y = s * f * scale
    return Dataset(y @ model.sigma_sqrt)


def contaminate(clean, model: SpikedModel, epsilon: float, kappa: float, seed: int) -> Dataset:
    """Replace floor(epsilon * n) uniformly chosen rows by N(0, kappa Sigma) draws."""
    epsilon = float(epsilon)
    if not 0.0 <= epsilon < 0.5:
        raise ConfigError(f"contamination fraction must lie in [0, 0.5), got {epsilon}")
    if kappa <= 0:
        raise ConfigError(f"outlier scale kappa must be positive, got {kappa}")
    data = as_dataset(clean)
    rows = data.rows.copy()
    m = floor_guarded(epsilon * data.n)
    if m == 0:
        return Dataset(rows)
    rng = derived_rng(seed, STREAM_CONTAM)
    idx = rng.choice(data.n, size=m, replace=False)
    g = rng.standard_normal((m, data.d))
    rows[idx] = math.sqrt(kappa) * (g @ model.sigma_sqrt)
    return Dataset(rows)


_REQUIRED_KEYS = ("distribution", "n", "d", "r", "theta", "epsilon", "kappa", "replications", "seed")


@dataclass(frozen=True)
class ScenarioConfig:
    """One synthetic benchmark scenario.

    Distribution parameters beyond the tag (df, sigma, df_num, df_den) apply
    only to the matching tags and default to the standard settings.
    """

    distribution: str
    n: int
    d: int
    r: int
    theta: float
    epsilon: float
    kappa: float
    replications: int
    seed: int
    df: float = 4.5
    sigma: float = 0.5
    df_num: int = 6
    df_den: int = 6

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(
                f"unknown distribution {self.distribution!r}; expected one of {DISTRIBUTIONS}"
            )
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if not 0 <= self.r <= self.d:
            raise ConfigError(f"spike rank must satisfy 0 <= r <= d, got r={self.r}, d={self.d}")
        if self.theta <= 0:
            raise ConfigError(f"spike strength theta must be positive, got {self.theta}")
        if not 0.0 <= self.epsilon < 0.5:
            raise ConfigError(f"epsilon must lie in [0, 0.5), got {self.epsilon}")
        if self.kappa <= 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")
        if self.distribution == "t" and self.df <= 2:
            raise ConfigError(f"t requires df > 2, got {self.df}")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, obj: dict) -> "ScenarioConfig":
        if not isinstance(obj, dict):
            raise InputError("scenario must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise InputError(f"unknown scenario keys: {', '.join(unknown)}")
        missing = sorted(k for k in _REQUIRED_KEYS if k not in obj)
        if missing:
            raise InputError(f"missing scenario keys: {', '.join(missing)}")
        return cls(**obj)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as err:
            raise InputError(f"{path}: invalid JSON ({err})") from err
        return cls.from_dict(obj)
