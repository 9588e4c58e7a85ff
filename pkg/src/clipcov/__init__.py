"""Certified robust covariance estimation via cross-fitted norm clipping.

The pipeline splits centered data into folds, clips each held-out fold at
radii learned from the other folds across a geometric grid of clipping
levels, certifies every candidate with a matrix empirical-Bernstein
deviation envelope, and picks the level either by minimizing a certified
upper bound (variance envelope plus a median-of-means bias proxy) or by
Lepski-style pairwise comparisons. The same machinery powers a synthetic
benchmark harness and a Monte Carlo validator for the certificates.
"""

from .bench import (
    ESTIMATORS,
    BenchReport,
    ClipMeanOracle,
    CoverageResult,
    MetricRow,
    cov_err,
    eig_err,
    mom_entry_cov,
    run_benchmark,
    scm,
    subspace_err,
    validate_coverage,
)
from .certify import (
    VarianceEnvelope,
    bernstein_radius,
    certify_family,
    normalized_products,
    paired_variance_proxy,
    suffix_max,
)
from .clipping import (
    ClippedFamily,
    PilotRadii,
    build_family,
    center_paired,
    clip_rows,
    clip_vector,
    fold_covariance,
    pilot_radius,
)
from .errors import ClipcovError, ConfigError, DomainError, InputError
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
from .select import (
    SELECTORS,
    BiasProxy,
    PipelineResult,
    Selection,
    bias_proxy,
    lepski_select,
    min_upper,
    mom_mean,
    run_pipeline,
)
from .symmat import EigenDecomp, Projector, eig_sym, op_norm, sqrt_psd, symmetrize, top_r_projector
from .synth import (
    DISTRIBUTIONS,
    ScenarioConfig,
    SpikedModel,
    contaminate,
    make_spiked_sigma,
    sample_clean,
)

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "BiasProxy",
    "ClipMeanOracle",
    "ClippedFamily",
    "ClipcovError",
    "ConfidenceBudget",
    "ConfigError",
    "CoverageResult",
    "Dataset",
    "DISTRIBUTIONS",
    "DomainError",
    "EigenDecomp",
    "ESTIMATORS",
    "FoldPlan",
    "GammaGrid",
    "InputError",
    "MetricRow",
    "PilotRadii",
    "PipelineResult",
    "Projector",
    "ScenarioConfig",
    "Selection",
    "SELECTORS",
    "SpikedModel",
    "VarianceEnvelope",
    "alloc_confidence",
    "as_dataset",
    "bernstein_radius",
    "bias_proxy",
    "build_family",
    "build_grid",
    "center_paired",
    "certify_family",
    "clip_rows",
    "clip_vector",
    "contaminate",
    "cov_err",
    "eig_err",
    "eig_sym",
    "fold_covariance",
    "lepski_select",
    "make_folds",
    "make_spiked_sigma",
    "min_upper",
    "mom_entry_cov",
    "mom_mean",
    "normalized_products",
    "op_norm",
    "paired_variance_proxy",
    "pilot_radius",
    "run_benchmark",
    "run_pipeline",
    "sample_clean",
    "scm",
    "sqrt_psd",
    "subspace_err",
    "suffix_max",
    "symmetrize",
    "top_r_projector",
    "validate_coverage",
    "__version__",
]
