"""Quickstart: certified covariance estimation on contaminated data.

Draws heavy-tailed samples from a spiked covariance model, plants a
fraction of large outliers, and compares the certified clipped estimator
against the raw sample covariance.
"""

import numpy as np

from clipcov import (
    contaminate,
    cov_err,
    make_spiked_sigma,
    run_pipeline,
    sample_clean,
    scm,
)

# ground truth: 30 dimensions, a rank-2 spike of strength 6 on top of identity
model = make_spiked_sigma(d=30, r=2, theta=6.0, seed=0)
print("true covariance: d=30, top eigenvalue", 7.0, ", bulk 1.0")

# 500 elliptical t(4.5) samples, then 10% replaced by 50x-energy outliers
clean = sample_clean(model, "t", 500, seed=1, df=4.5)
dirty = contaminate(clean, model, epsilon=0.10, kappa=50.0, seed=2)
print(f"data: n={dirty.n} rows, 10% outliers at 50x covariance energy\n")

result = run_pipeline(dirty, K=2, delta=0.1, seed=3, selector="minupper")
sel = result.selection
print(f"selected clipping level gamma = {sel.gamma:g} "
      f"(grid index {sel.index} of {result.grid.size})")
print(f"certified variance envelope at the choice: {result.envelope.psi_bar[sel.index]:.3f}")
print(f"bias proxy at the choice:                  {result.proxy.aggregated[sel.index]:.3f}\n")

sample_cov = scm(dirty)
print(f"relative operator error, clipped estimate: {cov_err(sel.estimate, model.sigma):.3f}")
print(f"relative operator error, sample covariance: {cov_err(sample_cov, model.sigma):.3f}")
print("\nthe outliers inflate the sample covariance; clipping at the")
print("selected radius keeps the estimate near the truth, and the")
print("envelope certifies the per-level variance deviation.")
