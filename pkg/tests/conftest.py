"""Shared fixtures and fit builders for the test suite."""

import numpy as np
import pytest

from bfreg import Dataset, RegressionFit, fit_ols


def make_two_effect_fit() -> RegressionFit:
    """Orthogonal-design fit with two standardized effects.

    The sufficient statistics are set directly so downstream analytic
    quantities are reproducible to machine precision: n = 20 rows, an
    intercept of 1, slopes 0.7 and 0.03, raw residual sum of squares 19,
    and X'X = diag(20, 19, 19) as produced by two centered columns with
    sample variance 1 that are exactly decorrelated.
    """
    return RegressionFit(
        coef_names=("(Intercept)", "x1", "x2"),
        beta_hat=np.array([1.0, 0.7, 0.03]),
        s2=19.0,
        xtx_inv=np.diag([1 / 20, 1 / 19, 1 / 19]),
        n=20,
        k=3,
    )


def make_two_effect_dataset(design_seed: int = 7, noise_seed=None) -> Dataset:
    """Raw data whose OLS fit matches make_two_effect_fit.

    Two predictor columns are centered and orthonormalized by QR, then
    scaled so each has sample variance 1 and X'X = diag(20, 19, 19).
    With the default deterministic error (the third orthonormal
    direction scaled to norm sqrt(19)) the fit reproduces beta_hat =
    (1, 0.7, 0.03) and s2 = 19 exactly.  Passing ``noise_seed`` swaps in
    fresh standard normal errors while keeping the design fixed, which
    is the regeneration variant used by the shape checks.
    """
    rng = np.random.default_rng(design_seed)
    z = rng.standard_normal((20, 3))
    z -= z.mean(axis=0)
    q, _ = np.linalg.qr(z)
    x = q[:, :2] * np.sqrt(19.0)
    if noise_seed is None:
        err = q[:, 2] * np.sqrt(19.0)
    else:
        err = np.random.default_rng(noise_seed).standard_normal(20)
    y = 1.0 + 0.7 * x[:, 0] + 0.03 * x[:, 1] + err
    return Dataset(
        column_names=("y", "x1", "x2"), columns=np.column_stack([y, x])
    )


def make_random_fit(seed, n: int = 50, k: int = 3, beta=None, sigma=1.0):
    """OLS fit on simulated data with k - 1 standard normal predictors."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, k - 1))
    if beta is None:
        beta = rng.normal(0.0, 0.8, size=k)
    beta = np.asarray(beta, dtype=float)
    y = beta[0] + x @ beta[1:] + sigma * rng.standard_normal(n)
    names = ("y",) + tuple(f"x{j}" for j in range(1, k))
    data = Dataset(column_names=names, columns=np.column_stack([y, x]))
    return fit_ols(data, "y ~ " + " + ".join(names[1:]))


@pytest.fixture
def two_effect_fit():
    return make_two_effect_fit()


@pytest.fixture
def two_effect_data():
    return make_two_effect_dataset()
