"""Bayesian updating: conjugate algebra and the log-space grid route."""

import numpy as np
import pytest
from scipy import stats

from ioi.bayes import (
    LikelihoodKernel,
    NormalPrior,
    conjugate_normal_update,
    grid_bayes_update,
    normal_mean_likelihood,
    uniform_grid_prior,
)
from ioi.density import Density1D
from ioi.exceptions import DegenerateUpdate, InputError
from ioi.fiducial import DataSummary, fiducial_density, normal_mean_pivot


def test_conjugate_update_hand_checked_case():
    # Prior N(0, 100), data mean 10 with n = 2 and sigma2 = 4:
    # posterior precision 0.01 + 0.5, posterior mean 5 / 0.51.
    post = conjugate_normal_update(NormalPrior(0.0, 100.0), DataSummary(10.0, 2, 4.0))
    assert abs(post.variance - 1.0 / 0.51) < 1e-12
    assert abs(post.mean - 5.0 / 0.51) < 1e-12


def test_conjugate_update_precision_additivity():
    rng = np.random.default_rng(4)
    for _ in range(25):
        prior = NormalPrior(float(rng.uniform(-5, 5)), float(rng.uniform(0.1, 50)))
        data = DataSummary(
            float(rng.uniform(-5, 5)),
            int(rng.integers(1, 100)),
            float(rng.uniform(0.1, 10)),
        )
        post = conjugate_normal_update(prior, data)
        assert post.variance < prior.variance
        assert post.variance < data.sigma2 / data.n + 1e-15
        lo = min(prior.mean, data.sample_mean) - 1e-12
        hi = max(prior.mean, data.sample_mean) + 1e-12
        assert lo <= post.mean <= hi


def test_conjugate_update_tight_prior_dominates():
    post = conjugate_normal_update(NormalPrior(1.0, 1e-8), DataSummary(50.0, 10, 1.0))
    assert abs(post.mean - 1.0) < 1e-4


def test_grid_update_matches_conjugate_solution():
    prior_density = Density1D.normal(1.0, 4.0).to_grid(4096)
    data = DataSummary(2.5, 9, 1.0)
    grid_post = grid_bayes_update(prior_density, normal_mean_likelihood(), data)
    exact = conjugate_normal_update(NormalPrior(1.0, 4.0), data)
    ts = np.linspace(exact.mean - 4 * exact.sd, exact.mean + 4 * exact.sd, 501)
    got = np.asarray(grid_post.cdf(ts)) / grid_post.mass()
    assert np.max(np.abs(got - exact.cdf(ts))) < 1e-4


def test_flat_prior_reproduces_fiducial_density():
    data = DataSummary(1.3, 9, 2.0)
    prior = uniform_grid_prior(-5.0, 7.0)
    post = grid_bayes_update(prior, normal_mean_likelihood(), data)
    fid = fiducial_density(normal_mean_pivot(), data)
    ts = np.linspace(-1.0, 3.6, 801)
    got = np.asarray(post.cdf(ts)) / post.mass()
    assert np.max(np.abs(got - fid.cdf(ts))) < 1e-4


def test_grid_update_runs_in_log_space_without_underflow():
    # A likelihood peaked 30 standard errors outside the prior mode would
    # underflow a naive exp-then-normalize implementation on most of the
    # grid; the max-subtraction route keeps the posterior usable.
    prior = uniform_grid_prior(-40.0, 40.0, 4096)
    data = DataSummary(30.0, 100, 1.0)
    post = grid_bayes_update(prior, normal_mean_likelihood(), data)
    ref = stats.norm.cdf(np.linspace(29.5, 30.5, 201), loc=30.0, scale=0.1)
    got = np.asarray(post.cdf(np.linspace(29.5, 30.5, 201))) / post.mass()
    assert np.max(np.abs(got - ref)) < 1e-3


def test_disjoint_prior_and_likelihood_degenerate():
    prior = uniform_grid_prior(-1.0, 1.0, 512)
    data = DataSummary(60.0, 400, 1.0)
    with pytest.raises(DegenerateUpdate):
        grid_bayes_update(prior, normal_mean_likelihood(), data)


def test_grid_update_requires_grid_prior():
    with pytest.raises(InputError):
        grid_bayes_update(
            Density1D.normal(0.0, 1.0), normal_mean_likelihood(), DataSummary(0.0, 1, 1.0)
        )


def test_likelihood_shape_mismatch_is_an_error():
    bad = LikelihoodKernel(log_likelihood=lambda theta, data: np.zeros(3))
    prior = uniform_grid_prior(-1.0, 1.0, 64)
    with pytest.raises(InputError):
        grid_bayes_update(bad, normal_mean_likelihood(), DataSummary(0.0, 1, 1.0))
    with pytest.raises(InputError):
        grid_bayes_update(prior, bad, DataSummary(0.0, 1, 1.0))


def test_likelihood_nan_is_an_error():
    bad = LikelihoodKernel(
        log_likelihood=lambda theta, data: np.full_like(theta, np.nan)
    )
    prior = uniform_grid_prior(-1.0, 1.0, 64)
    with pytest.raises(InputError):
        grid_bayes_update(prior, bad, DataSummary(0.0, 1, 1.0))


def test_normal_prior_validation():
    with pytest.raises(InputError):
        NormalPrior(0.0, 0.0)
    with pytest.raises(InputError):
        NormalPrior(np.inf, 1.0)


def test_prior_density_property_round_trips():
    prior = NormalPrior(2.0, 3.0)
    d = prior.density
    assert d.form == "normal" and d.mean == 2.0 and d.variance == 3.0
