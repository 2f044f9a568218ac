"""Bayesian engine: prior-to-posterior updating for the normal mean.

Two routes share one contract. The conjugate route handles a normal prior in
closed form through precision weighting. The grid route multiplies any grid
prior by the likelihood in log space (with max-subtraction, so a sharp
likelihood cannot underflow the whole update) and renormalizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .density import DEFAULT_GRID_POINTS, Density1D
from .exceptions import DegenerateUpdate, InputError
from .fiducial import DataSummary
from .validation import require_finite, require_int_at_least, require_positive

__all__ = [
    "NormalPrior",
    "LikelihoodKernel",
    "normal_mean_likelihood",
    "conjugate_normal_update",
    "grid_bayes_update",
    "uniform_grid_prior",
]

# exp underflows to zero below this natural-log threshold in double precision.
_LOG_UNDERFLOW = -745.0


@dataclass(frozen=True)
class NormalPrior:
    """Conjugate prior for the normal mean."""

    mean: float
    variance: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", require_finite(self.mean, "prior mean"))
        object.__setattr__(self, "variance", require_positive(self.variance, "prior variance"))

    @property
    def density(self) -> Density1D:
        return Density1D.normal(self.mean, self.variance)


@dataclass(frozen=True)
class LikelihoodKernel:
    """Vectorized log-likelihood of the parameter given a data summary.

    ``log_likelihood(theta, data)`` takes an ndarray of parameter values and
    returns an ndarray of the same shape; constants may be dropped.
    """

    log_likelihood: Callable[[np.ndarray, DataSummary], np.ndarray]

    def __post_init__(self) -> None:
        if not callable(self.log_likelihood):
            raise InputError("log_likelihood must be callable")


def normal_mean_likelihood() -> LikelihoodKernel:
    """Likelihood of the mean from the sufficient statistic."""

    def loglik(theta: np.ndarray, data: DataSummary) -> np.ndarray:
        diff = data.sample_mean - np.asarray(theta, dtype=float)
        return -0.5 * data.n * diff * diff / data.sigma2

    return LikelihoodKernel(log_likelihood=loglik)


def conjugate_normal_update(prior: NormalPrior, data: DataSummary) -> Density1D:
    """Precision-weighted closed-form posterior for the normal mean."""
    if not isinstance(prior, NormalPrior):
        raise InputError("prior must be a NormalPrior")
    if not isinstance(data, DataSummary):
        raise InputError("data must be a DataSummary")
    data_precision = data.n / data.sigma2
    posterior_precision = 1.0 / prior.variance + data_precision
    posterior_mean = (
        prior.mean / prior.variance + data.sample_mean * data_precision
    ) / posterior_precision
    return Density1D.normal(posterior_mean, 1.0 / posterior_precision)


def grid_bayes_update(
    prior: Density1D, likelihood: LikelihoodKernel, data: DataSummary
) -> Density1D:
    """Pointwise posterior on the prior's grid, computed in log space.

    Raises DegenerateUpdate when every unnormalized log-weight is already
    below the double-precision exp underflow point, which happens when the
    prior's support and the likelihood's mass are essentially disjoint.
    """
    if not isinstance(prior, Density1D) or prior.form != "grid":
        raise InputError("grid_bayes_update needs a grid-form prior")
    if not isinstance(likelihood, LikelihoodKernel):
        raise InputError("likelihood must be a LikelihoodKernel")
    if not isinstance(data, DataSummary):
        raise InputError("data must be a DataSummary")
    nodes = prior.nodes
    with np.errstate(divide="ignore"):
        log_prior = np.where(prior.weights > 0.0, np.log(prior.weights), -np.inf)
    loglik = np.asarray(likelihood.log_likelihood(nodes, data), dtype=float)
    if loglik.shape != nodes.shape:
        raise InputError(
            f"log_likelihood returned shape {loglik.shape}, expected {nodes.shape}"
        )
    if np.any(np.isnan(loglik)):
        raise InputError("log_likelihood returned NaN")
    logw = log_prior + loglik
    top = float(np.max(logw))
    if not top > _LOG_UNDERFLOW:
        raise DegenerateUpdate(
            "all posterior weights underflow to zero; prior support and "
            "likelihood do not overlap numerically"
        )
    weights = np.exp(logw - top)
    return Density1D.grid(float(prior.lo), float(prior.hi), weights)


def uniform_grid_prior(
    lo: float, hi: float, n_points: int = DEFAULT_GRID_POINTS
) -> Density1D:
    """Flat prior on [lo, hi], the no-information reference for the grid route."""
    lo = require_finite(lo, "lo")
    hi = require_finite(hi, "hi")
    if not lo < hi:
        raise InputError(f"uniform prior needs lo < hi, got [{lo!r}, {hi!r}]")
    n = require_int_at_least(n_points, "n_points", 2)
    return Density1D.grid(lo, hi, np.ones(n))
