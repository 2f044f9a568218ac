"""Fiducial engine: post-data densities by pivot inversion.

The route is gated: it applies only when the declared prior knowledge about
the parameter is none or very little. With substantive prior knowledge the
analogy behind the argument does not hold and :class:`AnalogyRejected` is
raised; the Bayesian engine is the right tool there.

For the normal mean with known variance the pivot
``(sample_mean - mu) / (sigma / sqrt(n))`` is standard normal before the data
are seen, and inverting it pushes that distribution forward onto the mean,
giving ``normal(sample_mean, sigma2 / n)`` in closed form. Other strictly
monotone pivots are pushed forward numerically through their quantile
transform.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .density import DEFAULT_GRID_POINTS, Density1D
from .exceptions import AnalogyRejected, InputError
from .validation import (
    as_float_vector,
    require_choice,
    require_finite,
    require_int_at_least,
    require_positive,
)

__all__ = [
    "PriorKnowledge",
    "DataSummary",
    "Pivot",
    "normal_mean_pivot",
    "fiducial_density",
    "fiducial_region_probability",
]


class PriorKnowledge(enum.Enum):
    """Declared judgment about pre-data knowledge of the parameter."""

    NONE_OR_VERY_LITTLE = "none_or_very_little"
    SUBSTANTIVE = "substantive"

    @classmethod
    def coerce(cls, value: "PriorKnowledge | str") -> "PriorKnowledge":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise InputError(
                f"prior_knowledge must be one of "
                f"{[m.value for m in cls]}, got {value!r}"
            ) from None


@dataclass(frozen=True)
class DataSummary:
    """Sufficient summary of a normal sample with known variance."""

    sample_mean: float
    n: int
    sigma2: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "sample_mean", require_finite(self.sample_mean, "sample_mean"))
        object.__setattr__(self, "n", require_int_at_least(self.n, "n", 1))
        object.__setattr__(self, "sigma2", require_positive(self.sigma2, "sigma2"))

    @property
    def standard_error(self) -> float:
        return (self.sigma2 / self.n) ** 0.5

    @classmethod
    def from_values(cls, values, sigma2: float) -> "DataSummary":
        arr = as_float_vector(values, "values")
        return cls(sample_mean=float(arr.mean()), n=int(arr.size), sigma2=sigma2)

    def as_dict(self) -> dict:
        return {"mean": self.sample_mean, "n": self.n, "sigma2": self.sigma2}

    @classmethod
    def from_dict(cls, payload: dict) -> "DataSummary":
        if not isinstance(payload, dict):
            raise InputError("data summary payload must be a dict")
        missing = {"mean", "n", "sigma2"} - set(payload)
        if missing:
            raise InputError(f"data summary missing keys: {sorted(missing)}")
        return cls(sample_mean=payload["mean"], n=payload["n"], sigma2=payload["sigma2"])


@dataclass(frozen=True)
class Pivot:
    """A data-parameter function with a known pre-data distribution.

    ``invert(value, data)`` returns the parameter consistent with the pivot
    taking ``value`` on ``data``; it must be strictly monotone in ``value``,
    in the declared ``direction``. ``closed_form``, when present, maps a
    summary straight to the push-forward density and skips the numerical
    transform.
    """

    pre_data: Density1D
    invert: Callable[[float, DataSummary], float]
    direction: Literal["increasing", "decreasing"]
    closed_form: Callable[[DataSummary], Density1D] | None = field(default=None)

    def __post_init__(self) -> None:
        require_choice(self.direction, "direction", ("increasing", "decreasing"))
        if not callable(self.invert):
            raise InputError("invert must be callable")


def normal_mean_pivot() -> Pivot:
    """The standardized-mean pivot for a normal sample, known variance."""
    return Pivot(
        pre_data=Density1D.normal(0.0, 1.0),
        invert=lambda value, data: data.sample_mean - value * data.standard_error,
        direction="decreasing",
        closed_form=lambda data: Density1D.normal(data.sample_mean, data.sigma2 / data.n),
    )


_MONOTONE_SCAN_POINTS = 100
# The scan spans the central 99.99% of the pivot's pre-data distribution.
_MONOTONE_SCAN_TAIL = 5e-5


def _scan_direction(pivot: Pivot, data: DataSummary) -> str:
    """Check strict monotonicity of the inversion map on a 100-point scan."""
    levels = np.linspace(
        _MONOTONE_SCAN_TAIL, 1.0 - _MONOTONE_SCAN_TAIL, _MONOTONE_SCAN_POINTS
    )
    values = np.asarray(pivot.pre_data.quantile(levels), dtype=float)
    params = np.array([float(pivot.invert(float(v), data)) for v in values])
    if not np.all(np.isfinite(params)):
        raise InputError("pivot inversion produced non-finite parameter values")
    diffs = np.diff(params)
    if np.all(diffs > 0.0):
        return "increasing"
    if np.all(diffs < 0.0):
        return "decreasing"
    raise InputError("pivot inversion is not strictly monotone on the scan")


def fiducial_density(
    pivot: Pivot,
    data: DataSummary,
    prior_knowledge: PriorKnowledge | str = PriorKnowledge.NONE_OR_VERY_LITTLE,
    *,
    grid_points: int = DEFAULT_GRID_POINTS,
    transform_points: int = 4097,
) -> Density1D:
    """Push the pivot's pre-data distribution forward onto the parameter.

    Raises AnalogyRejected when ``prior_knowledge`` is substantive: with real
    prior information the pre-data analogy fails and no fiducial method
    exists. Uses the pivot's closed form when available, otherwise a
    quantile-transform of the pre-data distribution onto a uniform grid.
    """
    knowledge = PriorKnowledge.coerce(prior_knowledge)
    if knowledge is not PriorKnowledge.NONE_OR_VERY_LITTLE:
        raise AnalogyRejected(
            "fiducial route refused: prior knowledge is substantive, "
            "so the pre-data analogy does not hold; use the Bayesian engine"
        )
    if pivot.closed_form is not None:
        # A closed form bypasses numeric inversion entirely; its declared
        # direction is part of that contract. The monotonicity scan guards
        # only the transform path, which depends on it.
        return pivot.closed_form(data)

    observed = _scan_direction(pivot, data)
    if observed != pivot.direction:
        raise InputError(
            f"pivot declares direction {pivot.direction!r} but the scan found {observed!r}"
        )
    grid_points = require_int_at_least(grid_points, "grid_points", 2)
    transform_points = require_int_at_least(transform_points, "transform_points", 16)
    tail = 1e-6
    levels = np.linspace(tail, 1.0 - tail, transform_points)
    pivot_values = np.asarray(pivot.pre_data.quantile(levels), dtype=float)
    params = np.array([float(pivot.invert(float(v), data)) for v in pivot_values])
    cdf_vals = 1.0 - levels if pivot.direction == "decreasing" else levels
    order = np.argsort(params)
    params = params[order]
    cdf_vals = cdf_vals[order]
    nodes = np.linspace(params[0], params[-1], grid_points)
    cdf_on_nodes = np.interp(nodes, params, cdf_vals)
    weights = np.clip(np.gradient(cdf_on_nodes, nodes), 0.0, None)
    return Density1D.grid(float(nodes[0]), float(nodes[-1]), weights)


def fiducial_region_probability(
    density: Density1D, threshold: float, side: str
) -> float:
    """Mass the density assigns to {mu <= threshold} or {mu > threshold}.

    The two sides sum to one exactly, by construction.
    """
    require_choice(side, "side", ("leq", "gt"))
    threshold = require_finite(threshold, "threshold")
    leq = float(density.cdf(threshold))
    if density.form == "grid":
        leq = min(leq / density.mass(), 1.0)
    return leq if side == "leq" else 1.0 - leq
