"""Bispatial engine: from a one-sided P value to a region probability.

The one-sided P value for the null {mu <= epsilon} is
``1 - Phi((sample_mean - epsilon) / (sigma / sqrt(n)))``. The bispatial
argument converts it into a post-data probability of the null region, but
only when the P value is small (below 0.1, configurable downward only);
above that the analogy between the two spaces breaks down and
:class:`AnalogyRejected` is raised.

The paper-level theory leaves the exact mapping from (P value, pre-data
belief) to a probability open, so the mapping is a replaceable component of
:class:`BispatialConfig`. The engine default treats the P value as evidence
odds and scales them by the declared pre-data odds of the null region,
capping the posterior odds at one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .density import std_normal_cdf
from .exceptions import AnalogyRejected, InputError
from .fiducial import DataSummary
from .validation import require_finite, require_nonnegative, require_open_unit

__all__ = [
    "P_VALUE_THRESHOLD",
    "default_odds_calibration",
    "BispatialConfig",
    "PValueResult",
    "one_sided_p_value",
    "assess_region_probability",
]

# Applicability boundary for the small-region assessment; configs may lower
# it but never raise it.
P_VALUE_THRESHOLD = 0.1

Calibration = Callable[[float, float], float]


def default_odds_calibration(p0: float, pre_data_mass: float) -> float:
    """Engine-default mapping: scale P-value odds by pre-data odds, cap at 1.

    With pre_data_mass = 1/2 the result reduces to the P value itself.
    """
    p0 = require_open_unit(p0, "p0")
    pre_data_mass = require_open_unit(pre_data_mass, "pre_data_mass")
    prior_odds = pre_data_mass / (1.0 - pre_data_mass)
    evidence_odds = p0 / (1.0 - p0)
    odds = min(1.0, prior_odds * evidence_odds)
    return odds / (1.0 + odds)


@dataclass(frozen=True)
class PValueResult:
    """A one-sided P value and whether the bispatial route applies to it."""

    p0: float
    applicable: bool
    threshold: float = P_VALUE_THRESHOLD

    def __post_init__(self) -> None:
        p0 = require_finite(self.p0, "p0")
        if not 0.0 <= p0 <= 1.0:
            raise InputError(f"p0 must lie in [0, 1], got {p0!r}")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "threshold", _check_threshold(self.threshold))
        object.__setattr__(self, "applicable", bool(self.applicable))


def _check_threshold(threshold: float) -> float:
    value = require_finite(threshold, "p_value_threshold")
    if not 0.0 < value <= P_VALUE_THRESHOLD:
        raise InputError(
            f"p_value_threshold is configurable downward only: need a value in "
            f"(0, {P_VALUE_THRESHOLD}], got {value!r}"
        )
    return value


@dataclass(frozen=True)
class BispatialConfig:
    """Region boundary, pre-data belief and the probability mapping."""

    epsilon: float
    pre_data_mass: float
    calibration: Calibration = field(default=default_odds_calibration)
    p_value_threshold: float = P_VALUE_THRESHOLD

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", require_nonnegative(self.epsilon, "epsilon"))
        object.__setattr__(
            self, "pre_data_mass", require_open_unit(self.pre_data_mass, "pre_data_mass")
        )
        object.__setattr__(self, "p_value_threshold", _check_threshold(self.p_value_threshold))
        if not callable(self.calibration):
            raise InputError("calibration must be callable")
        self._probe_calibration()

    def _probe_calibration(self) -> None:
        # Structural checks on the mapping: strictly increasing in p0 over
        # the applicable range, and vanishing with the P value.
        probes = np.linspace(1e-6, self.p_value_threshold * 0.999, 25)
        values = []
        for p in probes:
            v = float(self.calibration(float(p), self.pre_data_mass))
            if not 0.0 <= v <= 1.0:
                raise InputError(f"calibration({p!r}) = {v!r} lies outside [0, 1]")
            values.append(v)
        if not all(b > a for a, b in zip(values, values[1:])):
            raise InputError("calibration must be strictly increasing in p0")
        if not float(self.calibration(1e-12, self.pre_data_mass)) <= 1e-6:
            raise InputError("calibration must vanish as p0 approaches 0")


def one_sided_p_value(
    data: DataSummary, epsilon: float, threshold: float = P_VALUE_THRESHOLD
) -> PValueResult:
    """P value against {mu <= epsilon}, flagged for bispatial applicability."""
    if not isinstance(data, DataSummary):
        raise InputError("data must be a DataSummary")
    epsilon = require_nonnegative(epsilon, "epsilon")
    threshold = _check_threshold(threshold)
    z = (data.sample_mean - epsilon) / data.standard_error
    p0 = float(std_normal_cdf(-z))
    return PValueResult(p0=p0, applicable=p0 < threshold, threshold=threshold)


def assess_region_probability(pvalue: PValueResult, config: BispatialConfig) -> float:
    """Post-data probability of {mu <= epsilon} from an applicable P value."""
    if not isinstance(pvalue, PValueResult):
        raise InputError("pvalue must be a PValueResult")
    if not isinstance(config, BispatialConfig):
        raise InputError("config must be a BispatialConfig")
    if not pvalue.applicable:
        raise AnalogyRejected(
            f"bispatial route refused: P value {pvalue.p0:.6g} is not below "
            f"{pvalue.threshold:.6g}, so the small-region analogy does not hold"
        )
    if not 0.0 < pvalue.p0:
        # A P value of exactly zero carries no usable odds; treat as the
        # smallest representable evidence instead of dividing by zero.
        return 0.0
    result = float(config.calibration(pvalue.p0, config.pre_data_mass))
    if not 0.0 <= result <= 1.0:
        raise InputError(f"calibration returned {result!r}, outside [0, 1]")
    return result
