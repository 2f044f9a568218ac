"""Exception hierarchy shared by all engines.

Every error this package raises on purpose derives from :class:`InferenceError`,
so callers can catch one base class. The CLI maps subclasses onto exit codes.
"""

from __future__ import annotations

__all__ = [
    "InferenceError",
    "InputError",
    "AnalogyRejected",
    "EmptyRegion",
    "DegenerateUpdate",
    "UndefinedRatio",
    "ChainAborted",
    "NumericalError",
]


class InferenceError(Exception):
    """Base class for deliberate failures raised by this package."""


class InputError(InferenceError, ValueError):
    """A value or structure handed to a public operation is invalid.

    Covers both scalar domain violations (a negative variance, a probability
    outside the unit interval) and structural ones (a partition whose
    probabilities do not sum to one).
    """


class AnalogyRejected(InferenceError):
    """An applicability gate failed: no analogy holds, so no method applies.

    Raised when the fiducial route is requested despite substantive prior
    knowledge, or when a P-value is too large for the small-region assessment.
    """


class EmptyRegion(InferenceError):
    """Truncation target region carries (numerically) no mass."""


class DegenerateUpdate(InferenceError):
    """Every unnormalized posterior weight underflows to zero."""


class UndefinedRatio(InferenceError):
    """A conditional density vanishes on a full grid line, so the
    compatibility ratio is undefined there."""


class ChainAborted(InferenceError):
    """A Gibbs kernel produced an invalid density or draw mid-run."""

    def __init__(self, iteration: int, coordinate: int, reason: str):
        self.iteration = iteration
        self.coordinate = coordinate
        self.reason = reason
        super().__init__(
            f"chain aborted at iteration {iteration}, coordinate {coordinate}: {reason}"
        )


class NumericalError(InferenceError):
    """A numerical postcondition could not be met."""
