"""Shared oracles for the test suite.

Everything here is deliberately independent of the package internals: the
normal CDF and quantile come from scipy, the invariant-law oracle is plain
linear algebra on a discretized state space, and the no-solution check for
the mismatched conditional pair is a brute-force grid search. Tests compare
package output against these, never the other way round.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

# Frozen reference values, computed once from scipy.stats.norm and recorded
# here so the assertions do not silently follow a library upgrade.
PHI_196 = 0.9750021048517795
PHI_3 = 0.9986501019683699
P0_AT_3SE = 0.0013498980316300933
Z_975 = 1.959963984540054
HALF_NORMAL_NEG_MEDIAN = -0.6744897501960817


def phi(x):
    return stats.norm.cdf(x)


def phi_inv(p):
    return stats.norm.ppf(p)


def one_sample_ks(values: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance of an empirical sample from a CDF."""
    values = np.sort(np.asarray(values, dtype=float))
    n = values.size
    cdf_vals = np.asarray(cdf(values), dtype=float)
    upper = np.max(np.arange(1, n + 1) / n - cdf_vals)
    lower = np.max(cdf_vals - np.arange(0, n) / n)
    return float(max(upper, lower))


def power_iteration_invariant(
    slope1: float,
    var1: float,
    slope2: float,
    var2: float,
    order: str = "12",
    half_width: float = 8.0,
    points: int = 101,
    tol: float = 1e-14,
    max_iter: int = 50000,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Invariant law of a two-coordinate alternating update, by iteration.

    The coordinate refreshes are normal(slope * other, var) conditionals,
    discretized to a points-per-axis box and renormalized per grid line.
    order "12" refreshes coordinate 1 then coordinate 2 within a sweep;
    "21" is the reverse. Returns (marginal-1, marginal-2, joint), each
    normalized to sum 1.
    """
    if order not in ("12", "21"):
        raise ValueError(f"order must be '12' or '21', got {order!r}")
    t = np.linspace(-half_width, half_width, points)
    # K1[i, j] = p(theta1 = t[i] | theta2 = t[j]), columns normalized.
    K1 = stats.norm.pdf(t[:, None], loc=slope1 * t[None, :], scale=np.sqrt(var1))
    K1 /= K1.sum(axis=0, keepdims=True)
    # K2[i, j] = p(theta2 = t[j] | theta1 = t[i]), rows normalized.
    K2 = stats.norm.pdf(t[None, :], loc=slope2 * t[:, None], scale=np.sqrt(var2))
    K2 /= K2.sum(axis=1, keepdims=True)

    P = np.full((points, points), 1.0 / points**2)
    for _ in range(max_iter):
        prev = P
        if order == "12":
            P = K1 * P.sum(axis=0)[None, :]
            P = K2 * P.sum(axis=1)[:, None]
        else:
            P = K2 * P.sum(axis=1)[:, None]
            P = K1 * P.sum(axis=0)[None, :]
        P /= P.sum()
        if np.max(np.abs(P - prev)) < tol:
            break
    return P.sum(axis=1), P.sum(axis=0), P


def gaussian_consistency_min_residual(points: int = 81) -> float:
    """Smallest max-residual of the joint-normal consistency equations.

    For conditionals normal(t2, 1) and normal(t1 / 2, 1) to both come from
    one bivariate normal with spreads (s1, s2) and correlation r, four
    equations must hold simultaneously:

        r * s1 / s2 = 1        r * s2 / s1 = 1/2
        s1^2 * (1 - r^2) = 1   s2^2 * (1 - r^2) = 1

    This scans a (r, s1, s2) grid and returns the smallest max-norm of the
    residual vector; a value bounded away from zero certifies there is no
    solution.
    """
    r = np.linspace(-0.999, 0.999, points)
    s = np.geomspace(0.05, 20.0, points)
    rr = r[:, None, None]
    s1 = s[None, :, None]
    s2 = s[None, None, :]
    terms = np.broadcast_arrays(
        np.abs(rr * s1 / s2 - 1.0),
        np.abs(rr * s2 / s1 - 0.5),
        np.abs(s1**2 * (1.0 - rr**2) - 1.0),
        np.abs(s2**2 * (1.0 - rr**2) - 1.0),
    )
    return float(np.stack(terms).max(axis=0).min())
