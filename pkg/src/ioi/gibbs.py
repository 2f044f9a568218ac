"""Gibbs sampling over per-coordinate conditional densities.

A :class:`ConditionalSet` holds one kernel per coordinate; a kernel maps the
other coordinates' current values to a :class:`~ioi.density.Density1D`. The
kernels may come from different engines per coordinate (the method tags
record which), so the chain composes heterogeneous conditionals into one
joint sampling scheme.

``check_compatibility`` decides whether two conditionals cohere into a joint
density at all: on a grid, ``log p(t1|t2) - log p(t2|t1)`` must split into a
function of t1 plus a function of t2, so after row/column double-centering
the residual must vanish. For compatible pairs the implied joint is
reconstructed and verified against the inputs.

``scan_sensitivity`` compares chains run under different scan orders. Its
contract matrix holds pairwise Kolmogorov-Smirnov distances between
per-coordinate marginals. Note a structural fact about two-coordinate
chains: reversing the sweep is a phase shift of the same alternating update
sequence, so invariant per-coordinate marginals coincide for ANY pair of
conditionals, compatible or not; it is the recorded joint that scan order
can change. The difference-projection matrix (KS on theta_i - theta_j) is
therefore included as a joint-sensitive diagnostic.

Determinism: draws depend only on the conditional set, scan order, seed and
initial state. Chains never touch global RNG state and may run in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .bayes import NormalPrior, conjugate_normal_update
from .density import Density1D
from .exceptions import (
    ChainAborted,
    InferenceError,
    InputError,
    NumericalError,
    UndefinedRatio,
)
from .fiducial import (
    DataSummary,
    PriorKnowledge,
    fiducial_density,
    normal_mean_pivot,
)
from .validation import as_float_vector, require_choice, require_int_at_least

__all__ = [
    "METHOD_TAGS",
    "ConditionalSet",
    "ScanOrder",
    "ChainResult",
    "CompatibilityResult",
    "ScanSensitivityResult",
    "ConditionalSpec",
    "default_burn_in",
    "gibbs_run",
    "two_sample_ks",
    "scan_sensitivity",
    "check_compatibility",
    "build_conditional_set",
    "bivariate_normal_mean_family",
    "canonical_compatible_set",
    "canonical_incompatible_set",
]

METHOD_TAGS = ("bayes", "fiducial", "bispatial", "other")

Kernel = Callable[[np.ndarray], Density1D]


@dataclass(frozen=True)
class ConditionalSet:
    """One conditional kernel per coordinate, with its originating method.

    ``kernels[j]`` receives the other coordinates' values (original index
    order, coordinate j removed) and must return a Density1D.
    """

    kernels: tuple[Kernel, ...]
    method_tags: tuple[str, ...]

    def __post_init__(self) -> None:
        kernels = tuple(self.kernels)
        tags = tuple(self.method_tags)
        if len(kernels) < 2:
            raise InputError("a conditional set needs at least two coordinates")
        if len(tags) != len(kernels):
            raise InputError(
                f"{len(kernels)} kernels but {len(tags)} method tags"
            )
        for kernel in kernels:
            if not callable(kernel):
                raise InputError("kernels must be callable")
        for tag in tags:
            require_choice(tag, "method tag", METHOD_TAGS)
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "method_tags", tags)

    @property
    def k(self) -> int:
        return len(self.kernels)


@dataclass(frozen=True)
class ScanOrder:
    """Coordinate visiting rule for one sweep.

    fixed_sweep visits a fixed permutation each iteration; random_scan draws
    a fresh uniform permutation per sweep from its own seed, independent of
    the draw seed.
    """

    kind: Literal["fixed_sweep", "random_scan"]
    order: tuple[int, ...] | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        require_choice(self.kind, "scan kind", ("fixed_sweep", "random_scan"))
        if self.kind == "fixed_sweep":
            if self.order is None:
                raise InputError("fixed_sweep needs a coordinate order")
            order = tuple(int(i) for i in self.order)
            if sorted(order) != list(range(len(order))):
                raise InputError(
                    f"order must be a permutation of 0..k-1, got {order!r}"
                )
            object.__setattr__(self, "order", order)
            object.__setattr__(self, "seed", None)
        else:
            if self.seed is None:
                raise InputError("random_scan needs a seed")
            object.__setattr__(self, "order", None)
            object.__setattr__(self, "seed", require_int_at_least(self.seed, "scan seed", 0))

    @classmethod
    def fixed_sweep(cls, order: Sequence[int]) -> "ScanOrder":
        return cls(kind="fixed_sweep", order=tuple(order))

    @classmethod
    def random_scan(cls, seed: int) -> "ScanOrder":
        return cls(kind="random_scan", seed=seed)

    def label(self) -> str:
        if self.kind == "fixed_sweep":
            return "sweep(" + ",".join(str(i + 1) for i in self.order) + ")"
        return f"random(seed={self.seed})"

    def as_dict(self) -> dict:
        if self.kind == "fixed_sweep":
            # External convention is 1-based coordinates.
            return {"kind": "fixed_sweep", "order": [i + 1 for i in self.order]}
        return {"kind": "random_scan", "seed": self.seed}

    @classmethod
    def from_dict(cls, payload: dict) -> "ScanOrder":
        if not isinstance(payload, dict) or "kind" not in payload:
            raise InputError("scan payload must be a dict with a 'kind' key")
        if payload["kind"] == "fixed_sweep":
            order = payload.get("order")
            if not isinstance(order, (list, tuple)) or not order:
                raise InputError("fixed_sweep scan needs a nonempty 'order' list")
            return cls.fixed_sweep([int(i) - 1 for i in order])
        if payload["kind"] == "random_scan":
            return cls.random_scan(payload.get("seed"))
        raise InputError(f"unknown scan kind {payload['kind']!r}")


@dataclass(frozen=True, eq=False)
class ChainResult:
    """All recorded sweeps of one chain, plus what produced them."""

    draws: np.ndarray
    burn_in: int
    seed: int
    scan: ScanOrder

    def __post_init__(self) -> None:
        draws = np.asarray(self.draws, dtype=float)
        draws = draws.copy()
        draws.setflags(write=False)
        object.__setattr__(self, "draws", draws)

    @property
    def iterations(self) -> int:
        return int(self.draws.shape[0])

    @property
    def k(self) -> int:
        return int(self.draws.shape[1])

    @property
    def draws_post_burn_in(self) -> np.ndarray:
        return self.draws[self.burn_in :]


def default_burn_in(iterations: int) -> int:
    """Five percent of the run, at least 1000, always below iterations."""
    return min(max(1000, iterations // 20), iterations - 1)


def gibbs_run(
    conditionals: ConditionalSet,
    scan: ScanOrder,
    init: Sequence[float],
    iterations: int,
    burn_in: int | None = None,
    seed: int = 0,
) -> ChainResult:
    """Run one Gibbs chain; deterministic given (set, scan, seed, init).

    Each iteration is a full sweep: every coordinate is refreshed once, in
    the scan's order, by inverse-CDF sampling from its conditional at the
    current values of the others. A kernel failure mid-run raises
    ChainAborted carrying the iteration index.
    """
    if not isinstance(conditionals, ConditionalSet):
        raise InputError("conditionals must be a ConditionalSet")
    if not isinstance(scan, ScanOrder):
        raise InputError("scan must be a ScanOrder")
    iterations = require_int_at_least(iterations, "iterations", 2)
    if burn_in is None:
        burn_in = default_burn_in(iterations)
    else:
        burn_in = require_int_at_least(burn_in, "burn_in", 0)
        if burn_in >= iterations:
            raise InputError(
                f"burn_in ({burn_in}) must be smaller than iterations ({iterations})"
            )
    k = conditionals.k
    state = as_float_vector(init, "init")
    if state.size != k:
        raise InputError(f"init has length {state.size}, expected {k}")
    state = state.copy()
    if scan.kind == "fixed_sweep" and len(scan.order) != k:
        raise InputError(
            f"scan order has length {len(scan.order)}, expected {k}"
        )
    seed = require_int_at_least(seed, "seed", 0)
    rng = np.random.default_rng(seed)
    scan_rng = np.random.default_rng(scan.seed) if scan.kind == "random_scan" else None

    keep = np.arange(k)
    draws = np.empty((iterations, k))
    for t in range(iterations):
        if scan_rng is None:
            order = scan.order
        else:
            order = scan_rng.permutation(k)
        for j in order:
            others = state[keep != j]
            try:
                dens = conditionals.kernels[j](others)
            except (InferenceError, ValueError, ZeroDivisionError) as exc:
                raise ChainAborted(t, int(j), f"kernel failed: {exc}") from exc
            if not isinstance(dens, Density1D):
                raise ChainAborted(
                    t, int(j), f"kernel returned {type(dens).__name__}, not a Density1D"
                )
            u = rng.random()
            if u <= 0.0:
                u = 5e-324
            value = float(dens.quantile(u))
            if not math.isfinite(value):
                raise ChainAborted(t, int(j), f"draw is not finite: {value!r}")
            state[j] = value
        draws[t] = state
    return ChainResult(draws=draws, burn_in=burn_in, seed=seed, scan=scan)


def two_sample_ks(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise InputError("two_sample_ks needs nonempty samples")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


@dataclass(frozen=True, eq=False)
class ScanSensitivityResult:
    """Pairwise distances between chains run under different scans."""

    scans: tuple[ScanOrder, ...]
    chains: tuple[ChainResult, ...]
    ks_matrix: np.ndarray
    difference_matrix: np.ndarray | None

    @property
    def max_ks(self) -> float:
        return float(np.max(self.ks_matrix))

    def as_dict(self) -> dict:
        out = {
            "scans": [s.as_dict() for s in self.scans],
            "ks_matrix": [[float(v) for v in row] for row in self.ks_matrix],
            "max_ks": self.max_ks,
        }
        if self.difference_matrix is not None:
            out["difference_projection_matrix"] = [
                [float(v) for v in row] for row in self.difference_matrix
            ]
            out["max_difference_projection_ks"] = float(np.max(self.difference_matrix))
        return out


def scan_sensitivity(
    conditionals: ConditionalSet,
    scans: Sequence[ScanOrder],
    iterations: int,
    burn_in: int | None = None,
    seed: int = 0,
    *,
    init: Sequence[float] | None = None,
    include_difference_projections: bool = True,
) -> ScanSensitivityResult:
    """Run one chain per scan order and compare their empirical laws.

    ks_matrix[a, b] is the largest per-coordinate two-sample KS distance
    between the post-burn-in marginals of chains a and b. For
    two-coordinate chains that quantity cannot separate sweep orders (see
    the module docstring), so difference_matrix additionally reports KS on
    the pairwise difference projections theta_i - theta_j, which is
    sensitive to the recorded joint.
    """
    scans = tuple(scans)
    if len(scans) < 2:
        raise InputError("scan_sensitivity needs at least two scans")
    for s in scans:
        if not isinstance(s, ScanOrder):
            raise InputError("scans must be ScanOrder instances")
    if init is None:
        init = np.zeros(conditionals.k)
    chains = tuple(
        gibbs_run(conditionals, s, init, iterations, burn_in, seed) for s in scans
    )
    n_scans = len(scans)
    k = conditionals.k
    ks = np.zeros((n_scans, n_scans))
    diff = np.zeros((n_scans, n_scans)) if include_difference_projections else None
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    for a in range(n_scans):
        for b in range(a + 1, n_scans):
            da = chains[a].draws_post_burn_in
            db = chains[b].draws_post_burn_in
            ks[a, b] = ks[b, a] = max(
                two_sample_ks(da[:, c], db[:, c]) for c in range(k)
            )
            if diff is not None:
                diff[a, b] = diff[b, a] = max(
                    two_sample_ks(da[:, i] - da[:, j], db[:, i] - db[:, j])
                    for i, j in pairs
                )
    return ScanSensitivityResult(
        scans=scans, chains=chains, ks_matrix=ks, difference_matrix=diff
    )


@dataclass(frozen=True, eq=False)
class CompatibilityResult:
    """Verdict on whether two conditionals cohere into one joint."""

    status: Literal["compatible", "approximately_compatible", "incompatible"]
    residual: float
    theta1_nodes: np.ndarray
    theta2_nodes: np.ndarray
    joint: np.ndarray | None
    recommendation: str

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "residual": self.residual,
            "recommendation": self.recommendation,
        }


def _trapezoid_weights(n: int, spacing: float) -> np.ndarray:
    w = np.full(n, spacing)
    w[0] = w[-1] = 0.5 * spacing
    return w


def check_compatibility(
    conditionals: ConditionalSet,
    box: tuple[tuple[float, float], tuple[float, float]],
    grid_points: int = 201,
    *,
    residual_tol: float = 1e-6,
    approximate_tol: float = 0.05,
) -> CompatibilityResult:
    """Rank-one test of the log conditional ratio on a working box.

    For a compatible pair, log p(t1|t2) - log p(t2|t1) equals
    log m1(t1) - log m2(t2) for the implied marginals, so double-centering
    the grid of log ratios must leave a (numerically) zero residual. The
    verdict is 'compatible' below residual_tol (use 1e-6 for closed-form
    kernels, 1e-3 for numerically derived ones), 'approximately_compatible'
    below approximate_tol (sampling is still recommended there) and
    'incompatible' above it. For compatible pairs the implied joint is
    reconstructed from the column means and verified to reproduce both
    conditionals within 1e-6 sup-distance.
    """
    if not isinstance(conditionals, ConditionalSet):
        raise InputError("conditionals must be a ConditionalSet")
    if conditionals.k != 2:
        raise InputError("compatibility checking is defined for two coordinates")
    grid_points = require_int_at_least(grid_points, "grid_points", 8)
    if not 0.0 < residual_tol < approximate_tol:
        raise InputError("need 0 < residual_tol < approximate_tol")
    (lo1, hi1), (lo2, hi2) = box
    if not (lo1 < hi1 and lo2 < hi2):
        raise InputError("working box intervals must have lo < hi")
    t1 = np.linspace(lo1, hi1, grid_points)
    t2 = np.linspace(lo2, hi2, grid_points)

    cond1 = np.empty((grid_points, grid_points))
    for j in range(grid_points):
        cond1[:, j] = np.asarray(
            conditionals.kernels[0](np.array([t2[j]])).pdf(t1), dtype=float
        )
    cond2 = np.empty((grid_points, grid_points))
    for i in range(grid_points):
        cond2[i, :] = np.asarray(
            conditionals.kernels[1](np.array([t1[i]])).pdf(t2), dtype=float
        )

    for j in range(grid_points):
        if not np.any(cond1[:, j] > 0.0):
            raise UndefinedRatio(
                f"conditional 1 vanishes on the whole grid line theta2 = {t2[j]!r}"
            )
    for i in range(grid_points):
        if not np.any(cond2[i, :] > 0.0):
            raise UndefinedRatio(
                f"conditional 2 vanishes on the whole grid line theta1 = {t1[i]!r}"
            )

    valid = (cond1 > 0.0) & (cond2 > 0.0)
    if not np.all(np.any(valid, axis=0)) or not np.all(np.any(valid, axis=1)):
        raise UndefinedRatio(
            "the conditional ratio has no valid entries on some grid line"
        )
    log_ratio = np.full_like(cond1, np.nan)
    log_ratio[valid] = np.log(cond1[valid]) - np.log(cond2[valid])
    row_means = np.nanmean(log_ratio, axis=1, keepdims=True)
    col_means = np.nanmean(log_ratio, axis=0, keepdims=True)
    grand = np.nanmean(log_ratio)
    centered = log_ratio - row_means - col_means + grand
    residual = float(np.nanmax(np.abs(centered)))

    if residual <= residual_tol:
        status = "compatible"
        recommendation = (
            "the conditionals cohere; the reconstructed joint may be used directly"
        )
    elif residual <= approximate_tol:
        status = "approximately_compatible"
        recommendation = (
            "the conditionals nearly cohere; use the sampling route and treat "
            "results as approximate"
        )
    else:
        status = "incompatible"
        recommendation = (
            "no joint density has these conditionals; do not pool chains, "
            "report per-scan results side by side"
        )

    joint = None
    if status == "compatible":
        # log ratio = log m1(t1) - log m2(t2) + const, so minus the column
        # means recover log m2 up to a constant.
        log_m2 = -np.nanmean(log_ratio, axis=0)
        log_m2 -= np.max(log_m2)
        joint = cond1 * np.exp(log_m2)[None, :]
        w1 = _trapezoid_weights(grid_points, float(t1[1] - t1[0]))
        w2 = _trapezoid_weights(grid_points, float(t2[1] - t2[0]))
        total = float(w1 @ joint @ w2)
        if not total > 0.0:
            raise NumericalError("reconstructed joint has no mass on the box")
        joint = joint / total
        col_mass = w1 @ joint
        row_mass = joint @ w2
        recon1 = joint / col_mass[None, :]
        recon2 = joint / row_mass[:, None]
        ref1 = cond1 / (w1 @ cond1)[None, :]
        ref2 = cond2 / (cond2 @ w2)[:, None]
        sup1 = float(np.max(np.abs(recon1 - ref1)))
        sup2 = float(np.max(np.abs(recon2 - ref2)))
        if max(sup1, sup2) > 1e-6:
            raise NumericalError(
                f"reconstructed joint fails to reproduce the conditionals "
                f"(sup distances {sup1:.3e}, {sup2:.3e})"
            )
    return CompatibilityResult(
        status=status,
        residual=residual,
        theta1_nodes=t1,
        theta2_nodes=t2,
        joint=joint,
        recommendation=recommendation,
    )


@dataclass(frozen=True)
class ConditionalSpec:
    """Recipe for one coordinate's kernel: which engine, fed how.

    ``make_summary`` maps the other coordinates' values to the DataSummary
    the per-coordinate normal-mean model sees.
    """

    method: Literal["fiducial", "bayes"]
    make_summary: Callable[[np.ndarray], DataSummary]
    prior: NormalPrior | None = None
    prior_knowledge: PriorKnowledge | str = PriorKnowledge.NONE_OR_VERY_LITTLE

    def __post_init__(self) -> None:
        require_choice(self.method, "method", ("fiducial", "bayes"))
        if not callable(self.make_summary):
            raise InputError("make_summary must be callable")
        if self.method == "bayes" and self.prior is None:
            raise InputError("a bayes conditional needs a prior")
        object.__setattr__(
            self, "prior_knowledge", PriorKnowledge.coerce(self.prior_knowledge)
        )


def build_conditional_set(
    specs: Sequence[ConditionalSpec], probe: Sequence[float]
) -> ConditionalSet:
    """Assemble kernels from per-coordinate method assignments.

    Each kernel is probed once at the supplied state so applicability gates
    (for example a fiducial coordinate declared with substantive prior
    knowledge) fail at build time rather than mid-chain.
    """
    specs = tuple(specs)
    if len(specs) < 2:
        raise InputError("need at least two conditional specs")
    for spec in specs:
        if not isinstance(spec, ConditionalSpec):
            raise InputError("specs must be ConditionalSpec instances")

    def make_kernel(spec: ConditionalSpec) -> Kernel:
        if spec.method == "fiducial":
            pivot = normal_mean_pivot()

            def kernel(others: np.ndarray) -> Density1D:
                return fiducial_density(pivot, spec.make_summary(others), spec.prior_knowledge)

            return kernel

        def kernel(others: np.ndarray) -> Density1D:
            return conjugate_normal_update(spec.prior, spec.make_summary(others))

        return kernel

    kernels = tuple(make_kernel(spec) for spec in specs)
    tags = tuple(spec.method for spec in specs)
    built = ConditionalSet(kernels=kernels, method_tags=tags)
    state = as_float_vector(probe, "probe")
    if state.size != built.k:
        raise InputError(f"probe has length {state.size}, expected {built.k}")
    keep = np.arange(built.k)
    for j, kernel in enumerate(built.kernels):
        dens = kernel(state[keep != j])
        if not isinstance(dens, Density1D):
            raise InputError(
                f"kernel {j} returned {type(dens).__name__}, not a Density1D"
            )
    return built


def bivariate_normal_mean_family(
    means: tuple[float, float],
    sigma2s: tuple[float, float],
    correlation: float,
    n: int,
) -> tuple[Callable[[np.ndarray], DataSummary], Callable[[np.ndarray], DataSummary]]:
    """Conditional-data maps for a correlated two-mean normal model.

    Coordinate j's conditional model, given the other mean, is a normal-mean
    summary whose location shifts by the regression of j on the other and
    whose variance is deflated by 1 - correlation^2; with the fiducial or
    flat-prior route per coordinate the kernels are then exactly the
    conditionals of the bivariate normal around (means, covariance/n).
    """
    m1, m2 = (float(v) for v in means)
    s1, s2 = (float(v) for v in sigma2s)
    if not (s1 > 0.0 and s2 > 0.0):
        raise InputError("sigma2s must be positive")
    rho = float(correlation)
    if not -1.0 < rho < 1.0:
        raise InputError(f"correlation must lie strictly inside (-1, 1), got {rho!r}")
    n = require_int_at_least(n, "n", 1)
    shrink = 1.0 - rho * rho

    def make_first(others: np.ndarray) -> DataSummary:
        other = float(np.asarray(others, dtype=float)[0])
        mean = m1 + rho * math.sqrt(s1 / s2) * (other - m2)
        return DataSummary(sample_mean=mean, n=n, sigma2=shrink * s1)

    def make_second(others: np.ndarray) -> DataSummary:
        other = float(np.asarray(others, dtype=float)[0])
        mean = m2 + rho * math.sqrt(s2 / s1) * (other - m1)
        return DataSummary(sample_mean=mean, n=n, sigma2=shrink * s2)

    return make_first, make_second


def canonical_compatible_set(rho: float = 0.7) -> ConditionalSet:
    """Both-fiducial conditionals of a standard bivariate normal."""
    make_first, make_second = bivariate_normal_mean_family(
        (0.0, 0.0), (1.0, 1.0), rho, 1
    )
    specs = (
        ConditionalSpec(method="fiducial", make_summary=make_first),
        ConditionalSpec(method="fiducial", make_summary=make_second),
    )
    return build_conditional_set(specs, probe=(0.0, 0.0))


def canonical_incompatible_set() -> ConditionalSet:
    """normal(theta2, 1) against normal(theta1 / 2, 1): no joint exists."""
    return ConditionalSet(
        kernels=(
            lambda others: Density1D.normal(float(others[0]), 1.0),
            lambda others: Density1D.normal(0.5 * float(others[0]), 1.0),
        ),
        method_tags=("other", "other"),
    )
