"""Divide-and-conquer composition of regional densities.

A parameter-line partition carries half-open regions (lo, hi] with region
probabilities; a matching set of regional densities supplies the shape inside
each region. ``compose`` mixes them into one grid density whose mass inside
region i equals the supplied probability, and ``ioi_pipeline`` chains the
bispatial region assessment (step two) with truncated fiducial densities
(step one) for the normal mean.

Numerical bookkeeping: the output lattice is chosen so that interior region
boundaries land exactly on grid nodes (the spacing is anchored on the first
boundary; the rest are checked and, failing that, a small search over node
counts minimizes the misalignment). Per-component scales are then solved
from the m x m region-mass system evaluated with the same quadrature the
grid CDF uses, which makes the per-region mass float-exact for contiguous or
commensurable partitions. Partitions with several mutually incommensurable
finite boundaries degrade to O(spacing) bookkeeping; raise ``grid_points``
if that matters.

Every function here is pure and every input is immutable, so regional
truncations may safely run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bispatial import BispatialConfig, assess_region_probability, one_sided_p_value
from .density import DEFAULT_GRID_POINTS, Density1D, _interpolant_cdf
from .exceptions import EmptyRegion, InputError, NumericalError
from .fiducial import (
    DataSummary,
    PriorKnowledge,
    fiducial_density,
    normal_mean_pivot,
)
from .validation import require_int_at_least

__all__ = [
    "Region",
    "RegionPartition",
    "RegionalDensitySet",
    "two_region_split",
    "truncate_to_region",
    "compose",
    "ioi_pipeline",
]

_EMPTY_MASS = 1e-12
_REGION_MASS_SLACK = 1e-6
_PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Region:
    """Half-open interval (lo, hi]; lo may be -inf and hi may be +inf."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo = float(self.lo)
        hi = float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise InputError("region bounds must not be NaN")
        if not lo < hi:
            raise InputError(f"region needs lo < hi, got ({lo!r}, {hi!r}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, t: float) -> bool:
        return self.lo < t <= self.hi


@dataclass(frozen=True)
class RegionPartition:
    """Ordered disjoint regions with probabilities summing to one."""

    regions: tuple[Region, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        regions = tuple(self.regions)
        if len(regions) < 1:
            raise InputError("partition needs at least one region")
        for r in regions:
            if not isinstance(r, Region):
                raise InputError("partition regions must be Region instances")
        for left, right in zip(regions, regions[1:]):
            if right.lo < left.hi - 1e-12 * max(1.0, abs(left.hi)):
                raise InputError(
                    f"regions overlap: ({left.lo!r}, {left.hi!r}] and "
                    f"({right.lo!r}, {right.hi!r}]"
                )
        probs = tuple(float(p) for p in self.probabilities)
        if len(probs) != len(regions):
            raise InputError(
                f"{len(regions)} regions but {len(probs)} probabilities"
            )
        for p in probs:
            if not (math.isfinite(p) and p >= 0.0):
                raise InputError(f"region probabilities must be finite and >= 0, got {p!r}")
        total = math.fsum(probs)
        if abs(total - 1.0) > _PROB_SUM_TOL:
            raise InputError(
                f"region probabilities must sum to 1 within {_PROB_SUM_TOL}, got {total!r}"
            )
        object.__setattr__(self, "regions", regions)
        object.__setattr__(self, "probabilities", probs)

    @property
    def m(self) -> int:
        return len(self.regions)


@dataclass(frozen=True)
class RegionalDensitySet:
    """One density per region, each concentrated inside its region."""

    densities: tuple[Density1D, ...]

    def __post_init__(self) -> None:
        densities = tuple(self.densities)
        if len(densities) < 1:
            raise InputError("regional set needs at least one density")
        for d in densities:
            if not isinstance(d, Density1D):
                raise InputError("regional set entries must be Density1D instances")
        object.__setattr__(self, "densities", densities)

    def validate_against(self, partition: RegionPartition) -> None:
        if len(self.densities) != partition.m:
            raise InputError(
                f"partition has {partition.m} regions but the set has "
                f"{len(self.densities)} densities"
            )
        for idx, (region, dens) in enumerate(zip(partition.regions, self.densities)):
            inside = dens.region_mass(region.lo, region.hi) / dens.mass()
            if inside < 1.0 - _REGION_MASS_SLACK:
                raise InputError(
                    f"density {idx} keeps only {inside:.9f} of its mass inside "
                    f"({region.lo!r}, {region.hi!r}]; need at least "
                    f"{1.0 - _REGION_MASS_SLACK}"
                )


def two_region_split(epsilon: float, prob_leq: float) -> RegionPartition:
    """The canonical split {mu <= epsilon} / {mu > epsilon}."""
    return RegionPartition(
        regions=(Region(-math.inf, epsilon), Region(epsilon, math.inf)),
        probabilities=(prob_leq, 1.0 - prob_leq),
    )


def truncate_to_region(
    density: Density1D, region: Region, *, grid_points: int = DEFAULT_GRID_POINTS
) -> Density1D:
    """Restrict a density to (lo, hi] and renormalize.

    Raises EmptyRegion when the region carries less than 1e-12 of the
    density's mass. When the region covers the entire support the density is
    returned unchanged.
    """
    if not isinstance(density, Density1D):
        raise InputError("density must be a Density1D")
    if not isinstance(region, Region):
        raise InputError("region must be a Region")
    grid_points = require_int_at_least(grid_points, "grid_points", 2)
    inside = density.region_mass(region.lo, region.hi)
    if inside < _EMPTY_MASS:
        raise EmptyRegion(
            f"region ({region.lo!r}, {region.hi!r}] carries mass {inside:.3e}, "
            f"below {_EMPTY_MASS}"
        )
    support_lo, support_hi = density.support()
    if region.lo <= support_lo and region.hi >= support_hi:
        return density
    lo = max(region.lo, support_lo)
    hi = min(region.hi, support_hi)
    if not lo < hi:
        raise EmptyRegion(
            f"region ({region.lo!r}, {region.hi!r}] misses the support "
            f"[{support_lo!r}, {support_hi!r}]"
        )
    nodes = np.linspace(lo, hi, grid_points)
    weights = np.asarray(density.pdf(nodes), dtype=float)
    if not np.any(weights > 0.0):
        raise EmptyRegion("truncated weights carry no mass on the grid")
    return Density1D.grid(float(lo), float(hi), weights)


_ALIGN_TOL = 1e-9  # node-misalignment tolerance, in units of one cell


def _build_lattice(
    lo: float, hi: float, boundaries: Sequence[float], grid_points: int
) -> tuple[np.ndarray, float]:
    """Uniform lattice on [lo, hi'] (hi' >= hi) passing through boundaries."""
    span = hi - lo

    def worst(h: float) -> float:
        if not boundaries:
            return 0.0
        r = (np.asarray(boundaries) - lo) / h
        return float(np.max(np.abs(r - np.round(r))))

    spacing = span / (grid_points - 1)
    if boundaries:
        anchor = boundaries[0]
        k0 = max(1, round((anchor - lo) / spacing))
        candidate = (anchor - lo) / k0
        # Anchoring on a boundary very close to the edge would explode the
        # node count; fall back to the search in that case.
        if span / candidate <= 32 * grid_points and worst(candidate) <= _ALIGN_TOL:
            spacing = candidate
        else:
            best_n, best_mis = grid_points, worst(spacing)
            for n in range(grid_points, 2 * grid_points):
                mis = worst(span / (n - 1))
                if mis < best_mis:
                    best_n, best_mis = n, mis
                    if mis <= _ALIGN_TOL:
                        break
            spacing = span / (best_n - 1)
    n_cells = int(math.ceil(span / spacing - 1e-9))
    if lo + n_cells * spacing < hi - 1e-12 * max(1.0, abs(hi)):
        n_cells += 1
    nodes = lo + spacing * np.arange(n_cells + 1)
    return nodes, spacing


def compose(
    partition: RegionPartition,
    regional: RegionalDensitySet,
    *,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> Density1D:
    """Mix regional densities into one grid density over the union support.

    The result's pdf is the probability-weighted sum of the regional pdfs and
    its mass inside region i equals probabilities[i] (float-exact for
    contiguous or boundary-aligned partitions, see the module docstring).
    With a single region the regional density is returned unchanged.
    """
    if not isinstance(partition, RegionPartition):
        raise InputError("partition must be a RegionPartition")
    if not isinstance(regional, RegionalDensitySet):
        raise InputError("regional must be a RegionalDensitySet")
    grid_points = require_int_at_least(grid_points, "grid_points", 2)
    regional.validate_against(partition)
    if partition.m == 1:
        return regional.densities[0]

    supports = [d.support() for d in regional.densities]
    union_lo = min(s[0] for s in supports)
    union_hi = max(s[1] for s in supports)
    interior: list[float] = []
    for region in partition.regions:
        for bound in (region.lo, region.hi):
            if math.isfinite(bound) and union_lo < bound < union_hi:
                if not any(abs(bound - b) <= 1e-12 * max(1.0, abs(bound)) for b in interior):
                    interior.append(bound)
    interior.sort()

    nodes, spacing = _build_lattice(union_lo, union_hi, interior, grid_points)
    n = nodes.size
    tol = _ALIGN_TOL * spacing

    fields = []
    for region, dens in zip(partition.regions, regional.densities):
        u = np.zeros(n)
        mask = (nodes - region.lo > tol) & (nodes - region.hi <= tol)
        if mask.any():
            u[mask] = np.asarray(dens.pdf(nodes[mask]), dtype=float)
            last = int(np.nonzero(mask)[0][-1])
            if last + 1 < n:
                ahead = float(nodes[last]) + 0.5 * spacing
                if not any(r.contains(ahead) for r in partition.regions):
                    # The next cell belongs to no region; zeroing this edge
                    # node keeps the interpolant from leaking mass into it.
                    u[last] = 0.0
        fields.append(u)

    def mass_between(u: np.ndarray, a: float, b: float) -> float:
        a = max(a, float(nodes[0]))
        b = min(b, float(nodes[-1]))
        if not a < b:
            return 0.0
        vals = _interpolant_cdf(float(nodes[0]), spacing, u, np.array([a, b]))
        return float(vals[1] - vals[0])

    m = partition.m
    mass_matrix = np.empty((m, m))
    for j, region in enumerate(partition.regions):
        for i, u in enumerate(fields):
            mass_matrix[j, i] = mass_between(u, region.lo, region.hi)
    probs = np.asarray(partition.probabilities, dtype=float)
    try:
        scales = np.linalg.solve(mass_matrix, probs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"regional mass system is singular: {exc}") from None
    if np.any(scales < -1e-9):
        raise NumericalError("regional mass system produced negative scales")
    scales = np.clip(scales, 0.0, None)

    weights = np.zeros(n)
    for c, u in zip(scales, fields):
        weights += c * u
    if not np.any(weights > 0.0):
        raise NumericalError("composed weights carry no mass")
    return Density1D.grid(float(nodes[0]), float(nodes[-1]), weights)


def ioi_pipeline(
    data: DataSummary,
    config: BispatialConfig,
    prior_knowledge: PriorKnowledge | str = PriorKnowledge.NONE_OR_VERY_LITTLE,
    *,
    region_probability: float | None = None,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> Density1D:
    """Two-region post-data density for the normal mean.

    Step two first: the one-sided P value for {mu <= epsilon} is assessed
    into a region probability (both gates may raise AnalogyRejected). Step
    one inside each region: the fiducial density truncated to the region.
    The mixture of the two is returned as a grid density.

    ``region_probability`` overrides the bispatial assessment with a caller
    supplied probability for {mu <= epsilon}; passing the fiducial tail mass
    itself reproduces the plain fiducial density, a useful degenerate check.
    """
    if not isinstance(data, DataSummary):
        raise InputError("data must be a DataSummary")
    if not isinstance(config, BispatialConfig):
        raise InputError("config must be a BispatialConfig")
    if region_probability is None:
        pvalue = one_sided_p_value(data, config.epsilon, config.p_value_threshold)
        prob_leq = assess_region_probability(pvalue, config)
    else:
        prob_leq = float(region_probability)
        if not 0.0 <= prob_leq <= 1.0:
            raise InputError(
                f"region_probability must lie in [0, 1], got {prob_leq!r}"
            )
    fid = fiducial_density(normal_mean_pivot(), data, prior_knowledge)
    partition = two_region_split(config.epsilon, prob_leq)
    regional = RegionalDensitySet(
        densities=(
            truncate_to_region(fid, partition.regions[0], grid_points=grid_points),
            truncate_to_region(fid, partition.regions[1], grid_points=grid_points),
        )
    )
    return compose(partition, regional, grid_points=grid_points)
