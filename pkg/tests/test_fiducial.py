"""Pivot inversion: closed form, transform fallback, applicability gate."""

import numpy as np
import pytest
from scipy import stats

from ioi.density import Density1D
from ioi.exceptions import AnalogyRejected, InputError
from ioi.fiducial import (
    DataSummary,
    Pivot,
    PriorKnowledge,
    fiducial_density,
    fiducial_region_probability,
    normal_mean_pivot,
)

from tests.helpers import one_sample_ks


def test_data_summary_fields_and_standard_error():
    data = DataSummary(sample_mean=10.0, n=25, sigma2=4.0)
    assert data.standard_error == 0.4
    assert data.as_dict() == {"mean": 10.0, "n": 25, "sigma2": 4.0}
    again = DataSummary.from_dict(data.as_dict())
    assert again == data


def test_data_summary_from_values():
    data = DataSummary.from_values([9.0, 11.0], sigma2=4.0)
    assert data.sample_mean == 10.0
    assert data.n == 2


def test_data_summary_validation():
    with pytest.raises(InputError):
        DataSummary(sample_mean=0.0, n=0, sigma2=1.0)
    with pytest.raises(InputError):
        DataSummary(sample_mean=0.0, n=5, sigma2=0.0)
    with pytest.raises(InputError):
        DataSummary(sample_mean=np.nan, n=5, sigma2=1.0)


def test_closed_form_inversion_is_exactly_parametric():
    data = DataSummary(10.0, 25, 4.0)
    d = fiducial_density(normal_mean_pivot(), data)
    assert d.form == "normal"
    assert d.mean == 10.0
    assert d.variance == 4.0 / 25.0


def test_closed_form_over_randomized_cases():
    rng = np.random.default_rng(11)
    for _ in range(50):
        mean = float(rng.uniform(-50, 50))
        n = int(rng.integers(1, 400))
        sigma2 = float(rng.uniform(0.01, 25.0))
        d = fiducial_density(normal_mean_pivot(), DataSummary(mean, n, sigma2))
        assert d.mean == mean
        assert d.variance == sigma2 / n


def test_substantive_prior_knowledge_is_rejected():
    data = DataSummary(0.0, 10, 1.0)
    with pytest.raises(AnalogyRejected):
        fiducial_density(normal_mean_pivot(), data, PriorKnowledge.SUBSTANTIVE)
    with pytest.raises(AnalogyRejected):
        fiducial_density(normal_mean_pivot(), data, "substantive")


def test_prior_knowledge_coercion_rejects_unknown_labels():
    with pytest.raises(InputError):
        fiducial_density(normal_mean_pivot(), DataSummary(0.0, 1, 1.0), "plenty")


def _pivot_without_closed_form() -> Pivot:
    base = normal_mean_pivot()
    return Pivot(
        pre_data=base.pre_data,
        invert=base.invert,
        direction=base.direction,
        closed_form=None,
    )


def test_transform_path_agrees_with_closed_form():
    data = DataSummary(3.0, 16, 9.0)
    exact = fiducial_density(normal_mean_pivot(), data)
    approx = fiducial_density(_pivot_without_closed_form(), data)
    assert approx.form == "grid"
    ts = np.linspace(exact.mean - 4 * exact.sd, exact.mean + 4 * exact.sd, 801)
    sup = np.max(np.abs(np.asarray(approx.cdf(ts)) / approx.mass() - exact.cdf(ts)))
    assert sup < 2e-4


def test_transform_path_handles_increasing_pivots():
    # Pivot (mu - xbar) / se is increasing in mu; the inversion must flip
    # the cdf orientation relative to the decreasing convention.
    data = DataSummary(-1.0, 9, 4.0)

    def invert(value, summary):
        return summary.sample_mean + value * summary.standard_error

    pivot = Pivot(
        pre_data=Density1D.normal(0.0, 1.0),
        invert=invert,
        direction="increasing",
        closed_form=None,
    )
    d = fiducial_density(pivot, data)
    ref = stats.norm.cdf(np.linspace(-3, 1, 301), loc=-1.0, scale=2.0 / 3.0)
    got = np.asarray(d.cdf(np.linspace(-3, 1, 301))) / d.mass()
    assert np.max(np.abs(got - ref)) < 2e-4


def test_declared_direction_mismatch_is_an_error():
    base = normal_mean_pivot()
    wrong = Pivot(
        pre_data=base.pre_data,
        invert=base.invert,
        direction="increasing",
        closed_form=None,
    )
    with pytest.raises(InputError):
        fiducial_density(wrong, DataSummary(0.0, 4, 1.0))


def test_non_monotone_inversion_is_an_error():
    pivot = Pivot(
        pre_data=Density1D.normal(0.0, 1.0),
        invert=lambda value, summary: value**2,
        direction="increasing",
        closed_form=None,
    )
    with pytest.raises(InputError):
        fiducial_density(pivot, DataSummary(0.0, 4, 1.0))


def test_monte_carlo_push_forward_agrees_with_density():
    rng = np.random.default_rng(23)
    data = DataSummary(2.0, 25, 4.0)
    d = fiducial_density(normal_mean_pivot(), data)
    pivots = rng.standard_normal(100000)
    # Decreasing pivot: mu = xbar - z * se.
    mus = data.sample_mean - pivots * data.standard_error
    assert one_sample_ks(mus, d.cdf) < 0.01


def test_region_probability_sides_are_complementary():
    d = Density1D.normal(1.0, 0.25)
    for cut in (0.0, 1.0, 1.7):
        leq = fiducial_region_probability(d, cut, "leq")
        gt = fiducial_region_probability(d, cut, "gt")
        assert abs(leq + gt - 1.0) < 1e-12
        assert abs(leq - stats.norm.cdf(cut, loc=1.0, scale=0.5)) < 1e-14


def test_region_probability_on_grid_density_is_normalized():
    d = Density1D.normal(0.0, 1.0).to_grid(1024)
    mid = fiducial_region_probability(d, 0.0, "leq")
    assert abs(mid - 0.5) < 1e-6


def test_region_probability_rejects_unknown_side():
    d = Density1D.normal(0.0, 1.0)
    with pytest.raises(InputError):
        fiducial_region_probability(d, 0.0, "above")
