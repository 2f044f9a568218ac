"""Chains over conditional sets: determinism, laws, compatibility."""

import numpy as np
import pytest
from scipy import stats

from ioi.density import Density1D
from ioi.exceptions import ChainAborted, InputError, UndefinedRatio
from ioi.fiducial import DataSummary
from ioi.gibbs import (
    ConditionalSet,
    ConditionalSpec,
    ScanOrder,
    bivariate_normal_mean_family,
    build_conditional_set,
    canonical_compatible_set,
    canonical_incompatible_set,
    check_compatibility,
    default_burn_in,
    gibbs_run,
    scan_sensitivity,
    two_sample_ks,
)
from ioi.bayes import NormalPrior

from tests.helpers import power_iteration_invariant


def test_scan_order_validation():
    ScanOrder.fixed_sweep([0, 1])
    ScanOrder.fixed_sweep([1, 0, 2])
    with pytest.raises(InputError):
        ScanOrder.fixed_sweep([0, 2])
    with pytest.raises(InputError):
        ScanOrder.fixed_sweep([0, 0])
    with pytest.raises(InputError):
        ScanOrder(kind="random_scan")


def test_scan_order_serialization_uses_one_based_labels():
    sweep = ScanOrder.fixed_sweep([1, 0])
    assert sweep.as_dict() == {"kind": "fixed_sweep", "order": [2, 1]}
    assert ScanOrder.from_dict(sweep.as_dict()) == sweep
    random = ScanOrder.random_scan(5)
    assert ScanOrder.from_dict(random.as_dict()) == random
    assert sweep.label() == "sweep(2,1)"
    assert random.label() == "random(seed=5)"


def test_conditional_set_needs_two_coordinates_and_known_tags():
    kernel = lambda others: Density1D.normal(0.0, 1.0)
    with pytest.raises(InputError):
        ConditionalSet(kernels=(kernel,), method_tags=("other",))
    with pytest.raises(InputError):
        ConditionalSet(kernels=(kernel, kernel), method_tags=("other", "magic"))
    cs = ConditionalSet(kernels=(kernel, kernel), method_tags=("other", "other"))
    assert cs.k == 2


def test_default_burn_in_policy():
    assert default_burn_in(50000) == 2500
    assert default_burn_in(4000) == 1000
    assert default_burn_in(100) == 99


def test_chain_is_seed_deterministic():
    cs = canonical_compatible_set()
    scan = ScanOrder.fixed_sweep([0, 1])
    a = gibbs_run(cs, scan, [0.0, 0.0], 300, seed=12)
    b = gibbs_run(cs, scan, [0.0, 0.0], 300, seed=12)
    c = gibbs_run(cs, scan, [0.0, 0.0], 300, seed=13)
    assert np.array_equal(a.draws, b.draws)
    assert not np.array_equal(a.draws, c.draws)


def test_random_scan_order_comes_from_its_own_seed():
    cs = canonical_compatible_set()
    a = gibbs_run(cs, ScanOrder.random_scan(1), [0.0, 0.0], 200, seed=5)
    b = gibbs_run(cs, ScanOrder.random_scan(1), [0.0, 0.0], 200, seed=5)
    c = gibbs_run(cs, ScanOrder.random_scan(2), [0.0, 0.0], 200, seed=5)
    assert np.array_equal(a.draws, b.draws)
    assert not np.array_equal(a.draws, c.draws)


def test_chain_result_shapes_and_burn_in_slice():
    cs = canonical_compatible_set()
    chain = gibbs_run(cs, ScanOrder.fixed_sweep([0, 1]), [0.0, 0.0], 500, burn_in=100, seed=0)
    assert chain.draws.shape == (500, 2)
    assert chain.draws_post_burn_in.shape == (400, 2)
    with pytest.raises(ValueError):
        chain.draws[0, 0] = 1.0


def test_burn_in_must_leave_draws():
    cs = canonical_compatible_set()
    with pytest.raises(InputError):
        gibbs_run(cs, ScanOrder.fixed_sweep([0, 1]), [0.0, 0.0], 100, burn_in=100, seed=0)


def test_scan_length_must_match_coordinates():
    cs = canonical_compatible_set()
    with pytest.raises(InputError):
        gibbs_run(cs, ScanOrder.fixed_sweep([0, 1, 2]), [0.0, 0.0], 100, seed=0)
    with pytest.raises(InputError):
        gibbs_run(cs, ScanOrder.fixed_sweep([0, 1]), [0.0, 0.0, 0.0], 100, seed=0)


def test_kernel_failure_aborts_with_location():
    calls = {"count": 0}

    def flaky(others):
        calls["count"] += 1
        if calls["count"] > 7:
            raise ValueError("synthetic failure")
        return Density1D.normal(0.0, 1.0)

    ok = lambda others: Density1D.normal(0.0, 1.0)
    cs = ConditionalSet(kernels=(flaky, ok), method_tags=("other", "other"))
    with pytest.raises(ChainAborted) as info:
        gibbs_run(cs, ScanOrder.fixed_sweep([0, 1]), [0.0, 0.0], 100, seed=0)
    assert info.value.iteration == 7
    assert info.value.coordinate == 0


def test_kernel_returning_wrong_type_aborts():
    bad = lambda others: 3.14
    ok = lambda others: Density1D.normal(0.0, 1.0)
    cs = ConditionalSet(kernels=(bad, ok), method_tags=("other", "other"))
    with pytest.raises(ChainAborted):
        gibbs_run(cs, ScanOrder.fixed_sweep([0, 1]), [0.0, 0.0], 10, seed=0)


def test_two_sample_ks_matches_scipy():
    rng = np.random.default_rng(2)
    a = rng.standard_normal(400)
    b = rng.standard_normal(500) + 0.3
    ours = two_sample_ks(a, b)
    ref = stats.ks_2samp(a, b, method="asymp").statistic
    assert abs(ours - ref) < 1e-12


def test_compatible_chain_reaches_the_joint_normal_law():
    # Conditionals of the standard bivariate normal with correlation 0.7;
    # the chain's invariant law is that joint, so moments must land inside
    # a generous Monte Carlo band.
    chain = gibbs_run(
        canonical_compatible_set(0.7),
        ScanOrder.fixed_sweep([0, 1]),
        [0.0, 0.0],
        60000,
        seed=8,
    )
    kept = chain.draws_post_burn_in
    assert np.max(np.abs(kept.mean(axis=0))) < 0.05
    assert np.max(np.abs(kept.var(axis=0) - 1.0)) < 0.07
    corr = np.corrcoef(kept.T)[0, 1]
    assert abs(corr - 0.7) < 0.03


def test_incompatible_chain_matches_analytic_sweep_variances():
    # For the mismatched pair updated as (1 then 2), the linear recursion
    # has a stationary law with variances 8/3 and 5/3; the reversed sweep
    # gives the same marginals with a different joint.
    chain = gibbs_run(
        canonical_incompatible_set(),
        ScanOrder.fixed_sweep([0, 1]),
        [0.0, 0.0],
        60000,
        seed=8,
    )
    kept = chain.draws_post_burn_in
    assert abs(kept.var(axis=0)[0] - 8.0 / 3.0) < 0.15
    assert abs(kept.var(axis=0)[1] - 5.0 / 3.0) < 0.1


def test_scan_sensitivity_matrix_shape_and_symmetry():
    scans = [
        ScanOrder.fixed_sweep([0, 1]),
        ScanOrder.fixed_sweep([1, 0]),
        ScanOrder.random_scan(3),
    ]
    out = scan_sensitivity(canonical_compatible_set(), scans, 4000, seed=1)
    ks = out.ks_matrix
    assert ks.shape == (3, 3)
    assert np.array_equal(ks, ks.T)
    assert np.all(np.diag(ks) == 0.0)
    assert np.all(ks >= 0.0)
    payload = out.as_dict()
    assert len(payload["scans"]) == 3
    assert payload["max_ks"] == float(np.max(ks))


def test_scan_sensitivity_needs_two_scans():
    with pytest.raises(InputError):
        scan_sensitivity(canonical_compatible_set(), [ScanOrder.fixed_sweep([0, 1])], 100, seed=0)


def test_difference_projection_separates_the_incompatible_joints():
    # Marginals cannot distinguish the two sweep orders of a two-coordinate
    # chain, but the law of theta1 - theta2 can, and does here.
    scans = [ScanOrder.fixed_sweep([0, 1]), ScanOrder.fixed_sweep([1, 0])]
    out = scan_sensitivity(canonical_incompatible_set(), scans, 40000, seed=6)
    assert out.max_ks < 0.03
    assert float(np.max(out.difference_matrix)) > 0.03


def test_compatibility_verdict_for_the_correlated_normal_pair():
    result = check_compatibility(canonical_compatible_set(0.7), ((-4, 4), (-4, 4)))
    assert result.status == "compatible"
    assert result.residual < 1e-6
    assert result.joint is not None


def test_reconstructed_joint_matches_the_bivariate_normal():
    result = check_compatibility(
        canonical_compatible_set(0.7), ((-4, 4), (-4, 4)), grid_points=121
    )
    t1 = result.theta1_nodes
    t2 = result.theta2_nodes
    cov = np.array([[1.0, 0.7], [0.7, 1.0]])
    ref = stats.multivariate_normal(mean=[0.0, 0.0], cov=cov).pdf(
        np.dstack(np.meshgrid(t1, t2, indexing="ij"))
    )
    ref /= ref.sum() * (t1[1] - t1[0]) * (t2[1] - t2[0])
    got = result.joint / (result.joint.sum() * (t1[1] - t1[0]) * (t2[1] - t2[0]))
    assert np.max(np.abs(got - ref)) < 1e-4


def test_compatibility_verdict_for_the_mismatched_pair():
    result = check_compatibility(canonical_incompatible_set(), ((-4, 4), (-4, 4)))
    assert result.status == "incompatible"
    assert result.residual > 0.05
    assert result.joint is None


def test_compatibility_requires_two_coordinates():
    kernel = lambda others: Density1D.normal(0.0, 1.0)
    cs = ConditionalSet(
        kernels=(kernel, kernel, kernel), method_tags=("other", "other", "other")
    )
    with pytest.raises(InputError):
        check_compatibility(cs, ((-1, 1), (-1, 1)))


def test_vanishing_conditional_line_is_undefined():
    narrow = Density1D.grid(10.0, 11.0, np.ones(64))
    cs = ConditionalSet(
        kernels=(lambda others: narrow, lambda others: Density1D.normal(0.0, 1.0)),
        method_tags=("other", "other"),
    )
    with pytest.raises(UndefinedRatio):
        check_compatibility(cs, ((-4, 4), (-4, 4)))


def test_build_conditional_set_probes_gates_up_front():
    make1, make2 = bivariate_normal_mean_family((0.0, 0.0), (1.0, 1.0), 0.5, 1)
    specs = (
        ConditionalSpec(method="fiducial", make_summary=make1, prior_knowledge="substantive"),
        ConditionalSpec(method="fiducial", make_summary=make2),
    )
    with pytest.raises(Exception) as info:
        build_conditional_set(specs, probe=(0.0, 0.0))
    assert "refused" in str(info.value)


def test_build_conditional_set_mixes_methods():
    make1, make2 = bivariate_normal_mean_family((0.0, 0.0), (1.0, 1.0), 0.5, 1)
    specs = (
        ConditionalSpec(method="fiducial", make_summary=make1),
        ConditionalSpec(method="bayes", make_summary=make2, prior=NormalPrior(0.0, 1e6)),
    )
    cs = build_conditional_set(specs, probe=(0.0, 0.0))
    assert cs.method_tags == ("fiducial", "bayes")
    chain = gibbs_run(cs, ScanOrder.fixed_sweep([0, 1]), [0.0, 0.0], 2000, seed=3)
    assert chain.draws.shape == (2000, 2)


def test_bayes_conditional_needs_a_prior():
    make1, _ = bivariate_normal_mean_family((0.0, 0.0), (1.0, 1.0), 0.5, 1)
    with pytest.raises(InputError):
        ConditionalSpec(method="bayes", make_summary=make1)


def test_family_conditionals_are_the_bivariate_normal_ones():
    make1, make2 = bivariate_normal_mean_family((1.0, -1.0), (4.0, 9.0), 0.6, 4)
    s1 = make1(np.array([0.5]))
    # Conditional of coordinate 1 given theta2 = 0.5 for the joint with
    # means (1, -1), variances (4, 9) / n and correlation 0.6.
    assert abs(s1.sample_mean - (1.0 + 0.6 * (2.0 / 3.0) * 1.5)) < 1e-12
    assert abs(s1.sigma2 / s1.n - (1.0 - 0.36) * 4.0 / 4) < 1e-12
    s2 = make2(np.array([2.0]))
    assert abs(s2.sample_mean - (-1.0 + 0.6 * 1.5 * 1.0)) < 1e-12


def test_power_iteration_oracle_agrees_with_the_sampler():
    # Independent linear-algebra oracle for the incompatible pair's
    # invariant law under the (1 then 2) sweep: variances 8/3 and 5/3.
    t = np.linspace(-8, 8, 101)
    m1, m2, _ = power_iteration_invariant(1.0, 1.0, 0.5, 1.0, "12")
    v1 = float(m1 @ t**2 - (m1 @ t) ** 2)
    v2 = float(m2 @ t**2 - (m2 @ t) ** 2)
    assert abs(v1 - 8.0 / 3.0) < 0.01
    assert abs(v2 - 5.0 / 3.0) < 0.01
