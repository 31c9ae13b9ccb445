import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.field import BoundaryData
from utils.errors import DomainError
from variational.phases import (
    MinimiserDescriptor,
    MinimiserKind,
    build_profile,
    classify,
    classify_dirichlet,
    classify_dirichlet_symmetric,
    classify_free,
    delta_tau,
    phase_thresholds,
    sigma_free,
    tau0,
    tau_star,
    tau_star_symmetric,
)

heights = st.one_of(st.just(0.0), st.floats(min_value=0.01, max_value=3.0), st.floats(min_value=-3.0, max_value=-0.01))


def test_tau_star_closed_cases():
    assert tau_star(0.0, 1.0) == pytest.approx(8.0, rel=1e-9)
    assert tau_star(1.0, 0.0) == pytest.approx(4608.0 / 81.0, rel=1e-9)
    assert tau_star(0.0, 0.0) == 0.0


def test_tau_star_is_reflection_invariant():
    assert tau_star(-1.0, 2.0) == pytest.approx(tau_star(1.0, -2.0), rel=1e-12)


@pytest.mark.parametrize("tau, expected", [(4.0, "linear"), (12.0, "h_left[l1]")])
def test_free_boundary_switches_at_tau_star(tau, expected):
    report = classify_free(0.0, 1.0, tau)
    assert report.phase == expected
    assert report.regime == "single-branch"
    assert not report.degenerate


def test_free_boundary_tie_at_tau_star():
    report = classify_free(0.0, 1.0, 8.0)
    assert report.degenerate
    assert report.phase == "h_left[l1]+linear"
    assert report.sigma_min == pytest.approx(0.0, abs=1e-12)
    h_left = next(d for d in report.minimisers if d.kind is MinimiserKind.H_LEFT)
    assert h_left.ell == pytest.approx(0.5)
    assert h_left.zero_measure == pytest.approx(0.5)


def test_free_boundary_without_reward_is_linear():
    report = classify_free(1.0, -2.0, 0.0)
    assert report.phase == "linear"
    assert report.sigma_min == 0.0


def test_zero_boundary_is_flat():
    report = classify(BoundaryData.free(0.0, 0.0), 3.0)
    assert report.regime == "zero-boundary"
    assert report.sigma_min == -3.0
    assert report.minimisers[0].zero_measure == 1.0

    dirichlet = classify(BoundaryData.zero(), 3.0)
    assert dirichlet.sigma_min == -3.0


def test_negative_reward_is_rejected():
    with pytest.raises(DomainError):
        classify(BoundaryData.free(1.0, 0.0), -1.0)
    with pytest.raises(DomainError):
        classify(BoundaryData.dirichlet(1.0, 0.0, 1.0, 0.0), -1.0)


@given(heights, heights, st.floats(min_value=0.0, max_value=500.0))
def test_free_minimum_is_below_every_candidate(a, alpha, tau):
    report = classify_free(a, alpha, tau)
    assert report.minimisers
    assert all(value >= report.sigma_min - 1e-9 * max(1.0, abs(report.sigma_min)) for _, value in report.candidates)
    assert report.sigma_min <= 1e-12


def test_opposite_signs_reach_the_direct_branch_regime():
    report = classify_free(1.0, -12.0, 100.0)
    assert report.regime == "direct-branch-only"
    thresholds = phase_thresholds(1.0, -12.0)
    assert thresholds["tau_l2_limit"] == pytest.approx(288.0)
    assert thresholds["tau0"] is not None
    assert thresholds["tau0"] == pytest.approx(216.0, rel=1e-6)
    assert thresholds["tau_star_1"] == pytest.approx(487.47, rel=1e-4)
    assert thresholds["tau_star_2"] == math.inf
    assert thresholds["tau0"] < thresholds["tau_star_1"]


def test_tau0_is_a_root_of_delta_tau():
    root = tau0(1.0, -12.0)
    assert 0.0 < root <= 288.0
    assert abs(delta_tau(root, 1.0, -12.0)) <= 1e-6 * max(1.0, abs(delta_tau(0.5 * root, 1.0, -12.0)))
    assert delta_tau(0.5 * root, 1.0, -12.0) > 0 > delta_tau(288.0, 1.0, -12.0)


def test_second_branch_at_its_limit():
    report = classify_free(1.0, -12.0, 288.0)
    values = {d.label: value for d, value in report.candidates}
    assert values["h_left[l2]"] == pytest.approx(192.0, rel=1e-9)
    assert delta_tau(288.0, 1.0, -12.0) == pytest.approx(-32.94, abs=5e-3)


def test_flat_left_data_switch_from_linear_to_pinned():
    assert classify_free(1.0, 0.0, 10.0).phase == "linear"
    report = classify_free(1.0, 0.0, 100.0)
    assert report.phase == "h_left[l1]"
    assert report.minimisers[0].ell == pytest.approx(0.6514, abs=1e-4)


def test_symmetric_second_branch_data_keep_the_biharmonic():
    report = classify(BoundaryData.dirichlet(1.0, -12.0, 1.0, 12.0), 288.0)
    assert report.phase == "biharmonic"
    assert not report.degenerate
    assert report.sigma_min == pytest.approx(288.0, rel=1e-9)
    values = {d.label: value for d, value in report.candidates}
    assert values["h_both[l1,l1]"] == pytest.approx(606.116, abs=2e-3)
    assert values["h_both[l2,l2]"] == pytest.approx(672.0, rel=1e-9)


@given(heights, heights)
def test_free_phases_never_return_once_left(a, alpha):
    taus = np.concatenate(([0.0], np.geomspace(0.1, 2e4, 60)))
    phases = [classify_free(a, alpha, float(tau)).phase for tau in taus]
    left = set()
    for previous, current in zip(phases, phases[1:]):
        if current != previous:
            left.add(previous)
            assert current not in left, phases


def test_second_branch_helpers_need_opposite_signs():
    with pytest.raises(DomainError):
        tau0(1.0, 2.0)
    with pytest.raises(DomainError):
        delta_tau(10.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        delta_tau(0.0, 1.0, -12.0)


def test_symmetric_dirichlet_without_reward_is_biharmonic():
    report = classify(BoundaryData.dirichlet(1.0, -1.0, 1.0, 1.0), 0.0)
    assert report.regime.startswith("symmetric-")
    assert report.phase == "biharmonic"
    assert report.window == "outer"


def test_symmetric_dirichlet_with_large_reward_is_pinned_in_the_middle():
    report = classify(BoundaryData.dirichlet(0.0, 1.0, 0.0, -1.0), 1e4)
    assert report.phase == "h_both[l1,l1]"
    d = report.minimisers[0]
    assert d.ell == pytest.approx(d.r)
    assert report.window == "inner"


def test_symmetric_tie_reward_balances_both_candidates():
    tau = tau_star_symmetric(0.0, 1.0)
    report = classify(BoundaryData.dirichlet(0.0, 1.0, 0.0, -1.0), tau)
    values = {d.kind: value for d, value in report.candidates}
    assert values[MinimiserKind.H_BOTH] == pytest.approx(values[MinimiserKind.BIHARMONIC], rel=1e-8, abs=1e-8)


def test_general_dirichlet_is_numeric():
    report = classify(BoundaryData.dirichlet(1.0, 0.0, 0.5, 2.0), 50.0)
    assert report.regime == "general-numeric"
    assert report.window is None
    assert report.sigma_min <= sigma_free(MinimiserDescriptor.biharmonic(report.bc), 50.0)


def test_descriptor_guards():
    bc = BoundaryData.dirichlet(1.0, 0.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        MinimiserDescriptor.h_left(bc, 1.5)
    with pytest.raises(DomainError):
        MinimiserDescriptor.h_both(BoundaryData.free(1.0, 0.0), 0.2, 0.2)
    with pytest.raises(DomainError):
        MinimiserDescriptor.h_both(bc, 0.7, 0.7)
    with pytest.raises(DomainError):
        MinimiserDescriptor.linear(1.0, 0.0).mirror()


def test_mirror_swaps_segments():
    bc = BoundaryData.dirichlet(1.0, -1.0, 2.0, 0.5)
    d = MinimiserDescriptor.h_both(bc, 0.3, 0.2, ("l1", "l2"))
    mirrored = d.mirror()
    assert mirrored.bc == bc.mirror()
    assert (mirrored.ell, mirrored.r) == (0.2, 0.3)
    assert mirrored.branches == ("l2", "l1")
    assert mirrored.energy == pytest.approx(d.energy)
    t = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(mirrored(t), d(1.0 - t), atol=1e-12)


def test_build_profile_carries_boundary_data():
    bc = BoundaryData.dirichlet(1.0, -1.0, 0.5, 2.0)
    profile = build_profile(MinimiserDescriptor.biharmonic(bc), 64)
    assert profile.values[0] == pytest.approx(1.0)
    assert profile.values[-1] == pytest.approx(0.5)
    assert profile.left_ext == pytest.approx(1.0 + 1.0 / 64)
    assert profile.right_ext == pytest.approx(0.5 + 2.0 / 64)
    with pytest.raises(DomainError):
        build_profile(MinimiserDescriptor.biharmonic(bc), 1)


def test_free_profile_extends_with_its_slope():
    profile = build_profile(MinimiserDescriptor.linear(1.0, -0.5), 10)
    assert profile.right_ext == pytest.approx(0.5 - 0.05)
    assert profile.free_right


def test_report_serialises_candidates():
    document = classify_free(0.0, 1.0, 12.0).to_dict()
    assert document["phase"] == "h_left[l1]"
    assert {candidate["kind"] for candidate in document["candidates"]} == {"linear", "h_left"}
    assert math.isfinite(document["sigma_min"])


def test_dispatch_matches_the_direct_classifiers():
    symmetric = classify_dirichlet_symmetric(0.0, 1.0, 1e4)
    assert classify(BoundaryData.dirichlet(0.0, 1.0, 0.0, -1.0), 1e4).phase == symmetric.phase
    general = classify_dirichlet(1.0, 0.0, 0.5, 2.0, 50.0)
    assert general.regime == "general-numeric"
    assert classify(BoundaryData.dirichlet(1.0, 0.0, 0.5, 2.0), 50.0).sigma_min == general.sigma_min
    with pytest.raises(DomainError):
        classify_dirichlet_symmetric(1.0, 0.0, -0.5)
