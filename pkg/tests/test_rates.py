import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.field import BoundaryData, MacroProfile, PinningSet
from core.partition import hamiltonian
from ldp.rates import (
    SmoothProfile,
    cubic_profile,
    evaluate_rate,
    gamma_convergence_check,
    gaussian_conjugate,
    mogulskii_rate,
    numeric_conjugate,
    rescaled_energy,
    standard_profiles,
)
from sampler.gibbs import sample_pinned_gaussian
from sampler.profile import empirical_profile
from utils.errors import DomainError
from utils.rng import make_generator
from variational.phases import MinimiserDescriptor, classify_free

SQUARE = SmoothProfile("square", lambda t: t ** 2, lambda t: 2.0 + 0.0 * t)


@pytest.mark.parametrize("N", [4, 10, 256])
def test_square_energy_has_a_one_over_N_excess(N):
    assert rescaled_energy(SQUARE.discretise(N)) == pytest.approx(2.0 + 2.0 / N, rel=1e-8)
    assert SQUARE.energy == pytest.approx(2.0, rel=1e-12)


@given(st.integers(min_value=3, max_value=80), st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_rescaled_energy_is_the_hamiltonian_over_N(N, seed):
    rng = make_generator(seed)
    bc = BoundaryData.dirichlet(*rng.uniform(-2.0, 2.0, size=4))
    pins = PinningSet.of(site for site in range(1, N) if rng.random() < 0.2)
    field = sample_pinned_gaussian(N, bc, pins, rng)
    energy = hamiltonian(field)
    assert N * rescaled_energy(empirical_profile(field)) == pytest.approx(energy, rel=1e-9, abs=1e-9)


def test_rescaled_energy_needs_extension_slots():
    with pytest.raises(DomainError):
        rescaled_energy(MacroProfile(4, np.zeros(5)))


def test_discretised_cubic_energy_approaches_the_continuum():
    profile = cubic_profile(BoundaryData.dirichlet(1.0, 0.0, 0.0, 0.0))
    energy = profile.energy
    assert energy == pytest.approx(6.0, rel=1e-10)
    assert rescaled_energy(profile.discretise(1024)) == pytest.approx(energy, rel=2e-2)


def test_gamma_reports_first_order_convergence():
    report = gamma_convergence_check(SQUARE, [16, 64, 32, 128])
    assert report.sizes == [16, 32, 64, 128]
    assert report.slope == pytest.approx(-1.0, abs=1e-6)
    assert report.monotone
    assert report.lower_bound_ok
    assert len(list(report.rows())) == 4
    with pytest.raises(DomainError):
        gamma_convergence_check(SQUARE, [1, 8])


def test_standard_profiles_converge():
    for profile in standard_profiles():
        report = gamma_convergence_check(profile, [16, 32, 64, 128, 256])
        assert report.slope <= -0.9, profile.name
        assert report.lower_bound_ok, profile.name


def test_numeric_conjugate_of_gaussians():
    x = np.linspace(-8.0, 8.0, 17)
    standard = numeric_conjugate(lambda value: 0.5 * value * value)
    np.testing.assert_allclose(standard(x), gaussian_conjugate(x), atol=1e-6)
    wide = numeric_conjugate(lambda value: 2.0 * value * value)
    np.testing.assert_allclose(wide(x), x * x / 8.0, atol=1e-6)


def test_numeric_conjugate_outside_the_grid():
    conjugate = numeric_conjugate(lambda value: value)
    with pytest.raises(DomainError):
        conjugate(2.0)


def test_rate_of_a_constant_curvature_profile():
    half_square = SmoothProfile("half-square", lambda t: 0.5 * t ** 2, lambda t: 1.0 + 0.0 * t, free_right=True)
    assert mogulskii_rate(half_square.discretise(64)) == pytest.approx(0.5, abs=1e-9)
    general = mogulskii_rate(half_square.discretise(64), log_mgf=lambda value: 0.5 * value * value)
    assert general == pytest.approx(0.5, abs=1e-6)


def test_general_increments_need_a_free_right_end():
    profile = SQUARE.discretise(16)
    with pytest.raises(DomainError):
        mogulskii_rate(profile, conjugate=lambda x: np.abs(x))


def test_evaluate_rate_for_candidates_and_samples():
    report = classify_free(0.0, 1.0, 12.0)
    d = report.minimisers[0]
    evaluation = evaluate_rate(d, 12.0)
    assert evaluation.sigma == pytest.approx(report.sigma_min)
    assert evaluation.to_dict()["tau_used"] == 12.0

    profile = SQUARE.discretise(10)
    assert evaluate_rate(profile, 5.0).zero_measure == 0.0
    counted = MacroProfile(10, profile.values, profile.left_ext, profile.right_ext, contacts=5)
    evaluation = evaluate_rate(counted, 5.0)
    assert evaluation.zero_measure == 0.5
    assert evaluation.sigma == pytest.approx(evaluation.energy - 2.5)
    with pytest.raises(DomainError):
        evaluate_rate("profile", 1.0)


def test_linear_candidate_has_no_energy():
    assert evaluate_rate(MinimiserDescriptor.linear(1.0, 2.0), 3.0).sigma == 0.0
    assert math.isclose(evaluate_rate(MinimiserDescriptor.linear(0.0, 0.0), 3.0).sigma, -3.0)
