import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.field import PinningSet
from core.precision import dense_precision, full_hessian_bands, log_det_closed_form, precision_matrix
from utils.errors import DomainError


@st.composite
def pinned_systems(draw, max_N=30):
    N = draw(st.integers(min_value=3, max_value=max_N))
    free_right = draw(st.booleans())
    upper = N + 1 if free_right else N - 1
    sites = draw(st.sets(st.integers(min_value=1, max_value=upper), max_size=upper - 1))
    return N, PinningSet.of(sites), free_right


def test_small_hessian_by_hand():
    precision = precision_matrix(3)
    np.testing.assert_array_equal(precision.to_dense(), [[6.0, -4.0], [-4.0, 6.0]])
    assert math.exp(precision.log_det()) == pytest.approx(20.0)


@given(st.integers(min_value=2, max_value=400))
def test_log_det_matches_closed_form(N):
    assert precision_matrix(N).log_det() == pytest.approx(log_det_closed_form(N), rel=1e-10)


def test_free_right_hessian_has_unit_determinant():
    for N in (2, 5, 40):
        assert precision_matrix(N, free_right=True).log_det() == pytest.approx(0.0, abs=1e-9)


@given(pinned_systems())
def test_banded_storage_matches_dense_oracle(system):
    N, pins, free_right = system
    precision = precision_matrix(N, pins, free_right)
    np.testing.assert_allclose(precision.to_dense(), dense_precision(N, pins, free_right), atol=1e-12)


@given(pinned_systems(max_N=20))
def test_log_det_matches_slogdet(system):
    N, pins, free_right = system
    precision = precision_matrix(N, pins, free_right)
    if precision.N_free == 0:
        assert precision.log_det() == 0.0
        return
    sign, value = np.linalg.slogdet(dense_precision(N, pins, free_right))
    assert sign > 0
    assert precision.log_det() == pytest.approx(value, rel=1e-9, abs=1e-9)


def test_solve_and_variance(rng):
    pins = PinningSet.of([3, 4, 9])
    precision = precision_matrix(12, pins)
    dense = precision.to_dense()
    rhs = rng.standard_normal((precision.N_free, 3))
    np.testing.assert_allclose(dense @ precision.solve(rhs), rhs, atol=1e-9)

    inverse = np.linalg.inv(dense)
    for position in range(precision.N_free):
        assert precision.variance(position) == pytest.approx(inverse[position, position], rel=1e-9)


def test_pinned_rows_follow_sites():
    precision = precision_matrix(8, PinningSet.of([2, 5]))
    assert precision.sites == (1, 3, 4, 6, 7)


def test_samples_have_inverse_covariance(rng):
    precision = precision_matrix(5)
    draws = precision.sample(rng, size=50000)
    assert draws.shape == (50000, 4)
    expected = np.linalg.inv(precision.to_dense())
    np.testing.assert_allclose(np.cov(draws, rowvar=False), expected, atol=0.05 * expected.max())


def test_fully_pinned_system_is_empty(rng):
    precision = precision_matrix(3, PinningSet.of([1, 2]))
    assert precision.N_free == 0
    assert precision.log_det() == 0.0
    assert precision.sample(rng).shape == (0,)


def test_hessian_cache_is_read_only():
    with pytest.raises(ValueError):
        full_hessian_bands(6)[0, 0] = 1.0


def test_size_guards():
    with pytest.raises(DomainError):
        precision_matrix(1)
    with pytest.raises(DomainError):
        dense_precision(65)
    with pytest.raises(DomainError):
        log_det_closed_form(1)
