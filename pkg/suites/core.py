"""Exact Gaussian identities of the finite-N model."""
import logging
import math

import numpy as np

from core.field import BoundaryData, PinningSet
from core.partition import (
    correction_map,
    discrete_cubic_coefficients,
    discrete_minimiser,
    field_variance,
    log_partition_split,
    log_partition_zero,
)
from core.precision import dense_precision, log_det_closed_form, precision_matrix
from utils.rng import make_generator

log = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


def random_pins(rng: np.random.Generator, N: int, density: float = None) -> PinningSet:
    density = rng.uniform(0.05, 0.5) if density is None else density
    return PinningSet.of(site for site in range(1, N) if rng.random() < density)


def determinant_identity(quick: bool, seed: int, folder) -> dict:
    errors = []
    for N in range(2, 501):
        banded = precision_matrix(N).log_det()
        closed = log_det_closed_form(N)
        errors.append(abs(banded - closed) / abs(closed))
    det_three = math.exp(precision_matrix(3).log_det())
    worst = max(errors)
    return {"passed": worst <= 1e-9 and abs(det_three - 20.0) <= 1e-9, "max_relative_error": worst, "det_N3": det_three}


def dense_oracle(quick: bool, seed: int, folder) -> dict:
    rng = make_generator(seed, 101)
    worst = 0.0
    for _ in range(50 if quick else 300):
        N = int(rng.integers(2, 65))
        free_right = bool(rng.random() < 0.3)
        pins = random_pins(rng, N)
        _, dense_log_det = np.linalg.slogdet(dense_precision(N, pins, free_right))
        worst = max(worst, abs(precision_matrix(N, pins, free_right).log_det() - dense_log_det))
    return {"passed": worst <= 1e-8, "max_abs_error": worst}


def variance_bound(quick: bool, seed: int, folder) -> dict:
    rng = make_generator(seed, 102)
    worst = 0.0
    trials = 200 if quick else 1000
    for _ in range(trials):
        N = int(rng.integers(4, 65))
        pins = random_pins(rng, N)
        free = [site for site in range(1, N) if site not in pins]
        if not free:
            continue
        k = int(rng.choice(free))
        worst = max(worst, field_variance(N, pins, k) / N ** 3)
    return {"passed": worst <= 1.0, "max_variance_over_N3": worst, "trials": trials}


def correction_inequality(quick: bool, seed: int, folder) -> dict:
    rng = make_generator(seed, 103)
    worst = -math.inf
    trials = 200 if quick else 1000
    for _ in range(trials):
        N = int(rng.integers(4, 65))
        pins = random_pins(rng, N)
        if not pins.sites:
            pins = PinningSet.of([int(rng.integers(1, N))])
        gap = log_partition_zero(N, pins) - math.log(2.0 * math.pi * N) - log_partition_zero(N, correction_map(pins, N))
        worst = max(worst, gap)
    return {"passed": worst <= 1e-9, "max_log_gap": worst, "trials": trials}


def split_factorization(quick: bool, seed: int, folder) -> dict:
    rng = make_generator(seed, 104)
    worst = 0.0
    trials = 200 if quick else 1000
    for _ in range(trials):
        N = int(rng.integers(4, 65))
        p = int(rng.integers(1, N - 1))
        pins = random_pins(rng, N).union([p, p + 1])
        worst = max(worst, abs(log_partition_zero(N, pins) - log_partition_split(N, pins, p)))
    return {"passed": worst <= 1e-9, "max_abs_error": worst, "trials": trials}


def free_right_partition(quick: bool, seed: int, folder) -> dict:
    errors = [abs(log_partition_zero(N, None, True) - 0.5 * (N + 1) * LOG_2PI) for N in range(2, 200)]
    return {"passed": max(errors) <= 1e-8, "max_abs_error": max(errors)}


def discrete_coefficients(quick: bool, seed: int, folder) -> dict:
    """The closed-form cubic reproduces the solved minimiser on the lattice."""
    rng = make_generator(seed, 105)
    worst = 0.0
    for _ in range(20 if quick else 100):
        bc = BoundaryData.dirichlet(*rng.uniform(-3.0, 3.0, size=4))
        N = int(rng.integers(4, 200))
        solved = discrete_minimiser(N, bc).values
        cubic = discrete_cubic_coefficients(N, bc)
        expected = N * N * cubic(np.arange(-1, N + 2) / N)
        worst = max(worst, float(np.max(np.abs(solved - expected))) / (N * N))
    return {"passed": worst <= 1e-8, "max_scaled_error": worst}


CHECKS = [
    determinant_identity,
    dense_oracle,
    variance_bound,
    correction_inequality,
    split_factorization,
    free_right_partition,
    discrete_coefficients,
]
