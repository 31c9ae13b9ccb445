"""Closed forms, thresholds and the phase classification of the continuum problem."""
import logging
import math

import numpy as np
from scipy.integrate import quad

from core.field import BoundaryData
from core.partition import discrete_cubic_coefficients
from utils.rng import make_generator
from variational.continuum import biharmonic_minimiser, critical_lengths, left_segment, zero_count
from variational.phases import MinimiserKind, classify_free, tau_star

log = logging.getLogger(__name__)


def caption_lengths(quick: bool, seed: int, folder) -> dict:
    lengths = {length.branch: length.ell for length in critical_lengths(288.0, 1.0, -12.0)}
    error = max(abs(lengths["l1"] - (math.sqrt(2.0) - 1.0) / 2.0), abs(lengths.get("l2", math.inf) - 0.5))
    return {"passed": error <= 1e-12, "lengths": lengths, "max_abs_error": error}


def closed_form_energy(quick: bool, seed: int, folder) -> dict:
    rng = make_generator(seed, 201)
    worst = 0.0
    for _ in range(1000):
        cubic = biharmonic_minimiser(BoundaryData.dirichlet(*rng.uniform(-5.0, 5.0, size=4)))
        exact, _ = quad(lambda t: 0.5 * cubic.curvature(t) ** 2, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
        worst = max(worst, abs(cubic.energy - exact) / max(1.0, exact))
    return {"passed": worst <= 1e-10, "max_relative_error": worst}


def coefficient_convergence(quick: bool, seed: int, folder) -> dict:
    """Discrete cubic coefficients approach the continuum ones at rate 1/N."""
    rng = make_generator(seed, 202)
    sizes = np.array([10, 100, 1000, 10000])
    slopes = []
    for _ in range(20):
        bc = BoundaryData.dirichlet(*rng.uniform(-3.0, 3.0, size=4))
        cubic = biharmonic_minimiser(bc)
        errors = []
        for N in sizes:
            discrete = discrete_cubic_coefficients(int(N), bc)
            errors.append(max(
                abs(discrete.alpha - cubic.alpha), abs(discrete.k - cubic.k), abs(discrete.c - cubic.c)
            ))
        slopes.append(float(np.polyfit(np.log(sizes), np.log(errors), 1)[0]))
    return {"passed": max(slopes) <= -0.9, "max_slope": max(slopes)}


def interior_zero(a: float, alpha: float, ell: float) -> int:
    """Zeros in (0, ell) of the explicit cubic after dividing out its double root at ell."""
    segment = left_segment(a, alpha, ell)
    cubic = [segment.c, segment.k, segment.alpha, segment.a]
    quotient, _ = np.polydiv(cubic, [1.0, -2.0 * ell, ell * ell])
    roots = np.roots(quotient)
    return int(sum(1 for root in roots if abs(root.imag) < 1e-12 and 0.0 < root.real < ell))


def zero_count_law(quick: bool, seed: int, folder) -> dict:
    rng = make_generator(seed, 203)
    draws = 2000 if quick else 10000
    mismatches = 0
    tested = 0
    for _ in range(draws):
        a, alpha = rng.uniform(-5.0, 5.0), rng.uniform(-50.0, 50.0)
        ell = rng.uniform(0.01, 1.0)
        if a == 0 or abs(abs(alpha) * ell / abs(a) - 3.0) < 1e-6:
            continue
        tested += 1
        mismatches += int(zero_count(a, alpha, ell) != interior_zero(a, alpha, ell))
    return {"passed": mismatches == 0, "mismatches": mismatches, "tested": tested}


def threshold_values(quick: bool, seed: int, folder) -> dict:
    linear_case = tau_star(0.0, 1.0)
    flat_case = tau_star(1.0, 0.0)
    errors = {"a0_alpha1": abs(linear_case - 8.0), "a1_alpha0": abs(flat_case - 4608.0 / 81.0)}
    return {"passed": max(errors.values()) <= 1e-6, "tau_star": [linear_case, flat_case], "errors": errors}


def brute_force_sigma(a: float, alpha: float, tau: float, grid: np.ndarray) -> float:
    """Smallest rate of h_l over a grid of lengths; the linear profile has rate 0."""
    values = (6.0 * a * a + 6.0 * a * alpha * grid + 2.0 * alpha * alpha * grid ** 2) / grid ** 3 + tau * grid
    return float(values.min()) - tau


def classification_brute_force(quick: bool, seed: int, folder) -> dict:
    rng = make_generator(seed, 204)
    grid = np.linspace(1e-4, 1.0, 10000 if quick else 100000)
    draws = 100 if quick else 1000
    disagreements = []
    skipped = 0
    for _ in range(draws):
        a, alpha, tau = rng.uniform(-2.0, 2.0), rng.uniform(-20.0, 20.0), rng.uniform(0.0, 500.0)
        report = classify_free(a, alpha, tau)
        segment_sigma = brute_force_sigma(a, alpha, tau, grid)
        # Within this margin of a tie the grid cannot tell the phases apart.
        if abs(segment_sigma) < 1e-3:
            skipped += 1
            continue
        brute = min(0.0, segment_sigma)
        gap = brute - report.sigma_min
        brute_kind = MinimiserKind.LINEAR if brute == 0.0 else MinimiserKind.H_LEFT
        kinds = {d.kind for d in report.minimisers}
        scale = max(1.0, abs(brute))
        if gap < -1e-9 * scale or gap > 1e-3 * scale or brute_kind not in kinds:
            disagreements.append({"a": a, "alpha": alpha, "tau": tau, "brute": brute, "sigma_min": report.sigma_min})
    return {"passed": not disagreements, "disagreements": disagreements[:10], "skipped": skipped, "draws": draws}


CHECKS = [
    caption_lengths,
    closed_form_energy,
    coefficient_convergence,
    zero_count_law,
    threshold_values,
    classification_brute_force,
]
