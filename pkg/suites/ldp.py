"""Energies, rates and concentration of sampled profiles."""
import logging
import math
from pathlib import Path

import numpy as np

from core.field import BoundaryData, PinningSet
from core.partition import hamiltonian
from ldp.concentration import concentration_experiment
from ldp.rates import SmoothProfile, gamma_convergence_check, mogulskii_rate, numeric_conjugate, rescaled_energy, standard_profiles
from sampler.gibbs import SamplerConfig, ScanOrder, sample_pinned_gaussian
from sampler.profile import empirical_profile
from utils.exports import write_csv
from utils.rng import make_generator
from variational.phases import classify

log = logging.getLogger(__name__)

GAMMA_SIZES = (16, 32, 64, 128, 256)
DELTAS = (0.01, 0.05, 0.1, 0.5)


def scaling_identity(quick: bool, seed: int, folder) -> dict:
    rng = make_generator(seed, 501)
    worst = 0.0
    for _ in range(50 if quick else 500):
        N = int(rng.integers(4, 129))
        bc = BoundaryData.dirichlet(*rng.uniform(-2.0, 2.0, size=4))
        pins = PinningSet.of(site for site in range(1, N) if rng.random() < 0.2)
        field = sample_pinned_gaussian(N, bc, pins, rng)
        energy = hamiltonian(field)
        worst = max(worst, abs(N * rescaled_energy(empirical_profile(field)) - energy) / max(1.0, energy))
    return {"passed": worst <= 1e-9, "max_relative_error": worst}


def gamma_convergence(quick: bool, seed: int, folder) -> dict:
    reports = [gamma_convergence_check(profile, GAMMA_SIZES) for profile in standard_profiles()]
    rows = [row for report in reports for row in report.rows()]
    write_csv(Path(folder, "gamma.csv"), "gamma.v1", rows)
    slopes = {report.name: report.slope for report in reports}
    passed = all(report.slope <= -0.9 and report.lower_bound_ok for report in reports)
    return {"passed": passed, "slopes": slopes}


def conjugate_accuracy(quick: bool, seed: int, folder) -> dict:
    conjugate = numeric_conjugate(lambda value: 0.5 * value * value)
    x = np.linspace(-10.0, 10.0, 41)
    conjugate_error = float(np.max(np.abs(conjugate(x) - 0.5 * x * x)))

    half_square = SmoothProfile("half-square", lambda t: 0.5 * t ** 2, lambda t: 1.0 + 0.0 * t, free_right=True)
    rate = mogulskii_rate(half_square.discretise(64))
    rate_error = abs(rate - 0.5)
    return {
        "passed": conjugate_error <= 1e-6 and rate_error <= 1e-9,
        "conjugate_error": conjugate_error,
        "half_square_rate": rate,
    }


def strictly_decreasing(values) -> bool:
    return all(later < earlier for earlier, later in zip(values, values[1:]))


def concentration(quick: bool, seed: int, folder) -> dict:
    sizes = [32, 64, 128] if quick else [32, 64, 128, 256]
    sweeps, burn_in, thin = (300, 100, 4) if quick else (1200, 200, 10)

    localized = SamplerConfig(
        N=sizes[0], bc=BoundaryData.zero(), eps=1e3, seed=seed,
        sweeps=sweeps, burn_in=burn_in, thin=thin, scan=ScanOrder.CHROMATIC,
    )
    gaussian_bc = BoundaryData.dirichlet(1.0, 0.0, 0.5, 0.0)
    gaussian = SamplerConfig(N=sizes[0], bc=gaussian_bc, eps=0.0, seed=seed, sweeps=2)

    experiments = {
        "localized-zero-boundary": (localized, classify(BoundaryData.zero(), math.log(localized.eps))),
        "gaussian-dirichlet": (gaussian, classify(gaussian_bc, 0.0)),
    }
    rows, medians = [], {}
    for name, (config, report) in experiments.items():
        results = concentration_experiment(config, report, DELTAS, sizes, samples=200 if quick else 500)
        rows += [result.csv_row() for result in results]
        medians[name] = [result.median for result in results]
    write_csv(Path(folder, "concentration.csv"), "concentration.v1", rows)
    return {"passed": all(strictly_decreasing(values) for values in medians.values()), "sizes": sizes, "medians": medians}


CHECKS = [
    scaling_identity,
    gamma_convergence,
    conjugate_accuracy,
    concentration,
]
