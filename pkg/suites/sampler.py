"""Exactness of the samplers against enumeration and Gaussian conditioning."""
import logging

import numpy as np

from core.field import BoundaryData, PinningSet
from core.partition import discrete_minimiser
from free_energy.enumeration import PinEnumeration
from sampler.gibbs import HeatBath, ScanOrder, initial_rows, sample_pinned_gaussian
from sampler.walks import bridge_correction, bridge_from_conditioning, bridge_map, integrated_rw_paths, sample_integrated_rw
from utils.rng import make_generator

log = logging.getLogger(__name__)

TV_STRENGTHS = (0.5, 2.0, 10.0)


def pin_set_histogram(
    N: int,
    eps: float,
    chains: int,
    sweeps: int,
    burn_in: int,
    seed: int,
    scan: ScanOrder = ScanOrder.CHROMATIC,
    free_right: bool = False,
) -> np.ndarray:
    """Empirical pin-set frequencies over many short chains, indexed like PinEnumeration masks."""
    bc = BoundaryData.free(0.0, 0.0) if free_right else BoundaryData.zero()
    rng = make_generator(seed)
    kernel = HeatBath(N, free_right, np.full(chains, eps), scan)
    phi, pinned = initial_rows(N, bc, "auto", np.full(chains, eps))
    bits = 1 << np.arange(pinned.shape[1])
    counts = np.zeros(1 << pinned.shape[1])
    for sweep in range(1, sweeps + 1):
        kernel.sweep(phi, pinned, [rng])
        if sweep > burn_in:
            counts += np.bincount(pinned.astype(np.int64) @ bits, minlength=counts.size)
    return counts / counts.sum()


def total_variation(empirical: np.ndarray, exact: np.ndarray) -> float:
    return 0.5 * float(np.abs(empirical - exact).sum())


def enumeration_distance(quick: bool, seed: int, folder) -> dict:
    N = 6 if quick else 8
    chains, sweeps, burn_in = (1000, 120, 20) if quick else (4000, 300, 50)
    limit = 0.03 if quick else 0.02
    enumeration = PinEnumeration(N)
    distances = {}
    for index, eps in enumerate(TV_STRENGTHS):
        empirical = pin_set_histogram(N, eps, chains, sweeps, burn_in, seed + index)
        distances[eps] = total_variation(empirical, enumeration.pin_set_distribution(eps))
    return {"passed": max(distances.values()) <= limit, "N": N, "total_variation": distances, "limit": limit}


def bridge_endpoints(quick: bool, seed: int, folder) -> dict:
    rng = make_generator(seed, 301)
    worst = 0.0
    for N in (8, 64, 256):
        for _ in range(20):
            bridged = bridge_map(sample_integrated_rw(N, 0.0, 0.0, rng))
            scale = max(1.0, float(np.max(np.abs(bridged.values))))
            worst = max(worst, abs(bridged[N]) / scale, abs(bridged[N + 1]) / scale)
    return {"passed": worst <= 1e-10, "max_relative_endpoint": worst}


def bridge_moments(quick: bool, seed: int, folder) -> dict:
    """Moments of mapped walks at N/4 and N/2 against the conditioned Gaussian."""
    N = 64
    draws = 20000 if quick else 100000
    sites = [N // 4, N // 2]
    paths = integrated_rw_paths(N, 0.0, 0.0, make_generator(seed, 302), draws)
    u = paths[:, N + 1:N + 2]
    v = paths[:, N + 2:N + 3] - u
    bridged = paths - bridge_correction(N, np.arange(-1, N + 2)[None, :], u, v)
    values = bridged[:, [site + 1 for site in sites]]

    covariance = bridge_from_conditioning(N, sites)
    scores = []
    for i in range(len(sites)):
        column = values[:, i]
        scores.append(abs(column.mean()) / (column.std(ddof=1) / np.sqrt(draws)))
        for j in range(i, len(sites)):
            product = column * values[:, j]
            scores.append(abs(product.mean() - covariance[i, j]) / (product.std(ddof=1) / np.sqrt(draws)))
    return {"passed": max(scores) <= 4.0, "max_standard_scores": max(scores), "draws": draws}


def pinned_mean(quick: bool, seed: int, folder) -> dict:
    N = 32
    bc = BoundaryData.dirichlet(1.0, -2.0, 0.5, 1.0)
    pins = PinningSet.of([8, 9, 20])
    draws = 20000 if quick else 100000
    samples = sample_pinned_gaussian(N, bc, pins, make_generator(seed, 303), size=draws)
    mean = discrete_minimiser(N, bc, pins).values
    free = [site + 1 for site in range(1, N) if site not in pins]
    errors = np.abs(samples[:, free].mean(axis=0) - mean[free])
    scores = errors / (samples[:, free].std(axis=0, ddof=1) / np.sqrt(draws))
    pinned_zero = bool(np.all(samples[:, [site + 1 for site in pins]] == 0.0))
    return {"passed": float(scores.max()) <= 4.5 and pinned_zero, "max_standard_score": float(scores.max())}


CHECKS = [
    enumeration_distance,
    bridge_endpoints,
    bridge_moments,
    pinned_mean,
]
