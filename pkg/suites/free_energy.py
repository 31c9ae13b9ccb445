"""Thermodynamic integration against exact enumeration and the large-strength asymptotics."""
import logging

from core.field import BoundaryData
from free_energy.enumeration import get_enumeration, ratio_exact
from free_energy.integration import ChainBudget, tau_for_size
from sampler.gibbs import ScanOrder, run_batched

log = logging.getLogger(__name__)

ASYMPTOTIC_BAND = (0.85, 1.15)


def budget(quick: bool) -> ChainBudget:
    return ChainBudget().scaled(0.4) if quick else ChainBudget()


def small_system_estimate(quick: bool, seed: int, folder) -> dict:
    N, eps = 12, 2.0
    row = tau_for_size(N, eps, budget(quick), seed)
    exact = ratio_exact(N, eps) / N
    return {"passed": abs(row.tau - exact) <= 2.0 * row.stderr, "estimate": row, "exact": exact}


def pin_density_derivative(quick: bool, seed: int, folder) -> dict:
    """Chain pin density against eps times the derivative of the exact log ratio per site."""
    N, eps, step = 12, 2.0, 1e-4
    derivative = (ratio_exact(N, eps * (1 + step)) - ratio_exact(N, eps * (1 - step))) / (2.0 * step) / N
    sweeps, burn_in = (1500, 300) if quick else (6000, 500)
    trace = run_batched(N, BoundaryData.zero(), [eps], seed, 8, sweeps, burn_in, scan=ScanOrder.CHROMATIC)
    density = float(trace.pin_density(N).mean())
    enumerated = get_enumeration(N).mean_pin_count(eps) / N
    return {
        "passed": abs(density - derivative) <= 1e-2,
        "chain_density": density,
        "finite_difference": derivative,
        "enumerated": enumerated,
    }


def asymptotic_reward(quick: bool, seed: int, folder) -> dict:
    N = 64 if quick else 256
    strengths = (1e3,) if quick else (1e3, 1e4)
    ratios = {}
    for eps in strengths:
        row = tau_for_size(N, eps, budget(quick), seed)
        ratios[eps] = row.tau_over_log_eps
    low, high = ASYMPTOTIC_BAND
    return {"passed": all(low <= value <= high for value in ratios.values()), "N": N, "tau_over_log_eps": ratios}


CHECKS = [
    small_system_estimate,
    pin_density_derivative,
    asymptotic_reward,
]
