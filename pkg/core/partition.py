import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, solveh_banded

from core.field import BoundaryData, LatticeField, PinningSet, as_pins, variable_sites
from core.precision import precision_matrix
from utils.errors import DomainError, InternalError

log = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


def hamiltonian(field: LatticeField, interval: Tuple[int, int] = None) -> float:
    """Gaussian Laplacian energy ``sum_{k=l+1}^{r-1} (Delta phi_k)^2 / 2``.

    Args:
        field (LatticeField): Configuration on -1..N+1.
        interval (Tuple[int, int], optional): Pair (l, r), defaults to (-1, N + 1).

    Returns:
        float: Non-negative energy.
    """
    left, right = interval if interval is not None else (-1, field.N + 1)
    if left < -1 or right > field.N + 1 or right - left < 2:
        raise DomainError(f"interval ({left}, {right}) is invalid for a field with N={field.N}")

    curvature = np.diff(field.sites(left, right), 2)
    return 0.5 * float(np.dot(curvature, curvature))


def log_partition_zero(N: int, pins: PinningSet = None, free_right: bool = False) -> float:
    """Log partition function with zero boundary and the given sites pinned.

    A fully pinned system is an empty integral with value 1.
    """
    precision = precision_matrix(N, pins, free_right)
    if precision.N_free == 0:
        return 0.0
    return 0.5 * precision.N_free * LOG_2PI - 0.5 * precision.log_det()


def _gradient(values: np.ndarray) -> np.ndarray:
    """Gradient of the Hamiltonian with respect to every slot -1..N+1."""
    curvature = np.diff(values, 2)
    padded = np.concatenate(([0.0, 0.0], curvature, [0.0, 0.0]))
    return np.diff(padded, 2)


def discrete_minimiser(N: int, bc: BoundaryData, pins: PinningSet = None) -> LatticeField:
    """Minimise the Hamiltonian over the unpinned variable sites.

    Pinned sites are eliminated by substituting zeros, so the remaining system is the
    reduced precision applied to the free coordinates with the fixed part moved to the
    right hand side.
    """
    pins = as_pins(pins).validate(N, bc.free_right)
    precision = precision_matrix(N, pins, bc.free_right)

    # Fixed part: boundary slots and pinned zeros, free coordinates set to zero.
    fixed = LatticeField.from_boundary(N, bc).values.copy()
    free = np.array(precision.sites, dtype=np.int64)
    if len(free) == 0:
        return LatticeField(N, fixed)

    rhs = -_gradient(fixed)[free + 1]
    try:
        solution = solveh_banded(precision._lapack_bands(), rhs, lower=True)
    except LinAlgError as error:
        raise InternalError(f"constrained minimiser system is singular for N={N}, pins={pins.sites}") from error

    fixed[free + 1] = solution
    log.trace(f"Minimiser for N={N}, bc={bc}, {len(pins)} pins solved")
    return LatticeField(N, fixed)


def log_partition_bc(N: int, bc: BoundaryData, pins: PinningSet = None) -> float:
    """``log Z_N(r) = log Z_N(0) - H(phi*)`` for the given pins."""
    pins = as_pins(pins)
    minimiser = discrete_minimiser(N, bc, pins)
    return log_partition_zero(N, pins, bc.free_right) - hamiltonian(minimiser)


def field_variance(N: int, pins: PinningSet = None, k: int = 1, free_right: bool = False) -> float:
    """Variance of phi_k under the zero-boundary pinned Gaussian."""
    pins = as_pins(pins)
    if k in pins or k not in variable_sites(N, free_right):
        raise DomainError(f"site {k} is pinned or not a variable site for N={N}")
    precision = precision_matrix(N, pins, free_right)
    return precision.variance(precision.sites.index(k))


@dataclass(frozen=True)
class CubicCoefficients:
    """``h(t) = a + alpha t + k t^2 + c t^3`` with ``phi_k = N^2 h(k / N)``."""

    a: float
    alpha: float
    k: float
    c: float

    def __call__(self, t):
        return self.a + self.alpha * t + self.k * t ** 2 + self.c * t ** 3


def discrete_cubic_coefficients(N: int, bc: BoundaryData) -> CubicCoefficients:
    """Coefficients of the unpinned discrete bi-harmonic minimiser for Dirichlet data."""
    if bc.free_right:
        raise DomainError("discrete cubic coefficients need Dirichlet data")
    a, alpha, b, beta = bc.a, bc.alpha, bc.b, bc.beta
    scale = (N + 1) * (N + 2)
    return CubicCoefficients(
        a=a,
        alpha=(2 * b - a * (2 + 3 * N) + N * (3 * b + alpha * (N + 1) - beta)) / scale,
        k=N * (-alpha + beta + N * (3 * (b - a) - 2 * alpha - beta)) / scale,
        c=N * N * (2 * (a - b) + alpha + beta) / scale,
    )


def _sub_interval_log_partition(N: int, pins) -> float:
    if N < 2:
        return 0.0
    return log_partition_zero(N, PinningSet.of(pins))


def log_partition_split(N: int, pins: PinningSet, p: int) -> float:
    """Sum of the two sub-interval log partition functions across the double zero (p, p + 1).

    The left block is a zero-boundary system of length p, the right block one of length
    N - p - 1 with its pins shifted by p + 1. Blocks without interior sites contribute 0.
    """
    pins = as_pins(pins).validate(N)
    if p not in pins or p + 1 not in pins:
        raise DomainError(f"sites {p} and {p + 1} must both be pinned to split the interval")

    left = [site for site in pins if site < p]
    right = [site - p - 1 for site in pins if site > p + 1]
    return _sub_interval_log_partition(p, left) + _sub_interval_log_partition(N - p - 1, right)


def correction_map(pins: PinningSet, N: int) -> PinningSet:
    """Add the neighbours p_min + 1 and p_max - 1, kept inside 1..N-1."""
    pins = as_pins(pins).validate(N)
    if not pins.sites:
        raise DomainError("correction map needs a non-empty pinning set")
    extra = [site for site in (pins.sites[0] + 1, pins.sites[-1] - 1) if 1 <= site <= N - 1]
    return pins.union(extra)
