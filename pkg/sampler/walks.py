"""Integrated Gaussian random walks and the bridge map onto the zero-boundary field."""
import logging
from typing import Sequence

import numpy as np

from core.field import LatticeField
from utils.errors import DomainError

log = logging.getLogger(__name__)


def integrated_rw_paths(N: int, a: float, alpha: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Batch of integrated walks, one per row, laid out like LatticeField values.

    Row entries are Z at -1..N+1 with ``Z_{-1} = a N^2 - alpha N``, ``Z_0 = a N^2``,
    velocities ``Y_n = alpha N + X_1 + ... + X_n`` and ``Z_n = Z_0 + Y_1 + ... + Y_n``.
    """
    if N < 2:
        raise DomainError(f"integrated walks need N >= 2, got N={N}")
    if size < 1:
        raise DomainError(f"batch size must be positive, got {size}")

    increments = rng.standard_normal((size, N + 1))
    velocities = alpha * N + np.cumsum(increments, axis=1)
    paths = np.empty((size, N + 3))
    paths[:, 0] = a * N * N - alpha * N
    paths[:, 1] = a * N * N
    paths[:, 2:] = a * N * N + np.cumsum(velocities, axis=1)
    return paths


def sample_integrated_rw(N: int, a: float, alpha: float, rng: np.random.Generator) -> LatticeField:
    """One integrated walk started from the scaled left boundary data."""
    return LatticeField(N, integrated_rw_paths(N, a, alpha, rng, 1)[0])


def bridge_correction(N: int, x, u, v):
    """Cubic ``A_N(x, u, v)`` removed from the walk by the bridge map.

    It vanishes at x = -1 and x = 0, equals u at x = N and u + v at x = N + 1.
    """
    x = np.asarray(x, dtype=float)
    numerator = (
        x ** 3 * (-2.0 * u + v * N)
        + x ** 2 * (3.0 * u * N + v * N - v * N * N)
        + x * ((2.0 + 3.0 * N) * u - N * N * v)
    )
    return numerator / (N * (N + 1.0) * (N + 2.0))


def bridge_map(field: LatticeField) -> LatticeField:
    """Map a zero-started integrated walk onto a walk vanishing at N and N + 1.

    Raises:
        DomainError: The left slots are not zero.
    """
    values = field.values
    if values[0] != 0 or values[1] != 0:
        raise DomainError("the bridge map is defined for walks started from zero boundary data")

    N = field.N
    u = values[N + 1]
    v = values[N + 2] - values[N + 1]
    sites = np.arange(-1, N + 2)
    bridged = values - bridge_correction(N, sites, u, v)
    return LatticeField(N, bridged)


def integrated_rw_covariance(N: int) -> np.ndarray:
    """Covariance of the zero-started walk at sites 1..N+1.

    ``Cov(Z_m, Z_n) = sum_{j <= min(m, n)} (m - j + 1)(n - j + 1)``.
    """
    n = np.arange(1, N + 2)
    weights = np.clip(n[:, None] - n[None, :] + 1, 0, None).astype(float)
    return weights @ weights.T


def bridge_from_conditioning(N: int, sites: Sequence[int]) -> np.ndarray:
    """Covariance at the given sites of the walk conditioned on ``Z_N = Z_{N+1} = 0``.

    Computed by a Schur complement on the walk covariance; the conditional mean is zero.
    """
    sites = [int(site) for site in sites]
    if any(site < 1 or site > N - 1 for site in sites):
        raise DomainError(f"bridge sites must lie in 1..{N - 1}, got {sites}")

    covariance = integrated_rw_covariance(N)
    keep = [site - 1 for site in sites]
    pinned = [N - 1, N]
    cross = covariance[np.ix_(keep, pinned)]
    return covariance[np.ix_(keep, keep)] - cross @ np.linalg.solve(covariance[np.ix_(pinned, pinned)], cross.T)
