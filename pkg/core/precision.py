import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded, solve_banded

from core.field import PinningSet, as_pins, variable_sites
from utils.errors import DomainError, InternalError

log = logging.getLogger(__name__)

# Weights of the discrete Laplacian stencil at offsets -1, 0, +1.
LAPLACIAN_WEIGHTS = (1.0, -2.0, 1.0)
DENSE_ORACLE_LIMIT = 64


@lru_cache(maxsize=64)
def full_hessian_bands(N: int, free_right: bool = False) -> np.ndarray:
    """Lower bands of the Hessian of the Hamiltonian over all variable sites.

    The Hamiltonian sums ``(Delta phi_k)^2 / 2`` over k = 0..N, so the Hessian entry
    for sites i, j is the sum over those k of the stencil weight products. The result
    uses the LAPACK lower layout: row d holds the entries (j + d, j).

    Args:
        N (int): Interior length.
        free_right (bool, optional): Include sites N and N + 1 as variables.

    Returns:
        np.ndarray: Array of shape (3, M) with M = N - 1 or N + 1.
    """
    sites = variable_sites(N, free_right)
    size = len(sites)
    bands = np.zeros((3, size))

    # Accumulate w_i * w_j for every Laplacian touching the pair.
    for k in range(0, N + 1):
        stencil = [(k + offset, weight) for offset, weight in zip((-1, 0, 1), LAPLACIAN_WEIGHTS)]
        stencil = [(site - 1, weight) for site, weight in stencil if 1 <= site <= sites[-1]]
        for i, (row, w_row) in enumerate(stencil):
            for col, w_col in stencil[:i + 1]:
                bands[row - col, col] += w_row * w_col
    # Shared through the cache, so callers must not mutate it.
    bands.setflags(write=False)
    return bands


@dataclass(frozen=True, eq=False)
class BandedPrecision:
    """Symmetric pentadiagonal precision matrix in lower banded storage.

    ``sites`` lists the lattice site of every row so pinned systems keep their geometry.
    """

    bands: np.ndarray
    sites: Tuple[int, ...]

    @property
    def N_free(self) -> int:
        return len(self.sites)

    @property
    def diagonals(self) -> np.ndarray:
        return self.bands

    def _lapack_bands(self) -> np.ndarray:
        # LAPACK wants no more stored subdiagonals than the matrix has.
        return np.ascontiguousarray(self.bands[:min(3, self.N_free)])

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower banded Cholesky factor; failure means the matrix is not positive definite."""
        if self.N_free == 0:
            return np.zeros((1, 0))
        try:
            return cholesky_banded(self._lapack_bands(), lower=True)
        except LinAlgError as error:
            raise InternalError(f"precision matrix over sites {self.sites} is not positive definite") from error

    def log_det(self) -> float:
        """Log determinant from the banded Cholesky factor."""
        if self.N_free == 0:
            return 0.0
        return 2.0 * float(np.sum(np.log(self.cholesky[0])))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``Q x = rhs`` through the cached factor (rhs may hold several columns)."""
        if self.N_free == 0:
            return np.zeros_like(rhs, dtype=float)
        return cho_solve_banded((self.cholesky, True), rhs)

    def sample(self, rng: np.random.Generator, size: int = None) -> np.ndarray:
        """Draw centred Gaussian vectors with covariance ``Q^{-1}``.

        With ``Q = L L^T`` the vector ``L^{-T} z`` has the right covariance for standard z.
        """
        shape = (self.N_free,) if size is None else (self.N_free, size)
        z = rng.standard_normal(shape)
        if self.N_free == 0:
            return z
        factor = self.cholesky
        n_bands = factor.shape[0]
        # Store L^T in upper banded layout for solve_banded.
        upper = np.zeros_like(factor)
        upper[n_bands - 1] = factor[0]
        for d in range(1, n_bands):
            upper[n_bands - 1 - d, d:] = factor[d, :-d]
        draws = solve_banded((0, n_bands - 1), upper, z)
        return draws if size is None else draws.T

    def to_dense(self) -> np.ndarray:
        size = self.N_free
        dense = np.zeros((size, size))
        for d in range(min(3, size)):
            idx = np.arange(size - d)
            dense[idx + d, idx] = self.bands[d, :size - d]
            dense[idx, idx + d] = self.bands[d, :size - d]
        return dense

    def variance(self, position: int) -> float:
        """Diagonal entry of the inverse for a row position."""
        unit = np.zeros(self.N_free)
        unit[position] = 1.0
        return float(self.solve(unit)[position])


def precision_matrix(N: int, pins: PinningSet = None, free_right: bool = False) -> BandedPrecision:
    """Hessian of the Hamiltonian restricted to the unpinned variable sites.

    Pinned rows and columns are deleted. Deleting sites keeps the matrix pentadiagonal
    because the stencil couples sites at distance at most two.

    Args:
        N (int): Interior length, at least 2.
        pins (PinningSet, optional): Sites fixed to zero.
        free_right (bool, optional): Treat sites N and N + 1 as variables.

    Returns:
        BandedPrecision: The reduced system.
    """
    if N < 2:
        raise DomainError(f"precision matrix needs N >= 2, got N={N}")
    pins = as_pins(pins).validate(N, free_right)

    full = full_hessian_bands(N, free_right)
    free = np.array([site for site in variable_sites(N, free_right) if site not in pins], dtype=np.int64)
    size = len(free)
    bands = np.zeros((3, size))
    for d in range(min(3, size)):
        gap = free[d:] - free[:size - d]
        near = gap <= 2
        columns = free[:size - d] - 1
        bands[d, :size - d][near] = full[gap[near], columns[near]]

    log.trace(f"Precision for N={N}, pins={pins.sites}, free_right={free_right}: {size} free sites")
    return BandedPrecision(bands=bands, sites=tuple(int(site) for site in free))


def dense_precision(N: int, pins: PinningSet = None, free_right: bool = False) -> np.ndarray:
    """Dense ``D^T D`` oracle, D the Laplacian matrix restricted to free sites (small N only)."""
    if N > DENSE_ORACLE_LIMIT:
        raise DomainError(f"dense oracle is limited to N <= {DENSE_ORACLE_LIMIT}")
    pins = as_pins(pins).validate(N, free_right)
    free = [site for site in variable_sites(N, free_right) if site not in pins]

    laplacian = np.zeros((N + 1, N + 3))
    for k in range(N + 1):
        laplacian[k, k:k + 3] = LAPLACIAN_WEIGHTS
    restricted = laplacian[:, [site + 1 for site in free]]
    return restricted.T @ restricted


def log_det_closed_form(N: int) -> float:
    """Log of det B_{N-1} = (N + 1)^2 N (N + 2) / 12."""
    if N < 2:
        raise DomainError(f"closed form needs N >= 2, got N={N}")
    return 2.0 * math.log(N + 1) + math.log(N) + math.log(N + 2) - math.log(12.0)
