"""Exact pinned partition functions by enumerating every pinning set."""
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable

import numpy as np
from joblib import Parallel, delayed
from scipy.special import logsumexp

from core.field import PinningSet, variable_sites
from core.partition import log_partition_zero
from utils.errors import CapacityError, DomainError

log = logging.getLogger(__name__)

# 2^(N-1) pinning sets for a Dirichlet system.
ENUMERATION_LIMIT = 22
BLOCK_SIZE = 4096


def _log_weights(N: int, free_right: bool, start: int, stop: int) -> np.ndarray:
    """``log Z_P - log Z`` for every mask in [start, stop) without the unpinned offset."""
    return np.array([
        log_partition_zero(N, PinningSet.from_mask(mask), free_right) for mask in range(start, stop)
    ])


class PinEnumeration:
    """All pinning sets of one zero-boundary system with their Gaussian weights.

    Mask bit ``s - 1`` marks site ``s``. The weight of a set P at strength eps is
    ``eps^|P| Z_P / Z``, with Z the unpinned partition function.
    """

    def __init__(self, N: int, free_right: bool = False, workers: int = 1):
        self.N = N
        self.free_right = free_right
        self.workers = workers
        self.sites = variable_sites(N, free_right)
        if N < 2:
            raise DomainError(f"enumeration needs N >= 2, got N={N}")
        if N > ENUMERATION_LIMIT or len(self.sites) > ENUMERATION_LIMIT - 1:
            raise CapacityError(
                f"exact enumeration is limited to {ENUMERATION_LIMIT - 1} variable sites (N={N}); "
                f"use tau_estimate for larger systems"
            )

    @property
    def count(self) -> int:
        return 1 << len(self.sites)

    @cached_property
    def sizes(self) -> np.ndarray:
        masks = np.arange(self.count, dtype=np.int64)
        bits = (masks[:, None] >> np.arange(len(self.sites))) & 1
        return bits.sum(axis=1)

    @cached_property
    def log_weights(self) -> np.ndarray:
        """``log Z_P - log Z_empty`` for every mask."""
        blocks = [(start, min(start + BLOCK_SIZE, self.count)) for start in range(0, self.count, BLOCK_SIZE)]
        log.debug(f"Enumerating {self.count} pinning sets for N={self.N} in {len(blocks)} blocks")
        if self.workers == 1:
            parts = [_log_weights(self.N, self.free_right, start, stop) for start, stop in blocks]
        else:
            parts = Parallel(n_jobs=self.workers)(
                delayed(_log_weights)(self.N, self.free_right, start, stop) for start, stop in blocks
            )
        values = np.concatenate(parts)
        return values - values[0]

    @cached_property
    def log_partition_unpinned(self) -> float:
        return log_partition_zero(self.N, None, self.free_right)

    def _log_terms(self, eps: float) -> np.ndarray:
        if eps < 0 or not math.isfinite(eps):
            raise DomainError(f"eps must be finite and non-negative, got {eps}")
        if eps == 0:
            return np.where(self.sizes == 0, 0.0, -np.inf)
        return self.sizes * math.log(eps) + self.log_weights

    def log_ratio(self, eps: float) -> float:
        """``log Z_eps / Z`` by log-sum-exp over every pinning set."""
        if eps == 0:
            return 0.0
        return float(logsumexp(self._log_terms(eps)))

    def log_partition(self, eps: float) -> float:
        return self.log_ratio(eps) + self.log_partition_unpinned

    def pin_set_distribution(self, eps: float) -> np.ndarray:
        """Probability of every mask under the pinned Gibbs measure."""
        terms = self._log_terms(eps)
        return np.exp(terms - logsumexp(terms))

    def mean_pin_count(self, eps: float) -> float:
        return float(self.pin_set_distribution(eps) @ self.sizes)

    def site_frequencies(self, eps: float) -> np.ndarray:
        """Probability that each variable site is pinned."""
        probabilities = self.pin_set_distribution(eps)
        masks = np.arange(self.count, dtype=np.int64)
        bits = (masks[:, None] >> np.arange(len(self.sites))) & 1
        return probabilities @ bits

    def mean_contact_count(self, eps: float) -> float:
        """Mean number of zeros among sites 1..N, counting a zero right boundary slot."""
        if self.free_right:
            probabilities = self.pin_set_distribution(eps)
            masks = np.arange(self.count, dtype=np.int64)
            inside = (masks[:, None] >> np.arange(self.N)) & 1
            return float(probabilities @ inside.sum(axis=1))
        return self.mean_pin_count(eps) + 1.0

    def log_sum_containing(self, eps: float, required: Iterable[int]) -> float:
        """``log sum_{P containing required} eps^|P| Z_P`` (absolute, not a ratio)."""
        required_mask = 0
        for site in required:
            if site not in self.sites:
                raise DomainError(f"site {site} is not a variable site for N={self.N}")
            required_mask |= 1 << (site - 1)
        masks = np.arange(self.count, dtype=np.int64)
        keep = (masks & required_mask) == required_mask
        return float(logsumexp(self._log_terms(eps)[keep])) + self.log_partition_unpinned


@lru_cache(maxsize=32)
def get_enumeration(N: int, free_right: bool = False) -> PinEnumeration:
    return PinEnumeration(N, free_right)


def ratio_exact(N: int, eps: float) -> float:
    """``log Z_{N,eps}(0) / Z_N(0)`` by exact enumeration (N <= 22)."""
    return get_enumeration(N).log_ratio(eps)


def log_partition_pinned(N: int, eps: float) -> float:
    """``log Z_{N,eps}(0)``; a system without interior sites has partition function 1."""
    if N < 2:
        return 0.0
    return get_enumeration(N).log_partition(eps)


@dataclass
class RatioTable:
    N: int
    eps: np.ndarray
    log_ratios: np.ndarray

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        self.log_ratios = np.asarray(self.log_ratios, dtype=float)
        if self.eps.shape != self.log_ratios.shape:
            raise DomainError("eps grid and log ratios differ in length")

    @classmethod
    def compute(cls, N: int, eps_grid, workers: int = 1) -> "RatioTable":
        enumeration = PinEnumeration(N, workers=workers) if workers > 1 else get_enumeration(N)
        eps_grid = np.asarray(eps_grid, dtype=float)
        return cls(N, eps_grid, np.array([enumeration.log_ratio(eps) for eps in eps_grid]))

    def rows(self):
        """Rows for the free_energy.v1 schema."""
        for eps, value in zip(self.eps, self.log_ratios):
            yield self.N, eps, value, 0.0, "log_ratio", math.nan
