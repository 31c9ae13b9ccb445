import logging
import math

import numpy as np

from utils.errors import DomainError

log = logging.getLogger(__name__)

# Chains whose split R-hat exceeds this are flagged as not converged.
RHAT_THRESHOLD = 1.1


def split_rhat(chains) -> float:
    """Split potential scale reduction factor of a scalar trace.

    Args:
        chains: Array of shape (m, n), one row per chain.

    Returns:
        float: 1.0 for identical constant traces, inf when chains are constant at different values.
    """
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    half = chains.shape[1] // 2
    if half < 2:
        raise DomainError(f"split R-hat needs at least 4 samples per chain, got {chains.shape[1]}")

    split = np.concatenate((chains[:, :half], chains[:, half:2 * half]))
    means = split.mean(axis=1)
    within = split.var(axis=1, ddof=1).mean()
    between = half * means.var(ddof=1)
    if within == 0:
        return 1.0 if between == 0 else math.inf

    pooled = (half - 1) / half * within + between / half
    return float(math.sqrt(pooled / within))


def standard_error(values) -> float:
    """Standard error of the mean over independent replicas."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return math.nan
    return float(values.std(ddof=1) / math.sqrt(values.size))
