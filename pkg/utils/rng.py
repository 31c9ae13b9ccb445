import logging

import numpy as np

from utils.errors import DomainError

log = logging.getLogger(__name__)

# Recorded in manifests; Philox streams are stable across numpy releases.
BIT_GENERATOR = "Philox"


def make_generator(seed: int, replica: int = 0) -> np.random.Generator:
    """Return the counter based generator for one (seed, replica) stream.

    Args:
        seed (int): Non-negative 64-bit run seed.
        replica (int, optional): Replica index. Defaults to 0.

    Returns:
        np.random.Generator: Philox generator keyed by both integers.
    """
    if seed < 0 or seed >= 2 ** 64:
        raise DomainError(f"seed must be a 64-bit non-negative integer, got {seed}")
    if replica < 0:
        raise DomainError(f"replica index must be non-negative, got {replica}")

    log.trace(f"Creating {BIT_GENERATOR} stream for seed={seed} replica={replica}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replica])))
