import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np

from core.field import BoundaryData
from utils.errors import DomainError

log = logging.getLogger(__name__)

# Relative slack used when a parameter sits exactly on the l2 existence threshold.
THRESHOLD_SLACK = 1e-12


@dataclass(frozen=True)
class CubicMinimiser:
    """Cubic ``a + alpha s + k s^2 + c s^3`` in the local variable ``s = t - t0`` on [t0, t1]."""

    a: float
    alpha: float
    k: float
    c: float
    t0: float = 0.0
    t1: float = 1.0

    @classmethod
    def hermite(cls, t0: float, t1: float, h0: float, d0: float, h1: float, d1: float) -> "CubicMinimiser":
        """The unique cubic with value and slope (h0, d0) at t0 and (h1, d1) at t1."""
        length = t1 - t0
        if length <= 0:
            raise DomainError(f"segment [{t0}, {t1}] has no length")
        jump = h1 - h0
        k = (3.0 * jump - (2.0 * d0 + d1) * length) / length ** 2
        c = ((d0 + d1) * length - 2.0 * jump) / length ** 3
        return cls(a=h0, alpha=d0, k=k, c=c, t0=t0, t1=t1)

    @property
    def length(self) -> float:
        return self.t1 - self.t0

    def __call__(self, t):
        s = np.asarray(t, dtype=float) - self.t0
        return self.a + s * (self.alpha + s * (self.k + s * self.c))

    def slope(self, t):
        s = np.asarray(t, dtype=float) - self.t0
        return self.alpha + s * (2.0 * self.k + 3.0 * self.c * s)

    def curvature(self, t):
        s = np.asarray(t, dtype=float) - self.t0
        return 2.0 * self.k + 6.0 * self.c * s

    @property
    def energy(self) -> float:
        """Exact ``(1/2) int (h'')^2`` over the segment."""
        length = self.length
        return 2.0 * self.k ** 2 * length + 6.0 * self.k * self.c * length ** 2 + 6.0 * self.c ** 2 * length ** 3

    def to_dict(self) -> dict:
        return {"a": self.a, "alpha": self.alpha, "k": self.k, "c": self.c, "t0": self.t0, "t1": self.t1}


def biharmonic_minimiser(bc: BoundaryData) -> CubicMinimiser:
    """Unique minimiser of the bi-Laplacian energy for Dirichlet data on [0, 1]."""
    if bc.free_right:
        raise DomainError("the bi-harmonic minimiser needs all four boundary values")
    return CubicMinimiser.hermite(0.0, 1.0, bc.a, bc.alpha, bc.b, bc.beta)


def left_segment(a: float, alpha: float, ell: float) -> CubicMinimiser:
    """Cubic on [0, ell] leaving (a, alpha) and landing flat on zero at ell."""
    return CubicMinimiser.hermite(0.0, ell, a, alpha, 0.0, 0.0)


def right_segment(b: float, beta: float, r: float) -> CubicMinimiser:
    """Cubic on [1 - r, 1] leaving zero flat and reaching (b, beta) at 1."""
    return CubicMinimiser.hermite(1.0 - r, 1.0, 0.0, 0.0, b, beta)


def segment_energy_tau(ell: float, a: float, alpha: float, tau: float) -> float:
    """Energy of the left segment of length ell plus the reward term ``tau * ell``."""
    if ell <= 0:
        raise DomainError(f"segment length must be positive, got {ell}")
    return (6.0 * a * a + 6.0 * a * alpha * ell + 2.0 * alpha * alpha * ell * ell) / ell ** 3 + tau * ell


def segment_energy_derivative(ell: float, a: float, alpha: float, tau: float) -> float:
    """Closed form derivative of segment_energy_tau in ell."""
    s = math.sqrt(tau / 2.0)
    return -(2.0 / ell ** 4) * (3 * a + alpha * ell - s * ell * ell) * (3 * a + alpha * ell + s * ell * ell)


@dataclass(frozen=True)
class CriticalLength:
    ell: float
    branch: str  # "l1" or "l2"

    @property
    def feasible(self) -> bool:
        return self.ell <= 1.0

    def to_dict(self) -> dict:
        return {"ell": self.ell, "branch": self.branch, "feasible": self.feasible}


def normalise(a: float, alpha: float):
    """Reflect h -> -h so the height is non-negative: returns (|a|, sign(a) alpha)."""
    if a < 0:
        return -a, -alpha
    if a == 0:
        return 0.0, abs(alpha)
    return a, alpha


def second_branch_limit(a: float, alpha: float) -> float:
    """Largest tau with a second local minimum, ``alpha^4 / (72 a^2)``; 0 when there is none."""
    height, slope = normalise(a, alpha)
    if height == 0 or slope >= 0:
        return 0.0
    return slope ** 4 / (72.0 * height ** 2)


def critical_lengths(tau: float, a: float, alpha: float) -> List[CriticalLength]:
    """Local minimisers of segment_energy_tau in ell.

    Lengths above 1 are returned as well; ``CriticalLength.feasible`` flags them.

    Args:
        tau (float): Reward, strictly positive.
        a (float): Left height.
        alpha (float): Left slope.

    Returns:
        List[CriticalLength]: l1 first, then l2 when it exists.
    """
    if tau <= 0:
        raise DomainError(f"critical lengths need tau > 0, got {tau}")
    if a == 0 and alpha == 0:
        return []

    height, slope = normalise(a, alpha)
    root = math.sqrt(2.0 * tau)
    spread = math.sqrt(slope * slope + 6.0 * height * root)
    # Rationalised form for slope < 0 avoids cancellation when the height is small.
    first = (slope + spread) / root if slope >= 0 else 6.0 * height / (spread - slope)
    lengths = [CriticalLength(first, "l1")]

    limit = second_branch_limit(a, alpha)
    if limit > 0 and tau <= limit * (1.0 + THRESHOLD_SLACK):
        discriminant = max(slope * slope - 6.0 * height * root, 0.0)
        lengths.append(CriticalLength((abs(slope) + math.sqrt(discriminant)) / root, "l2"))

    log.trace(f"Critical lengths for tau={tau}, a={a}, alpha={alpha}: {lengths}")
    return lengths


def zero_count(a: float, alpha: float, ell: float) -> int:
    """Interior zeros in (0, ell) of the left segment: 1 iff a alpha < 0 and |alpha| ell / |a| > 3."""
    if a == 0:
        return 0
    if ell <= 0:
        raise DomainError(f"segment length must be positive, got {ell}")
    return int(a * alpha < 0 and abs(alpha) * ell / abs(a) > 3.0)
