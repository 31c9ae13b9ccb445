"""Phase classification of rate-function minimisers.

All operations take the reward ``tau`` directly. A candidate's rate is its
bi-Laplacian energy minus ``tau`` times the length of its zero stretch.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from core.field import BoundaryData, MacroProfile
from utils.errors import ConvergenceError, DomainError, NoSignChangeError
from variational.continuum import (
    CubicMinimiser,
    biharmonic_minimiser,
    critical_lengths,
    left_segment,
    normalise,
    right_segment,
    second_branch_limit,
    segment_energy_tau,
)

log = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-9
BISECTION_STEPS = 200


class MinimiserKind(str, Enum):
    BIHARMONIC = "biharmonic"
    H_LEFT = "h_left"
    H_BOTH = "h_both"
    LINEAR = "linear"


@dataclass(frozen=True)
class MinimiserDescriptor:
    """Symbolic continuum candidate: a list of cubic pieces, zero elsewhere on [0, 1]."""

    kind: MinimiserKind
    segments: Tuple[CubicMinimiser, ...]
    bc: BoundaryData
    energy: float
    zero_measure: float
    ell: Optional[float] = None
    r: Optional[float] = None
    branches: Tuple[str, ...] = ()

    @classmethod
    def linear(cls, a: float, alpha: float) -> "MinimiserDescriptor":
        segment = CubicMinimiser(a=a, alpha=alpha, k=0.0, c=0.0)
        zero = 1.0 if a == 0 and alpha == 0 else 0.0
        return cls(MinimiserKind.LINEAR, (segment,), BoundaryData.free(a, alpha), 0.0, zero)

    @classmethod
    def biharmonic(cls, bc: BoundaryData) -> "MinimiserDescriptor":
        segment = biharmonic_minimiser(bc)
        zero = 1.0 if bc.is_zero else 0.0
        return cls(MinimiserKind.BIHARMONIC, (segment,), bc, segment.energy, zero)

    @classmethod
    def h_left(cls, bc: BoundaryData, ell: float, branch: str = "l1") -> "MinimiserDescriptor":
        if not 0 < ell <= 1:
            raise DomainError(f"h_left needs 0 < ell <= 1, got {ell}")
        segment = left_segment(bc.a, bc.alpha, ell)
        return cls(MinimiserKind.H_LEFT, (segment,), bc, segment.energy, 1.0 - ell, ell=ell, branches=(branch,))

    @classmethod
    def h_both(cls, bc: BoundaryData, ell: float, r: float, branches=("l1", "l1")) -> "MinimiserDescriptor":
        if bc.free_right:
            raise DomainError("h_both needs Dirichlet data")
        if ell < 0 or r < 0 or ell + r > 1.0 + 1e-12:
            raise DomainError(f"h_both needs ell, r >= 0 and ell + r <= 1, got ell={ell}, r={r}")
        segments = []
        if ell > 0:
            segments.append(left_segment(bc.a, bc.alpha, ell))
        if r > 0:
            segments.append(right_segment(bc.b, bc.beta, r))
        energy = sum(segment.energy for segment in segments)
        zero = max(1.0 - ell - r, 0.0)
        return cls(MinimiserKind.H_BOTH, tuple(segments), bc, energy, zero, ell=ell, r=r, branches=tuple(branches))

    @property
    def label(self) -> str:
        if not self.branches:
            return self.kind.value
        return f"{self.kind.value}[{','.join(self.branches)}]"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        values = np.zeros_like(t)
        for segment in self.segments:
            inside = (t >= segment.t0) & (t <= segment.t1)
            values = np.where(inside, segment(t), values)
        return values

    def slope(self, t):
        t = np.asarray(t, dtype=float)
        values = np.zeros_like(t)
        for segment in self.segments:
            inside = (t >= segment.t0) & (t <= segment.t1)
            values = np.where(inside, segment.slope(t), values)
        return values

    def mirror(self) -> "MinimiserDescriptor":
        """Same candidate seen through t -> 1 - t (Dirichlet only)."""
        bc = self.bc.mirror()
        if self.kind is MinimiserKind.BIHARMONIC:
            return MinimiserDescriptor.biharmonic(bc)
        if self.kind is MinimiserKind.H_BOTH:
            return MinimiserDescriptor.h_both(bc, self.r, self.ell, tuple(reversed(self.branches)))
        raise DomainError(f"{self.kind.value} candidates have no mirror image")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "label": self.label,
            "ell": self.ell,
            "r": self.r,
            "branches": list(self.branches),
            "energy": self.energy,
            "zero_measure": self.zero_measure,
            "segments": [segment.to_dict() for segment in self.segments],
        }


def sigma_free(d: MinimiserDescriptor, tau: float) -> float:
    """Rate of a candidate: energy minus tau times the measure of its zero set."""
    return d.energy - tau * d.zero_measure


# The Dirichlet rate has the same form.
sigma = sigma_free


@dataclass
class PhaseReport:
    """Classified minimiser set for one boundary datum and one tau."""

    minimisers: List[MinimiserDescriptor]
    regime: str
    degenerate: bool
    sigma_min: float
    tau: float
    bc: BoundaryData
    candidates: List[Tuple[MinimiserDescriptor, float]] = field(default_factory=list)
    infeasible: List[dict] = field(default_factory=list)
    thresholds: dict = field(default_factory=dict)
    window: Optional[str] = None

    @property
    def phase(self) -> str:
        """Signature of the minimiser set, used to locate phase boundaries."""
        return "+".join(sorted(d.label for d in self.minimisers))

    def to_dict(self) -> dict:
        return {
            "bc": self.bc.to_dict(),
            "tau": self.tau,
            "regime": self.regime,
            "window": self.window,
            "phase": self.phase,
            "degenerate": self.degenerate,
            "sigma_min": self.sigma_min,
            "minimisers": [d.to_dict() for d in self.minimisers],
            "candidates": [{**d.to_dict(), "sigma": value} for d, value in self.candidates],
            "infeasible": self.infeasible,
            "thresholds": self.thresholds,
        }


def _tie_tolerance(value: float) -> float:
    return TIE_TOLERANCE * max(1.0, abs(value))


def _select(candidates):
    """Every candidate within the tie tolerance of the smallest rate."""
    best = min(value for _, value in candidates)
    tolerance = _tie_tolerance(best)
    minimisers = [d for d, value in candidates if value - best <= tolerance]
    return minimisers, best, len(minimisers) > 1


def _bisect_decreasing(function, lo: float, hi: float, tolerance: float) -> float:
    """Root of a decreasing function with function(lo) >= 0 >= function(hi)."""
    for _ in range(BISECTION_STEPS):
        if hi - lo <= tolerance:
            break
        mid = 0.5 * (lo + hi)
        if function(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _branch_length(tau: float, a: float, alpha: float, branch: str) -> Optional[float]:
    for length in critical_lengths(tau, a, alpha):
        if length.branch == branch:
            return length.ell
    return None


def delta_tau(tau: float, a: float, alpha: float) -> float:
    """Difference of the segment energies at the two critical lengths."""
    if not a * alpha < 0:
        raise DomainError(f"the second critical length needs a * alpha < 0, got a={a}, alpha={alpha}")
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    first = _branch_length(tau, a, alpha, "l1")
    second = _branch_length(tau, a, alpha, "l2")
    if second is None:
        raise DomainError(f"no second critical length at tau={tau} (limit {second_branch_limit(a, alpha)})")
    return segment_energy_tau(first, a, alpha, tau) - segment_energy_tau(second, a, alpha, tau)


def tau0(a: float, alpha: float) -> float:
    """Unique zero of delta_tau on (0, alpha^4 / (72 a^2)] located by bisection."""
    if not a * alpha < 0:
        raise DomainError(f"tau0 needs a * alpha < 0, got a={a}, alpha={alpha}")
    limit = second_branch_limit(a, alpha)
    lo, hi = limit * 1e-12, limit

    if delta_tau(hi, a, alpha) > 0 or delta_tau(lo, a, alpha) <= 0:
        raise NoSignChangeError(f"delta_tau has no sign change on (0, {limit}] for a={a}, alpha={alpha}")

    root = _bisect_decreasing(lambda tau: delta_tau(tau, a, alpha), lo, hi, 1e-10 * limit)
    log.debug(f"tau0(a={a}, alpha={alpha}) = {root}")
    return root


def _branch_root(a: float, alpha: float, branch: int, cap: float, base: float) -> float:
    """Root in tau of ``E^tau(l_branch) - cap * tau - base`` over the range where l_branch <= cap.

    The function decreases there because its tau derivative is ``l_branch - cap``.
    Returns +inf when the branch never reaches a root.
    """
    height, slope = normalise(a, alpha)
    name = f"l{branch}"

    def excess(tau):
        return segment_energy_tau(_branch_length(tau, a, alpha, name), a, alpha, tau) - cap * tau - base

    if branch == 1:
        onset = 2.0 * (max(slope * cap + 3.0 * height, 0.0) / cap ** 2) ** 2
        lo = onset if onset > 0 else 1e-12
        hi = max(2.0 * lo, 1.0)
        for _ in range(BISECTION_STEPS):
            if excess(hi) <= 0:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise ConvergenceError(f"no root for branch l1 below tau={hi}")
        return _bisect_decreasing(excess, lo, hi, 1e-13 * hi)

    if branch != 2:
        raise DomainError(f"branch must be 1 or 2, got {branch}")
    if height == 0 or slope >= 0:
        return math.inf
    speed = -(slope * cap + 3.0 * height) / cap ** 2
    if speed <= 0 or speed < 3.0 * height / cap ** 2:
        return math.inf
    onset, limit = 2.0 * speed ** 2, second_branch_limit(a, alpha)
    if onset > limit or excess(limit) > 0:
        return math.inf
    if excess(onset) <= 0:
        return onset
    return _bisect_decreasing(excess, onset, limit, 1e-13 * limit)


def tau_star(a: float, alpha: float, branch: int = 1) -> float:
    """Reward at which the h_l candidate on the given branch reaches rate zero (or +inf)."""
    if a == 0 and alpha == 0:
        return 0.0
    return _branch_root(a, alpha, branch, cap=1.0, base=0.0)


def tau_star_symmetric(a: float, alpha: float, branch: int = 1) -> float:
    """Reward at which ``h_{l,l}`` ties with the bi-harmonic minimiser for data (a, alpha, a, -alpha)."""
    if a == 0 and alpha == 0:
        return 0.0
    base = biharmonic_minimiser(BoundaryData.dirichlet(a, alpha, a, -alpha)).energy / 2.0
    return _branch_root(a, alpha, branch, cap=0.5, base=base)


@lru_cache(maxsize=4096)
def phase_thresholds(a: float, alpha: float, symmetric: bool = False) -> dict:
    """Characteristic rewards for left data (a, alpha)."""
    height, slope = normalise(a, alpha)
    star = tau_star_symmetric if symmetric else tau_star
    cap = 0.5 if symmetric else 1.0
    thresholds = {
        "tau_l1_feasible": 2.0 * (max(slope * cap + 3.0 * height, 0.0) / cap ** 2) ** 2,
        "tau_l2_limit": second_branch_limit(a, alpha),
        "tau_star_1": star(a, alpha, 1),
        "tau_star_2": star(a, alpha, 2),
        "tau0": None,
    }
    if a * alpha < 0:
        try:
            thresholds["tau0"] = tau0(a, alpha)
        except NoSignChangeError:
            log.debug(f"No tau0 for a={a}, alpha={alpha}")
    return thresholds


def _regime(a: float, alpha: float, symmetric: bool) -> Tuple[str, dict]:
    prefix = "symmetric-" if symmetric else ""
    if a == 0 and alpha == 0:
        return prefix + "zero-boundary", {}
    thresholds = phase_thresholds(a, alpha, symmetric)
    if not a * alpha < 0:
        return prefix + "single-branch", thresholds
    if thresholds["tau0"] is None:
        return prefix + "no-second-branch", thresholds

    zero, first = thresholds["tau0"], thresholds["tau_star_1"]
    if abs(zero - first) <= _tie_tolerance(first):
        return prefix + "triple-point", thresholds
    if zero > first:
        return prefix + "crossing-branch-first", thresholds
    return prefix + "direct-branch-only", thresholds


def classify_free(a: float, alpha: float, tau: float) -> PhaseReport:
    """Minimiser set for a free right boundary.

    Candidates are the linear continuation and h_l for every feasible critical length.
    """
    if tau < 0:
        raise DomainError(f"tau must be non-negative, got {tau}")
    bc = BoundaryData.free(a, alpha)
    regime, thresholds = _regime(a, alpha, symmetric=False)

    if bc.is_zero:
        zero = MinimiserDescriptor.linear(0.0, 0.0)
        return PhaseReport([zero], regime, False, -tau, tau, bc, [(zero, -tau)], thresholds=thresholds)

    linear = MinimiserDescriptor.linear(a, alpha)
    candidates = [(linear, 0.0)]
    infeasible = []
    if tau > 0:
        for length in critical_lengths(tau, a, alpha):
            if not length.feasible:
                infeasible.append(length.to_dict())
                continue
            d = MinimiserDescriptor.h_left(bc, length.ell, length.branch)
            candidates.append((d, sigma_free(d, tau)))

    minimisers, best, degenerate = _select(candidates)
    log.debug(f"classify_free(a={a}, alpha={alpha}, tau={tau}): {regime}, {[d.label for d in minimisers]}")
    return PhaseReport(minimisers, regime, degenerate, best, tau, bc, candidates, infeasible, thresholds)


def _side_options(height: float, slope: float, tau: float):
    if height == 0 and slope == 0:
        return [(0.0, "flat")]
    return [(length.ell, length.branch) for length in critical_lengths(tau, height, slope)]


def _dirichlet_candidates(bc: BoundaryData, tau: float):
    biharmonic = MinimiserDescriptor.biharmonic(bc)
    candidates = [(biharmonic, sigma(biharmonic, tau))]
    infeasible = []
    if tau == 0:
        return candidates, infeasible

    for ell, left_branch in _side_options(bc.a, bc.alpha, tau):
        for r, right_branch in _side_options(*bc.right_as_left(), tau):
            if ell + r > 1.0:
                infeasible.append({"ell": ell, "r": r, "branches": [left_branch, right_branch]})
                continue
            d = MinimiserDescriptor.h_both(bc, ell, r, (left_branch, right_branch))
            candidates.append((d, sigma(d, tau)))
    return candidates, infeasible


def _zero_dirichlet(bc: BoundaryData, tau: float, regime: str) -> PhaseReport:
    zero = MinimiserDescriptor.biharmonic(bc)
    return PhaseReport([zero], regime, False, -tau, tau, bc, [(zero, -tau)])


def _symmetric_window(a: float, alpha: float, tau: float) -> str:
    """``inner`` when all critical lengths are <= 1/2, ``asymmetric`` when l2 > 1/2 > l1."""
    if tau <= 0:
        return "outer"
    lengths = {length.branch: length.ell for length in critical_lengths(tau, a, alpha)}
    first, second = lengths.get("l1"), lengths.get("l2")
    if first is None:
        return "outer"
    if first <= 0.5 and (second is None or second <= 0.5):
        return "inner"
    if second is not None and 0.5 < second <= 1.0 and first < 0.5:
        return "asymmetric"
    return "outer"


def classify_dirichlet_symmetric(a: float, alpha: float, tau: float) -> PhaseReport:
    """Minimiser set for data (a, alpha, a, -alpha); every comparison is numeric."""
    if tau < 0:
        raise DomainError(f"tau must be non-negative, got {tau}")
    bc = BoundaryData.dirichlet(a, alpha, a, -alpha)
    regime, thresholds = _regime(a, alpha, symmetric=True)
    if bc.is_zero:
        return _zero_dirichlet(bc, tau, regime)

    candidates, infeasible = _dirichlet_candidates(bc, tau)
    minimisers, best, degenerate = _select(candidates)
    window = _symmetric_window(a, alpha, tau)
    log.debug(f"classify_dirichlet_symmetric(a={a}, alpha={alpha}, tau={tau}): {regime}/{window}")
    return PhaseReport(minimisers, regime, degenerate, best, tau, bc, candidates, infeasible, thresholds, window)


def classify_dirichlet(a: float, alpha: float, b: float, beta: float, tau: float) -> PhaseReport:
    """Numeric classification for general Dirichlet data over the bi-harmonic and h_{l,r} family."""
    if tau < 0:
        raise DomainError(f"tau must be non-negative, got {tau}")
    bc = BoundaryData.dirichlet(a, alpha, b, beta)
    if bc.is_zero:
        return _zero_dirichlet(bc, tau, "zero-boundary")

    candidates, infeasible = _dirichlet_candidates(bc, tau)
    minimisers, best, degenerate = _select(candidates)
    return PhaseReport(minimisers, "general-numeric", degenerate, best, tau, bc, candidates, infeasible)


def classify(bc: BoundaryData, tau: float) -> PhaseReport:
    """Dispatch on the boundary type."""
    if bc.free_right:
        return classify_free(bc.a, bc.alpha, tau)
    if bc.is_symmetric:
        return classify_dirichlet_symmetric(bc.a, bc.alpha, tau)
    return classify_dirichlet(bc.a, bc.alpha, bc.b, bc.beta, tau)


def build_profile(d: MinimiserDescriptor, grid: int) -> MacroProfile:
    """Sample a candidate at the M + 1 points k / M, with slope-carrying extension slots."""
    if grid < 2:
        raise DomainError(f"profile grid needs M >= 2, got {grid}")
    t = np.arange(grid + 1) / grid
    values = d(t)
    left_ext = d.bc.a - d.bc.alpha / grid
    if d.bc.free_right:
        right_ext = float(values[-1] + d.slope(1.0) / grid)
    else:
        right_ext = d.bc.b + d.bc.beta / grid
    return MacroProfile(N=grid, values=values, left_ext=left_ext, right_ext=right_ext, free_right=d.bc.free_right)
