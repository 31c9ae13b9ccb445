"""Discrete and continuum energies, Legendre conjugates and rate evaluation."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from core.field import BoundaryData, MacroProfile
from utils.errors import DomainError
from variational.continuum import biharmonic_minimiser
from variational.phases import MinimiserDescriptor

log = logging.getLogger(__name__)

CONJUGATE_GRID = (-50.0, 50.0)
CONJUGATE_POINTS = 2001


def rescaled_energy(h: MacroProfile) -> float:
    """``E_N(h) = (1/2) sum_{j=0}^{N} N^3 (h((j+1)/N) + h((j-1)/N) - 2 h(j/N))^2``.

    Raises:
        DomainError: The profile has no values at -1/N and 1 + 1/N.
    """
    curvature = np.diff(h.extended_values(), 2)
    return 0.5 * h.N ** 3 * float(np.dot(curvature, curvature))


@dataclass(frozen=True)
class SmoothProfile:
    """A twice differentiable test profile defined on a neighbourhood of [0, 1]."""

    name: str
    function: Callable
    second_derivative: Callable
    free_right: bool = False

    @property
    def energy(self) -> float:
        """Continuum energy ``(1/2) int_0^1 h''(t)^2 dt`` by adaptive quadrature."""
        value, _ = quad(lambda t: 0.5 * self.second_derivative(t) ** 2, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
        return value

    def discretise(self, N: int) -> MacroProfile:
        """Exact samples at k/N, k = -1..N+1."""
        t = np.arange(-1, N + 2) / N
        values = np.asarray(self.function(t), dtype=float)
        return MacroProfile(N, values[1:-1], left_ext=values[0], right_ext=values[-1], free_right=self.free_right)


def cubic_profile(bc: BoundaryData) -> SmoothProfile:
    cubic = biharmonic_minimiser(bc)
    return SmoothProfile(f"cubic{bc.a, bc.alpha, bc.b, bc.beta}", cubic, cubic.curvature)


def standard_profiles() -> List[SmoothProfile]:
    """Smooth test profiles whose curvature does not vanish at both ends."""
    cubics = [
        BoundaryData.dirichlet(0.0, 0.0, 1.0, 0.0),
        BoundaryData.dirichlet(1.0, 0.0, 0.0, 0.0),
        BoundaryData.dirichlet(1.0, -2.0, 1.0, 2.0),
        BoundaryData.dirichlet(0.0, 1.0, 0.0, -1.0),
        BoundaryData.dirichlet(2.0, -1.0, 0.5, 3.0),
    ]
    return [cubic_profile(bc) for bc in cubics] + [
        SmoothProfile("square", lambda t: t ** 2, lambda t: 2.0 + 0.0 * t),
        SmoothProfile("cubic-plus-line", lambda t: t ** 3 + t, lambda t: 6.0 * t),
        SmoothProfile("exponential", np.exp, np.exp),
        SmoothProfile("cosine", np.cos, lambda t: -np.cos(t)),
        SmoothProfile("quartic", lambda t: t ** 4 - t, lambda t: 12.0 * t ** 2),
        SmoothProfile(
            "square-with-ripple",
            lambda t: 1.0 + t ** 2 + 0.2 * np.sin(3.0 * t),
            lambda t: 2.0 - 1.8 * np.sin(3.0 * t),
        ),
    ]


@dataclass
class GammaReport:
    """``E_N`` of the discretised profile against the continuum energy."""

    name: str
    energy: float
    sizes: List[int]
    discrete: List[float]
    slope: float
    lower_bound_ok: bool
    lower_bound_constant: float

    @property
    def errors(self) -> np.ndarray:
        return np.abs(np.array(self.discrete) - self.energy)

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.errors) <= 0))

    def rows(self):
        for N, value, error in zip(self.sizes, self.discrete, self.errors):
            yield self.name, N, value, self.energy, error

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "energy": self.energy,
            "sizes": self.sizes,
            "discrete": self.discrete,
            "errors": self.errors.tolist(),
            "slope": self.slope,
            "monotone": self.monotone,
            "lower_bound_ok": self.lower_bound_ok,
            "lower_bound_constant": self.lower_bound_constant,
        }


def gamma_convergence_check(h: SmoothProfile, N_list: Sequence[int]) -> GammaReport:
    """Tabulate ``E_N`` along N_list and fit the log-log slope of ``|E_N - E|``.

    The lower-bound flag checks ``E - E_N <= C / N`` with ``C = 1 + N_min |E_{N_min} - E|``.
    """
    sizes = sorted(int(N) for N in N_list)
    if not sizes or sizes[0] < 2:
        raise DomainError(f"N_list needs sizes >= 2, got {list(N_list)}")

    energy = h.energy
    discrete = [rescaled_energy(h.discretise(N)) for N in sizes]
    errors = np.abs(np.array(discrete) - energy)

    positive = errors > 0
    if positive.sum() >= 2:
        slope = float(np.polyfit(np.log(np.array(sizes)[positive]), np.log(errors[positive]), 1)[0])
    else:
        slope = math.nan

    constant = 1.0 + sizes[0] * errors[0]
    lower_bound_ok = all(energy - value <= constant / N for N, value in zip(sizes, discrete))
    log.debug(f"Gamma check {h.name}: E={energy:.6g}, slope={slope:.3f}")
    return GammaReport(h.name, energy, sizes, discrete, slope, lower_bound_ok, constant)


def gaussian_conjugate(x):
    return 0.5 * np.square(x)


def numeric_conjugate(log_mgf: Callable, grid=CONJUGATE_GRID, points: int = CONJUGATE_POINTS) -> Callable:
    """Legendre conjugate ``sup_l (l x - log_mgf(l))`` evaluated numerically.

    The supremum is located on a grid of l values and refined with a bounded
    scalar minimisation on the neighbouring cells.

    Raises:
        DomainError: The supremum sits on the grid edge or is not finite.
    """
    lambdas = np.linspace(grid[0], grid[1], points)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.asarray([log_mgf(value) for value in lambdas], dtype=float)

    def conjugate_point(x: float) -> float:
        objective = x * lambdas - values
        objective = np.where(np.isfinite(objective), objective, -np.inf)
        best = int(np.argmax(objective))
        if best in (0, points - 1) or not math.isfinite(objective[best]):
            raise DomainError(f"the conjugate at x={x} is not attained inside {grid}")

        result = minimize_scalar(
            lambda value: log_mgf(value) - x * value,
            bounds=(lambdas[best - 1], lambdas[best + 1]),
            method="bounded",
            options={"xatol": 1e-12},
        )
        refined = -float(result.fun)
        if not math.isfinite(refined):
            raise DomainError(f"the conjugate at x={x} is not finite")
        return max(refined, float(objective[best]))

    def conjugate(x):
        x = np.asarray(x, dtype=float)
        return np.vectorize(conjugate_point, otypes=[float])(x)

    return conjugate


def mogulskii_rate(h: MacroProfile, conjugate: Optional[Callable] = None, log_mgf: Optional[Callable] = None) -> float:
    """``int_0^1 conjugate(h''(t)) dt`` from second differences, trapezoid weights.

    The default conjugate is the Gaussian ``x^2 / 2``. A general increment law is
    only supported for a free right boundary.
    """
    if conjugate is None and log_mgf is not None:
        conjugate = numeric_conjugate(log_mgf)
    if conjugate is not None and conjugate is not gaussian_conjugate and not h.free_right:
        raise DomainError("rates for non-Gaussian increments are only available with a free right boundary")
    conjugate = conjugate or gaussian_conjugate

    curvature = h.N ** 2 * np.diff(h.extended_values(), 2)
    values = np.asarray(conjugate(curvature), dtype=float)
    if not np.isfinite(values).all():
        raise DomainError("the conjugate is not finite on the curvature range of the profile")

    weights = np.full(h.N + 1, 1.0 / h.N)
    weights[[0, -1]] *= 0.5
    return float(weights @ values)


@dataclass
class RateEvaluation:
    subject: Union[MacroProfile, MinimiserDescriptor] = field(repr=False)
    energy: float
    zero_measure: float
    sigma: float
    tau_used: float

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "zero_measure": self.zero_measure,
            "sigma": self.sigma,
            "tau_used": self.tau_used,
        }


def evaluate_rate(subject: Union[MacroProfile, MinimiserDescriptor], tau: float) -> RateEvaluation:
    """Energy minus ``tau`` times the zero-set measure.

    Sampled profiles use the exact atom count ``contacts / N`` as zero measure; a
    profile without an atom count has zero measure 0.
    """
    if isinstance(subject, MinimiserDescriptor):
        energy, zero_measure = subject.energy, subject.zero_measure
    elif isinstance(subject, MacroProfile):
        energy = rescaled_energy(subject)
        zero_measure = 0.0 if subject.contacts is None else subject.contacts / subject.N
    else:
        raise DomainError(f"cannot evaluate a rate for {type(subject).__name__}")
    return RateEvaluation(subject, energy, zero_measure, energy - tau * zero_measure, tau)
