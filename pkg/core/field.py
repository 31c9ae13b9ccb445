import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

import numpy as np

from utils.errors import DomainError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundaryData:
    """Macroscopic boundary data ``(a, alpha, b, beta)``.

    ``b`` and ``beta`` are both None for a free right boundary.
    """

    a: float
    alpha: float
    b: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        if (self.b is None) != (self.beta is None):
            raise DomainError("b and beta must be given together (Dirichlet) or both omitted (free right)")
        for name in ("a", "alpha", "b", "beta"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise DomainError(f"boundary value {name} must be finite, got {value}")

    @classmethod
    def free(cls, a: float, alpha: float) -> "BoundaryData":
        return cls(float(a), float(alpha))

    @classmethod
    def dirichlet(cls, a: float, alpha: float, b: float, beta: float) -> "BoundaryData":
        return cls(float(a), float(alpha), float(b), float(beta))

    @classmethod
    def zero(cls) -> "BoundaryData":
        return cls(0.0, 0.0, 0.0, 0.0)

    @property
    def free_right(self) -> bool:
        return self.b is None

    @property
    def is_zero(self) -> bool:
        return self.a == 0 and self.alpha == 0 and (self.free_right or (self.b == 0 and self.beta == 0))

    @property
    def is_symmetric(self) -> bool:
        """True for data of the form ``(a, alpha, a, -alpha)``."""
        return not self.free_right and self.b == self.a and self.beta == -self.alpha

    def mirror(self) -> "BoundaryData":
        """Data seen after the reflection t -> 1 - t."""
        if self.free_right:
            raise DomainError("a free right boundary has no mirror image")
        return BoundaryData(self.b, -self.beta, self.a, -self.alpha)

    def right_as_left(self) -> Tuple[float, float]:
        """Right data written as left data ``(b, -beta)`` of the mirrored problem."""
        if self.free_right:
            raise DomainError("a free right boundary has no right data")
        return self.b, -self.beta

    def left_slots(self, N: int) -> Tuple[float, float]:
        """Microscopic values at sites -1 and 0."""
        return self.a * N * N - self.alpha * N, self.a * N * N

    def right_slots(self, N: int) -> Tuple[float, float]:
        """Microscopic values at sites N and N + 1 (Dirichlet only)."""
        if self.free_right:
            raise DomainError("a free right boundary has no fixed right slots")
        return self.b * N * N, self.b * N * N + self.beta * N

    def to_dict(self) -> dict:
        return {"a": self.a, "alpha": self.alpha, "b": self.b, "beta": self.beta}


@dataclass(frozen=True)
class PinningSet:
    """Sorted set of sites pinned to zero."""

    sites: Tuple[int, ...] = ()

    def __post_init__(self):
        sites = tuple(int(site) for site in self.sites)
        if any(later <= earlier for earlier, later in zip(sites, sites[1:])):
            raise DomainError(f"pinning sites must be strictly increasing, got {sites}")
        if sites and sites[0] < 1:
            raise DomainError(f"pinning sites start at 1, got {sites[0]}")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def of(cls, sites: Iterable[int]) -> "PinningSet":
        return cls(tuple(sorted(set(int(site) for site in sites))))

    @classmethod
    def from_mask(cls, mask: int) -> "PinningSet":
        """Pins from a bit mask where bit ``s - 1`` marks site ``s``."""
        return cls(tuple(bit + 1 for bit in range(mask.bit_length()) if mask >> bit & 1))

    def validate(self, N: int, free_right: bool = False) -> "PinningSet":
        """Check the sites lie in 1..N-1 (1..N+1 with a free right boundary)."""
        upper = N + 1 if free_right else N - 1
        if self.sites and self.sites[-1] > upper:
            raise DomainError(f"pinning site {self.sites[-1]} outside 1..{upper} for N={N}")
        return self

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __contains__(self, site) -> bool:
        return site in self.sites

    def union(self, sites: Iterable[int]) -> "PinningSet":
        return PinningSet.of(set(self.sites) | set(sites))


def as_pins(pins) -> PinningSet:
    """Accept a PinningSet, any iterable of sites, or None."""
    if pins is None:
        return PinningSet()
    if isinstance(pins, PinningSet):
        return pins
    return PinningSet.of(pins)


def variable_sites(N: int, free_right: bool = False) -> np.ndarray:
    """Sites integrated in the Gibbs measure: 1..N-1, or 1..N+1 when the right end is free."""
    return np.arange(1, N + 2 if free_right else N, dtype=np.int64)


class LatticeField:
    """A microscopic configuration indexed -1, 0, ..., N, N + 1.

    Index with site numbers: ``field[-1]`` is the left slope slot, not the last entry.
    """

    __slots__ = ("N", "_values")

    def __init__(self, N: int, values):
        values = np.array(values, dtype=float)
        if values.shape != (N + 3,):
            raise DomainError(f"a field with N={N} needs {N + 3} values, got shape {values.shape}")
        if not (np.isfinite(values[:2]).all() and np.isfinite(values[-2:]).all()):
            raise DomainError("boundary slots must hold finite values")
        values.setflags(write=False)
        self.N = int(N)
        self._values = values

    @classmethod
    def from_boundary(cls, N: int, bc: BoundaryData, interior=None) -> "LatticeField":
        """Build a field from boundary data and optional values for the variable sites."""
        values = np.zeros(N + 3)
        values[0], values[1] = bc.left_slots(N)
        if not bc.free_right:
            values[N + 1], values[N + 2] = bc.right_slots(N)
        if interior is not None:
            sites = variable_sites(N, bc.free_right)
            values[sites + 1] = interior
        return cls(N, values)

    @property
    def values(self) -> np.ndarray:
        """Read-only array, position ``k + 1`` holds site ``k``."""
        return self._values

    def __getitem__(self, site):
        if isinstance(site, slice):
            raise TypeError("slice the values array instead")
        if site < -1 or site > self.N + 1:
            raise IndexError(f"site {site} outside -1..{self.N + 1}")
        return self._values[site + 1]

    def sites(self, first: int, last: int) -> np.ndarray:
        """Values of sites first..last inclusive."""
        return self._values[first + 1:last + 2]

    def with_values(self, values) -> "LatticeField":
        return LatticeField(self.N, values)

    def laplacians(self) -> np.ndarray:
        """Discrete Laplacians at sites 0..N."""
        return np.diff(self._values, 2)

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticeField) and self.N == other.N and np.array_equal(self._values, other._values)

    def __repr__(self) -> str:
        return f"LatticeField(N={self.N}, values={self._values!r})"


@dataclass(frozen=True)
class MacroProfile:
    """Macroscopic profile sampled at the grid points k/N, k = 0..N.

    ``left_ext`` and ``right_ext`` hold the values at -1/N and 1 + 1/N which carry
    the boundary slopes. ``contacts`` is the exact number of pinned atoms when the
    profile comes from a chain.
    """

    N: int
    values: np.ndarray
    left_ext: Optional[float] = None
    right_ext: Optional[float] = None
    free_right: bool = False
    contacts: Optional[int] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.N + 1,):
            raise DomainError(f"a profile with N={self.N} needs {self.N + 1} grid values, got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.N + 1) / self.N

    @property
    def has_extension(self) -> bool:
        return self.left_ext is not None and self.right_ext is not None

    def extended_values(self) -> np.ndarray:
        """Values at -1/N, 0, ..., 1, 1 + 1/N."""
        if not self.has_extension:
            raise DomainError("profile carries no extension slots at -1/N and 1 + 1/N")
        return np.concatenate(([self.left_ext], self.values, [self.right_ext]))

    def __call__(self, t):
        """Linear interpolation between grid points."""
        return np.interp(t, self.grid, self.values)

    def sup_distance(self, other: "MacroProfile") -> float:
        """Sup norm distance; both profiles are piecewise linear on the same grid."""
        if other.N != self.N:
            raise DomainError(f"profiles live on different grids: N={self.N} and N={other.N}")
        return float(np.max(np.abs(self.values - other.values)))
