"""Exact pinned Gaussian draws and the heat-bath chain for the pinning Gibbs measure.

Chains are stored row-wise: ``phi`` has shape (B, N + 3) with the LatticeField
layout and ``pinned`` has shape (B, M) over the M variable sites. Every row is an
independent chain with its own pinning strength.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from core.field import BoundaryData, LatticeField, MacroProfile, PinningSet, as_pins, variable_sites
from core.partition import discrete_minimiser
from core.precision import LAPLACIAN_WEIGHTS, full_hessian_bands, precision_matrix
from sampler.profile import contact_number, empirical_profile
from utils.errors import DomainError
from utils.rng import make_generator

log = logging.getLogger(__name__)

INITIAL_STATES = ("minimiser", "pinned", "gaussian", "auto")


class ScanOrder(str, Enum):
    FORWARD_BACKWARD = "forward-backward"
    RANDOM = "random"
    CHROMATIC = "chromatic"


def sample_pinned_gaussian(N: int, bc: BoundaryData, pins=None, rng: np.random.Generator = None, size: int = None):
    """Exact draw from the Gaussian with the given sites pinned to zero.

    The draw is the constrained minimiser plus a centred fluctuation with the
    pinned precision. With ``size`` the result is an array of shape (size, N + 3)
    instead of a LatticeField.
    """
    if rng is None:
        raise DomainError("sample_pinned_gaussian needs a generator")
    pins = as_pins(pins)
    mean = discrete_minimiser(N, bc, pins).values
    precision = precision_matrix(N, pins, bc.free_right)
    columns = np.array(precision.sites, dtype=np.int64) + 1

    if size is None:
        values = mean.copy()
        values[columns] += precision.sample(rng)
        return LatticeField(N, values)

    draws = np.tile(mean, (size, 1))
    draws[:, columns] += precision.sample(rng, size)
    return draws


@dataclass(frozen=True)
class SamplerConfig:
    N: int
    bc: BoundaryData
    eps: float
    seed: int
    sweeps: int
    burn_in: int = 0
    thin: int = 1
    scan: ScanOrder = ScanOrder.FORWARD_BACKWARD
    replica: int = 0
    init: str = "auto"

    def __post_init__(self):
        if self.N < 2:
            raise DomainError(f"N must be at least 2, got {self.N}")
        if not (math.isfinite(self.eps) and self.eps >= 0):
            raise DomainError(f"eps must be finite and non-negative, got {self.eps}")
        if not self.sweeps > self.burn_in >= 0:
            raise DomainError(f"need sweeps > burn_in >= 0, got sweeps={self.sweeps}, burn_in={self.burn_in}")
        if self.thin < 1:
            raise DomainError(f"thin must be at least 1, got {self.thin}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit non-negative integer, got {self.seed}")
        if self.init not in INITIAL_STATES:
            raise DomainError(f"init must be one of {INITIAL_STATES}, got {self.init!r}")
        object.__setattr__(self, "scan", ScanOrder(self.scan))

    def with_replica(self, replica: int) -> "SamplerConfig":
        return SamplerConfig(
            self.N, self.bc, self.eps, self.seed, self.sweeps, self.burn_in, self.thin, self.scan, replica, self.init
        )

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "bc": self.bc.to_dict(),
            "eps": self.eps,
            "seed": self.seed,
            "sweeps": self.sweeps,
            "burn_in": self.burn_in,
            "thin": self.thin,
            "scan": self.scan.value,
            "replica": self.replica,
            "init": self.init,
        }


@dataclass(frozen=True)
class ChainState:
    """A configuration together with the atom selection that produced its zeros."""

    field: LatticeField
    pins: PinningSet
    free_right: bool = False

    def __post_init__(self):
        self.pins.validate(self.field.N, self.free_right)
        if any(self.field[site] != 0 for site in self.pins):
            raise DomainError("every pinned site must hold exactly zero")

    @classmethod
    def from_arrays(cls, N: int, phi: np.ndarray, pinned: np.ndarray, free_right: bool) -> "ChainState":
        sites = variable_sites(N, free_right)[pinned]
        return cls(LatticeField(N, phi), PinningSet(tuple(int(site) for site in sites)), free_right)

    def pinned_mask(self) -> np.ndarray:
        mask = np.zeros(len(variable_sites(self.field.N, self.free_right)), dtype=bool)
        mask[[site - 1 for site in self.pins]] = True
        return mask


def initial_rows(N: int, bc: BoundaryData, init: str, eps, rng: np.random.Generator = None):
    """Starting arrays for one chain per entry of ``eps``.

    ``auto`` starts rows with eps >= 1 fully pinned and the others at the minimiser.
    """
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    sites = variable_sites(N, bc.free_right)
    minimiser = discrete_minimiser(N, bc).values
    pinned_start = LatticeField.from_boundary(N, bc).values.copy()

    if init == "minimiser":
        full = np.zeros(len(eps), dtype=bool)
    elif init == "pinned":
        full = np.ones(len(eps), dtype=bool)
    elif init == "auto":
        full = eps >= 1.0
    elif init == "gaussian":
        if rng is None:
            raise DomainError("a gaussian start needs a generator")
        phi = sample_pinned_gaussian(N, bc, None, rng, size=len(eps))
        return phi, np.zeros((len(eps), len(sites)), dtype=bool)
    else:
        raise DomainError(f"unknown initial state {init!r}")

    phi = np.where(full[:, None], pinned_start, minimiser)
    pinned = np.repeat(full[:, None], len(sites), axis=1)
    return phi, pinned


class HeatBath:
    """Single-site heat-bath kernel for a batch of chains.

    At a site with conditional precision c and conditional mean m the new value is
    an exact zero with probability ``eps exp(-c m^2 / 2) / (eps exp(-c m^2 / 2) + sqrt(2 pi / c))``
    and a Gaussian(m, 1 / c) draw otherwise.
    """

    def __init__(self, N: int, free_right: bool, eps, scan: ScanOrder = ScanOrder.FORWARD_BACKWARD):
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        if not (np.isfinite(eps).all() and (eps >= 0).all()):
            raise DomainError(f"pinning strengths must be finite and non-negative, got {eps}")

        self.N = N
        self.free_right = free_right
        self.scan = ScanOrder(scan)
        self.sites = variable_sites(N, free_right)
        self.rows = len(eps)
        with np.errstate(divide="ignore"):
            self.log_eps = np.log(eps)

        # Conditional precision of each site is the Hessian diagonal.
        self.precision = np.array(full_hessian_bands(N, free_right)[0])
        self.log_free = 0.5 * np.log(2.0 * math.pi / self.precision)
        self._row_index = np.arange(self.rows)
        self._groups = [self.sites[self.sites % 3 == residue] for residue in range(3)]

    def _updates_per_sweep(self) -> int:
        return 2 * len(self.sites) if self.scan is ScanOrder.FORWARD_BACKWARD else len(self.sites)

    def _draw(self, rngs: Sequence[np.random.Generator], blocks: Sequence[int]):
        """Uniforms, normals and (random scan) sites for one sweep, block by block."""
        width = self._updates_per_sweep()
        uniforms, normals, sites = [], [], []
        for rng, rows in zip(rngs, blocks):
            uniforms.append(rng.random((rows, width)))
            normals.append(rng.standard_normal((rows, width)))
            if self.scan is ScanOrder.RANDOM:
                sites.append(rng.integers(1, self.sites[-1] + 1, size=(rows, width)))
        random_sites = np.concatenate(sites) if sites else None
        return np.concatenate(uniforms), np.concatenate(normals), random_sites

    def _local_gradient(self, phi: np.ndarray, site, rows):
        """Derivative of the Hamiltonian in phi_site from the three Laplacians touching it."""
        gradient = 0.0
        for offset, weight in zip((-1, 0, 1), LAPLACIAN_WEIGHTS):
            k = site + offset
            valid = (k >= 0) & (k <= self.N)
            k = np.clip(k, 0, self.N)
            laplacian = phi[rows, k] - 2.0 * phi[rows, k + 1] + phi[rows, k + 2]
            gradient = gradient + np.where(valid, weight * laplacian, 0.0)
        return gradient

    def _heat_bath(self, current, gradient, site, uniform, normal, log_eps):
        c = self.precision[site - 1]
        mean = current - gradient / c
        log_pin = log_eps - 0.5 * c * mean * mean
        with np.errstate(invalid="ignore"):
            pin_probability = np.exp(log_pin - np.logaddexp(log_pin, self.log_free[site - 1]))
        pin = uniform < pin_probability
        return np.where(pin, 0.0, mean + normal / np.sqrt(c)), pin

    def _update_site(self, phi, pinned, site, uniform, normal):
        rows = self._row_index if np.ndim(site) else slice(None)
        gradient = self._local_gradient(phi, site, rows)
        value, pin = self._heat_bath(phi[rows, site + 1], gradient, site, uniform, normal, self.log_eps)
        phi[rows, site + 1] = value
        pinned[rows, site - 1] = pin

    def _update_group(self, phi, pinned, group, uniform, normal):
        # Sites three apart never share a Laplacian, so the group is conditionally independent.
        curvature = np.diff(phi, 2, axis=1)
        padded = np.pad(curvature, ((0, 0), (2, 2)))
        gradient = np.diff(padded, 2, axis=1)[:, group + 1]
        value, pin = self._heat_bath(
            phi[:, group + 1], gradient, group, uniform, normal, self.log_eps[:, None]
        )
        phi[:, group + 1] = value
        pinned[:, group - 1] = pin

    def sweep(self, phi: np.ndarray, pinned: np.ndarray, rngs: Sequence[np.random.Generator], blocks=None):
        """One sweep over every variable site of every row, in place.

        Args:
            phi (np.ndarray): Values, shape (B, N + 3).
            pinned (np.ndarray): Atom flags, shape (B, M).
            rngs (Sequence[np.random.Generator]): One generator per row block.
            blocks (Sequence[int], optional): Rows drawn from each generator. Defaults to all rows from one.
        """
        blocks = [self.rows] if blocks is None else list(blocks)
        if sum(blocks) != self.rows or len(blocks) != len(rngs):
            raise DomainError(f"row blocks {blocks} do not cover {self.rows} chains with {len(rngs)} generators")
        uniforms, normals, random_sites = self._draw(rngs, blocks)

        if self.scan is ScanOrder.FORWARD_BACKWARD:
            order = np.concatenate((self.sites, self.sites[::-1]))
            for step, site in enumerate(order):
                self._update_site(phi, pinned, int(site), uniforms[:, step], normals[:, step])
        elif self.scan is ScanOrder.RANDOM:
            for step in range(random_sites.shape[1]):
                self._update_site(phi, pinned, random_sites[:, step], uniforms[:, step], normals[:, step])
        else:
            start = 0
            for group in self._groups:
                stop = start + len(group)
                self._update_group(phi, pinned, group, uniforms[:, start:stop], normals[:, start:stop])
                start = stop


def gibbs_sweep(
    state: ChainState, eps: float, rng: np.random.Generator, scan: ScanOrder = ScanOrder.FORWARD_BACKWARD
) -> ChainState:
    """Apply one heat-bath sweep to a single chain and return the new state."""
    N = state.field.N
    kernel = HeatBath(N, state.free_right, [eps], scan)
    phi = state.field.values[None, :].copy()
    pinned = state.pinned_mask()[None, :]
    kernel.sweep(phi, pinned, [rng])
    return ChainState.from_arrays(N, phi[0], pinned[0], state.free_right)


@dataclass
class ChainSample:
    sweep: int
    state: ChainState
    contact_fraction: float
    pin_density: float
    profile: MacroProfile
    diagnostics: dict = field(default_factory=dict)


def run_chain(config: SamplerConfig) -> Iterator[ChainSample]:
    """Yield every ``thin``-th state after burn-in; deterministic in the config."""
    N, bc = config.N, config.bc
    rng = make_generator(config.seed, config.replica)
    kernel = HeatBath(N, bc.free_right, [config.eps], config.scan)
    phi, pinned = initial_rows(N, bc, config.init, [config.eps], rng)
    pin_total = flips = 0

    log.debug(f"Starting chain N={N} eps={config.eps} seed={config.seed} replica={config.replica}")
    for sweep in range(1, config.sweeps + 1):
        before = pinned.copy()
        kernel.sweep(phi, pinned, [rng])
        pin_total += int(pinned.sum())
        flips += int((pinned != before).sum())
        if sweep <= config.burn_in or (sweep - config.burn_in) % config.thin:
            continue

        state = ChainState.from_arrays(N, phi[0], pinned[0], bc.free_right)
        contacts = contact_number(state.field)
        yield ChainSample(
            sweep=sweep,
            state=state,
            contact_fraction=contacts / N,
            pin_density=len(state.pins) / N,
            profile=empirical_profile(state.field, bc.free_right, len(state.pins)),
            diagnostics={
                "pin_rate": pin_total / (sweep * pinned.shape[1]),
                # Fraction of site atom flags changed per sweep.
                "flip_rate": flips / (sweep * pinned.shape[1]),
            },
        )


def _replica_fractions(config: SamplerConfig) -> List[float]:
    return [sample.contact_fraction for sample in run_chain(config)]


def run_replicas(config: SamplerConfig, replicas: int, workers: int = 1, collect=None) -> list:
    """Run independent replicas on streams (seed, replica) and collect one list per replica.

    ``collect`` maps a SamplerConfig to the per-replica result; the default records
    the contact fraction of every emitted sample.
    """
    collect = collect or _replica_fractions
    configs = [config.with_replica(config.replica + offset) for offset in range(replicas)]
    if workers == 1:
        return [collect(replica) for replica in configs]
    return Parallel(n_jobs=workers)(delayed(collect)(replica) for replica in configs)


@dataclass
class BatchTrace:
    """Pin and contact counts of batched chains, shape (replicas, nodes, samples)."""

    eps: np.ndarray
    pin_counts: np.ndarray
    contact_counts: np.ndarray
    pin_rate: float

    def pin_density(self, N: int) -> np.ndarray:
        """Mean over samples of |P| / N, shape (replicas, nodes)."""
        return self.pin_counts.mean(axis=2) / N

    def contact_density(self, N: int) -> np.ndarray:
        return self.contact_counts.mean(axis=2) / N


def run_batched(
    N: int,
    bc: BoundaryData,
    eps_nodes,
    seed: int,
    replicas: int,
    sweeps: int,
    burn_in: int,
    thin: int = 1,
    scan: ScanOrder = ScanOrder.FORWARD_BACKWARD,
    init: str = "auto",
    first_replica: int = 0,
) -> BatchTrace:
    """Run one chain per (replica, node) as a single array.

    Rows are replica-major and every replica block draws from its own
    (seed, replica) stream, so results do not depend on how replicas are grouped.
    """
    eps_nodes = np.asarray(eps_nodes, dtype=float)
    if not sweeps > burn_in >= 0 or thin < 1:
        raise DomainError(f"need sweeps > burn_in >= 0 and thin >= 1, got {sweeps}, {burn_in}, {thin}")

    nodes = len(eps_nodes)
    rngs = [make_generator(seed, first_replica + replica) for replica in range(replicas)]
    eps_rows = np.tile(eps_nodes, replicas)
    kernel = HeatBath(N, bc.free_right, eps_rows, scan)
    starts = [initial_rows(N, bc, init, eps_nodes, rng) for rng in rngs]
    phi = np.concatenate([start[0] for start in starts])
    pinned = np.concatenate([start[1] for start in starts])

    recorded = (sweeps - burn_in) // thin
    pin_counts = np.zeros((replicas * nodes, recorded), dtype=np.int64)
    contact_counts = np.zeros_like(pin_counts)
    pin_total, column = 0, 0
    for sweep in range(1, sweeps + 1):
        kernel.sweep(phi, pinned, rngs, [nodes] * replicas)
        pin_total += int(pinned.sum())
        if sweep <= burn_in or (sweep - burn_in) % thin:
            continue
        pin_counts[:, column] = pinned.sum(axis=1)
        contact_counts[:, column] = np.count_nonzero(phi[:, 2:N + 2] == 0.0, axis=1)
        column += 1
        if column % 1000 == 0:
            log.trace(f"Batched chains N={N}: {column}/{recorded} samples recorded")

    shape = (replicas, nodes, recorded)
    pin_rate = pin_total / (sweeps * pinned.size) if pinned.size else 0.0
    return BatchTrace(eps_nodes, pin_counts.reshape(shape), contact_counts.reshape(shape), pin_rate)
