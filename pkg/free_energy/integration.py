"""Free energy estimates by thermodynamic integration of heat-bath pin densities.

Along the pinning strength u the pinned partition function satisfies
``d log Z_{N,u} / d log u = E_u |P|``. Integrating the chain estimate of the
pin density over a geometric grid of u gives the log ratio per site.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.integrate import trapezoid

from core.field import BoundaryData
from core.partition import log_partition_zero
from free_energy.enumeration import ratio_exact
from sampler.diagnostics import RHAT_THRESHOLD, split_rhat, standard_error
from sampler.gibbs import BatchTrace, ScanOrder, run_batched
from utils.errors import DomainError

log = logging.getLogger(__name__)

DIRECTIONS = ("up", "down", "auto")
# Exact cross-checks are cheap up to here.
CROSS_CHECK_LIMIT = 14
HEAD_FACTOR = 1e-3
TAIL_FACTOR = 1e4


@dataclass(frozen=True)
class ChainBudget:
    """Monte Carlo effort for one (N, grid) integration."""

    sweeps: int = 1500
    burn_in: int = 300
    thin: int = 1
    replicas: int = 4
    nodes_per_decade: int = 8
    min_nodes: int = 21
    scan: ScanOrder = ScanOrder.CHROMATIC

    def __post_init__(self):
        if not self.sweeps > self.burn_in >= 0:
            raise DomainError(f"need sweeps > burn_in >= 0, got sweeps={self.sweeps}, burn_in={self.burn_in}")
        if self.replicas < 2:
            raise DomainError(f"error bars need at least 2 replicas, got {self.replicas}")
        if self.thin < 1 or self.nodes_per_decade < 1 or self.min_nodes < 20:
            raise DomainError("thin and nodes_per_decade must be positive and grids need at least 20 nodes")
        object.__setattr__(self, "scan", ScanOrder(self.scan))

    def scaled(self, factor: float) -> "ChainBudget":
        """Same budget with sweeps and burn-in multiplied by ``factor``."""
        burn_in = max(int(self.burn_in * factor), 10)
        sweeps = max(int(self.sweeps * factor), burn_in + 40)
        return ChainBudget(sweeps, burn_in, self.thin, self.replicas, self.nodes_per_decade, self.min_nodes, self.scan)

    def to_dict(self) -> dict:
        return {
            "sweeps": self.sweeps,
            "burn_in": self.burn_in,
            "thin": self.thin,
            "replicas": self.replicas,
            "nodes_per_decade": self.nodes_per_decade,
            "min_nodes": self.min_nodes,
            "scan": self.scan.value,
        }


def geometric_grid(lo: float, hi: float, nodes_per_decade: int, min_nodes: int) -> np.ndarray:
    """Geometric grid from lo to hi with an odd number of nodes (for the coarse rule)."""
    if not 0 < lo < hi:
        raise DomainError(f"geometric grid needs 0 < lo < hi, got {lo}, {hi}")
    count = max(min_nodes, int(math.ceil(math.log10(hi / lo) * nodes_per_decade)) + 1)
    count += 1 - count % 2
    return np.geomspace(lo, hi, count)


def resolve_direction(direction: str, eps: float) -> str:
    if direction not in DIRECTIONS:
        raise DomainError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if direction == "auto":
        return "up" if eps < 1.0 else "down"
    return direction


@dataclass
class TauRow:
    """Per-N estimate of the log ratio per site."""

    N: float
    eps: float
    tau: float
    stderr: float
    direction: str
    replica_stderr: float = math.nan
    quadrature_error: float = math.nan
    rhat: float = math.nan
    flagged: bool = False
    exact: Optional[float] = None

    @property
    def tau_over_log_eps(self) -> float:
        return self.tau / math.log(self.eps) if self.eps > 0 and self.eps != 1 else math.nan

    def csv_row(self):
        """Row for the free_energy.v1 schema."""
        return self.N, self.eps, self.tau, self.stderr, "tau", self.tau_over_log_eps

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "eps": self.eps,
            "tau": self.tau,
            "stderr": self.stderr,
            "direction": self.direction,
            "replica_stderr": self.replica_stderr,
            "quadrature_error": self.quadrature_error,
            "rhat": self.rhat,
            "flagged": self.flagged,
            "exact": self.exact,
        }


@dataclass
class TauEstimate:
    """Extrapolated estimate at one eps; never a claim about the exact limit."""

    eps: float
    tau: float
    stderr: float
    rows: List[TauRow] = field(default_factory=list)
    extrapolation: str = "linear-in-1/N"

    @property
    def flagged(self) -> bool:
        return any(row.flagged for row in self.rows)

    @property
    def tau_over_log_eps(self) -> float:
        return self.tau / math.log(self.eps) if self.eps != 1 else math.nan

    def extrapolated_row(self) -> TauRow:
        return TauRow(math.inf, self.eps, self.tau, self.stderr, "extrapolated", flagged=self.flagged)

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "tau": self.tau,
            "stderr": self.stderr,
            "tau_over_log_eps": self.tau_over_log_eps,
            "extrapolation": self.extrapolation,
            "flagged": self.flagged,
            "rows": [row.to_dict() for row in self.rows],
        }


def _stack(parts: Sequence[BatchTrace]) -> BatchTrace:
    return BatchTrace(
        eps=parts[0].eps,
        pin_counts=np.concatenate([part.pin_counts for part in parts]),
        contact_counts=np.concatenate([part.contact_counts for part in parts]),
        pin_rate=float(np.mean([part.pin_rate for part in parts])),
    )


def run_nodes(
    N: int, nodes, budget: ChainBudget, seed: int, workers: int = 1, first_replica: int = 0, bc: BoundaryData = None
) -> BatchTrace:
    """Chains for every (replica, node) pair; replicas are split over workers."""
    bc = bc or BoundaryData.zero()
    options = dict(sweeps=budget.sweeps, burn_in=budget.burn_in, thin=budget.thin, scan=budget.scan)
    if workers == 1:
        return run_batched(N, bc, nodes, seed, budget.replicas, first_replica=first_replica, **options)

    parts = Parallel(n_jobs=workers)(
        delayed(run_batched)(N, bc, nodes, seed, 1, first_replica=first_replica + replica, **options)
        for replica in range(budget.replicas)
    )
    return _stack(parts)


def _max_rhat(trace: BatchTrace) -> float:
    return max(split_rhat(trace.pin_counts[:, node, :]) for node in range(trace.pin_counts.shape[1]))


def tau_for_size(
    N: int,
    eps: float,
    budget: ChainBudget = ChainBudget(),
    seed: int = 0,
    direction: str = "auto",
    workers: int = 1,
    first_replica: int = 0,
) -> TauRow:
    """Estimate ``(1/N) log Z_{N,eps}(0) / Z_N(0)`` for one N.

    ``up`` integrates the pin density from ``HEAD_FACTOR * min(eps, 1)`` to eps and
    adds the head term D(u_min). ``down`` starts from the fully pinned system,
    integrates the unpinned density from eps to ``TAIL_FACTOR * eps`` and adds the
    tail term at the last node.
    """
    if eps <= 0:
        raise DomainError(f"tau_estimate needs eps > 0, got {eps}")
    direction = resolve_direction(direction, eps)
    variables = N - 1

    if direction == "up":
        nodes = geometric_grid(min(eps, 1.0) * HEAD_FACTOR, eps, budget.nodes_per_decade, budget.min_nodes)
    else:
        nodes = geometric_grid(eps, eps * TAIL_FACTOR, budget.nodes_per_decade, budget.min_nodes)
    log_nodes = np.log(nodes)

    trace = run_nodes(N, nodes, budget, seed, workers, first_replica)
    pins = trace.pin_counts.mean(axis=2)

    if direction == "up":
        density = pins / N
        offset, edge = 0.0, density[:, 0]
    else:
        density = (variables - pins) / N
        offset = (variables * math.log(eps) - log_partition_zero(N)) / N
        edge = density[:, -1]

    per_replica = offset + edge + trapezoid(density, log_nodes, axis=1)
    mean_density = density.mean(axis=0)
    quadrature_error = abs(
        trapezoid(mean_density, log_nodes) - trapezoid(mean_density[::2], log_nodes[::2])
    )
    replica_error = standard_error(per_replica)
    rhat = _max_rhat(trace)

    row = TauRow(
        N=N,
        eps=eps,
        tau=float(per_replica.mean()),
        stderr=math.hypot(replica_error, quadrature_error),
        direction=direction,
        replica_stderr=replica_error,
        quadrature_error=quadrature_error,
        rhat=rhat,
        flagged=rhat > RHAT_THRESHOLD,
    )
    if row.flagged:
        log.warning(f"Chains for N={N}, eps={eps} did not converge (split R-hat {rhat:.3f})")

    if N <= CROSS_CHECK_LIMIT:
        row.exact = ratio_exact(N, eps) / N
        if abs(row.tau - row.exact) > 3 * row.stderr:
            log.warning(f"Estimate {row.tau:.6g} for N={N}, eps={eps} is more than 3 errors from exact {row.exact:.6g}")
    log.debug(f"tau_N for N={N}, eps={eps}: {row.tau:.6g} +- {row.stderr:.2g} ({direction})")
    return row


def extrapolate(sizes, values, errors):
    """Intercept of a least-squares line in 1/N and its propagated error."""
    sizes = np.asarray(sizes, dtype=float)
    values = np.asarray(values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(np.unique(sizes)) < 2:
        return float(values.mean()), float(np.sqrt(np.sum(errors ** 2)) / len(errors))

    design = np.column_stack((np.ones_like(sizes), 1.0 / sizes))
    weights = np.linalg.pinv(design)[0]
    return float(weights @ values), float(np.sqrt(weights ** 2 @ errors ** 2))


def tau_estimate(
    eps: float,
    N_list: Sequence[int],
    budget: ChainBudget = ChainBudget(),
    seed: int = 0,
    direction: str = "auto",
    workers: int = 1,
) -> TauEstimate:
    """Per-N estimates for every N in N_list and their extrapolation in 1/N."""
    if eps <= 0:
        raise DomainError(f"tau_estimate needs eps > 0, got {eps}")
    if not N_list:
        raise DomainError("N_list must not be empty")

    rows = [
        tau_for_size(N, eps, budget, seed, direction, workers, first_replica=index * budget.replicas)
        for index, N in enumerate(N_list)
    ]
    tau, stderr = extrapolate([row.N for row in rows], [row.tau for row in rows], [row.stderr for row in rows])
    estimate = TauEstimate(eps, tau, stderr, rows)
    log.info(f"tau({eps}) ~ {tau:.6g} +- {stderr:.2g} from N={list(N_list)}")
    return estimate


@dataclass
class ScanRow:
    N: int
    eps: float
    pin_density: float
    contact_density: float
    stderr: float

    def csv_row(self):
        return self.N, self.eps, self.pin_density, self.contact_density, self.stderr


def critical_region_scan(
    eps_grid, N_list: Sequence[int], budget: ChainBudget = ChainBudget(), seed: int = 0, workers: int = 1
) -> List[ScanRow]:
    """Mean pin and contact densities for every (N, eps) pair."""
    eps_grid = np.asarray(eps_grid, dtype=float)
    if (eps_grid < 0).any():
        raise DomainError("pinning strengths must be non-negative")

    rows = []
    for index, N in enumerate(N_list):
        trace = run_nodes(N, eps_grid, budget, seed, workers, first_replica=index * budget.replicas)
        pins = trace.pin_density(N)
        contacts = trace.contact_density(N)
        for node, eps in enumerate(eps_grid):
            rows.append(ScanRow(
                N, float(eps), float(pins[:, node].mean()), float(contacts[:, node].mean()),
                standard_error(pins[:, node]),
            ))
        log.debug(f"Scanned {len(eps_grid)} strengths at N={N}")
    return rows


def bracket_critical(rows: Sequence[ScanRow]) -> dict:
    """Bracket the critical strength from the growth of the mean pin count with N.

    Below the transition the mean pin count stays bounded, above it grows like N.
    A strength counts as localized when the pin count grows faster than the
    square root of the size ratio. Returns a bracket, never a point value.
    """
    sizes = sorted({row.N for row in rows})
    if len(sizes) < 2:
        raise DomainError("bracketing needs at least two system sizes")
    small, large = sizes[0], sizes[-1]
    by_key = {(row.N, row.eps): row for row in rows}
    threshold = math.sqrt(large / small)

    classification = {}
    for eps in sorted({row.eps for row in rows}):
        if (small, eps) not in by_key or (large, eps) not in by_key:
            continue
        count_small = by_key[small, eps].pin_density * small
        count_large = by_key[large, eps].pin_density * large
        localized = count_small > 0 and count_large / count_small > threshold
        classification[eps] = "non-vanishing" if localized else "vanishing"

    strengths = sorted(classification)
    upper = next((eps for eps in strengths if classification[eps] == "non-vanishing"), None)
    below = [eps for eps in strengths if classification[eps] == "vanishing" and (upper is None or eps < upper)]
    return {
        "lower": below[-1] if below else None,
        "upper": upper,
        "sizes": [small, large],
        "classification": {format(eps, ".17g"): label for eps, label in classification.items()},
    }