import logging

from commands._common import command_dir, default_workers, number_list, start_manifest
from free_energy.enumeration import ENUMERATION_LIMIT, RatioTable
from free_energy.integration import DIRECTIONS, ChainBudget, bracket_critical, critical_region_scan, tau_estimate
from sampler.gibbs import ScanOrder
from utils import database
from utils.errors import CapacityError, UsageError
from utils.exports import write_csv, write_json

log = logging.getLogger(__name__)

MODES = ("exact", "estimate", "scan")


def exact_table(N: int, eps_grid, output_dir, workers: int = 1) -> RatioTable:
    """Ratio table for one N, served from the ledger when every strength is cached."""
    cached = [database.fetch_ratio(N, eps, output_dir) for eps in eps_grid]
    if all(value is not None for value in cached):
        log.debug(f"Using cached log ratios for N={N}")
        return RatioTable(N, eps_grid, cached)

    table = RatioTable.compute(N, eps_grid, workers)
    database.store_ratios(N, table.eps, table.log_ratios, output_dir)
    return table


class FreeEnergy:
    """ Exact and estimated free energies """

    name = "free-energy"

    def register(self, subparsers) -> None:
        parser = subparsers.add_parser(self.name, help="exact log ratios, tau estimates or a critical-region scan")
        parser.add_argument("--mode", choices=MODES, default="exact")
        parser.add_argument("--N", type=number_list(int), required=True, help="system sizes, comma separated")
        parser.add_argument("--eps", type=number_list(float), required=True, help="pinning strengths, comma separated")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--sweeps", type=int, default=ChainBudget.sweeps)
        parser.add_argument("--burn-in", type=int, default=ChainBudget.burn_in)
        parser.add_argument("--replicas", type=int, default=ChainBudget.replicas)
        parser.add_argument("--nodes-per-decade", type=int, default=ChainBudget.nodes_per_decade)
        parser.add_argument("--scan", choices=[order.value for order in ScanOrder], default=ChainBudget.scan.value)
        parser.add_argument("--direction", choices=DIRECTIONS, default="auto")
        parser.add_argument("--workers", type=int, default=None, help="parallel replicas (PINLAB_WORKERS)")
        parser.set_defaults(func=self.run)

    def budget(self, args) -> ChainBudget:
        return ChainBudget(
            sweeps=args.sweeps,
            burn_in=args.burn_in,
            replicas=args.replicas,
            nodes_per_decade=args.nodes_per_decade,
            scan=args.scan,
        )

    def run(self, args) -> int:
        if any(eps < 0 for eps in args.eps) or any(N < 2 for N in args.N):
            raise UsageError("--eps values must be non-negative and --N values at least 2")
        workers = default_workers(args.workers)
        folder = command_dir(args)
        settings = {"mode": args.mode, "N": args.N, "eps": args.eps, "workers": workers}

        if args.mode == "exact":
            too_large = [N for N in args.N if N > ENUMERATION_LIMIT]
            if too_large:
                raise CapacityError(f"exact mode supports N <= {ENUMERATION_LIMIT}, got {too_large}")
            manifest = start_manifest(args, settings)
            rows = [row for N in args.N for row in exact_table(N, args.eps, args.output_dir, workers).rows()]
            manifest.add_output(write_csv(folder / "free_energy.csv", "free_energy.v1", rows))
            manifest.finish(folder)
            return 0

        budget = self.budget(args)
        settings.update(budget=budget.to_dict(), direction=args.direction)
        manifest = start_manifest(args, settings, args.seed)

        if args.mode == "estimate":
            if any(eps == 0 for eps in args.eps):
                raise UsageError("estimate mode needs positive --eps values")
            estimates = [tau_estimate(eps, args.N, budget, args.seed, args.direction, workers) for eps in args.eps]
            rows = []
            for estimate in estimates:
                rows += [row.csv_row() for row in estimate.rows]
                rows.append(estimate.extrapolated_row().csv_row())
            manifest.add_output(write_csv(folder / "free_energy.csv", "free_energy.v1", rows))
            manifest.add_output(write_json(
                folder / "tau_estimates.json", "tau_estimates.v1", {"estimates": estimates, "budget": budget}
            ))
            manifest.diagnostics = {"flagged": [estimate.eps for estimate in estimates if estimate.flagged]}
        else:
            if len(set(args.N)) < 2:
                raise UsageError("scan mode needs at least two system sizes")
            scan = critical_region_scan(args.eps, args.N, budget, args.seed, workers)
            bracket = bracket_critical(scan)
            manifest.add_output(write_csv(folder / "critical_scan.csv", "critical_scan.v1", [row.csv_row() for row in scan]))
            manifest.add_output(write_json(folder / "bracket.json", "bracket.v1", bracket))
            manifest.diagnostics = {"lower": bracket["lower"], "upper": bracket["upper"]}
            log.info(f"Critical strength bracket: ({bracket['lower']}, {bracket['upper']})")

        manifest.finish(folder)
        return 0


def setup(subparsers) -> None:
    """ Load the free-energy command. """
    FreeEnergy().register(subparsers)
    log.info("Commands loaded: free-energy")
