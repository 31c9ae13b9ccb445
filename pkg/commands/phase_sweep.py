import itertools
import logging

import numpy as np

from commands._common import command_dir, number_list, start_manifest
from core.field import BoundaryData
from utils.errors import UsageError
from utils.exports import write_csv
from variational.phases import classify

log = logging.getLogger(__name__)


def locate_boundary(bc: BoundaryData, lo: float, hi: float, tolerance: float) -> float:
    """Bisect on the minimiser-set signature between two rewards with different phases."""
    below = classify(bc, lo).phase
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if classify(bc, mid).phase == below:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sweep_boundary(bc: BoundaryData, taus, tolerance: float = 1e-6):
    """Classify along a tau grid.

    Returns:
        tuple: Sweep rows, boundary rows and the phases that came back after being left.
    """
    reports = [classify(bc, tau) for tau in taus]
    rows = [(bc.a, bc.alpha, tau, r.regime, r.phase, r.sigma_min) for tau, r in zip(taus, reports)]

    boundaries = []
    left = set()
    reentrant = []
    for (tau_lo, low), (tau_hi, high) in zip(zip(taus, reports), zip(taus[1:], reports[1:])):
        if low.phase == high.phase:
            continue
        boundary = locate_boundary(bc, tau_lo, tau_hi, tolerance)
        boundaries.append((bc.a, bc.alpha, boundary, low.phase, high.phase))
        left.add(low.phase)
        if high.phase in left:
            reentrant.append({"a": bc.a, "alpha": bc.alpha, "phase": high.phase, "tau": boundary})
            log.warning(f"Phase {high.phase} reappears at tau={boundary:.6g} for a={bc.a}, alpha={bc.alpha}")
    return rows, boundaries, reentrant


class PhaseSweep:
    """ Phase diagram sweeps over the reward """

    name = "phase-sweep"

    def register(self, subparsers) -> None:
        parser = subparsers.add_parser(self.name, help="classify minimisers along a tau grid and locate boundaries")
        parser.add_argument("--a", type=number_list(float), required=True, help="left heights, comma separated")
        parser.add_argument("--alpha", type=number_list(float), required=True, help="left slopes, comma separated")
        parser.add_argument("--tau-min", type=float, default=0.0)
        parser.add_argument("--tau-max", type=float, required=True)
        parser.add_argument("--tau-steps", type=int, default=201)
        parser.add_argument("--tolerance", type=float, default=1e-6, help="bisection tolerance on boundaries")
        boundary = parser.add_mutually_exclusive_group()
        boundary.add_argument("--free-right", action="store_true", help="free right boundary (default)")
        boundary.add_argument("--symmetric", action="store_true", help="Dirichlet data (a, alpha, a, -alpha)")
        parser.set_defaults(func=self.run)

    def run(self, args) -> int:
        if not 0 <= args.tau_min < args.tau_max:
            raise UsageError(f"need 0 <= --tau-min < --tau-max, got {args.tau_min}, {args.tau_max}")
        if args.tau_steps < 2 or args.tolerance <= 0:
            raise UsageError("--tau-steps must be at least 2 and --tolerance positive")

        taus = np.linspace(args.tau_min, args.tau_max, args.tau_steps).tolist()
        folder = command_dir(args)
        settings = {
            "a": args.a,
            "alpha": args.alpha,
            "tau": [args.tau_min, args.tau_max, args.tau_steps],
            "tolerance": args.tolerance,
            "boundary": "symmetric" if args.symmetric else "free-right",
        }
        manifest = start_manifest(args, settings)

        rows, boundaries, reentrant = [], [], []
        for a, alpha in itertools.product(args.a, args.alpha):
            if args.symmetric:
                bc = BoundaryData.dirichlet(a, alpha, a, -alpha)
            else:
                bc = BoundaryData.free(a, alpha)
            found = sweep_boundary(bc, taus, args.tolerance)
            rows += found[0]
            boundaries += found[1]
            reentrant += found[2]
            log.debug(f"Swept a={a}, alpha={alpha}: {len(found[1])} boundaries")

        manifest.add_output(write_csv(folder / "phase_sweep.csv", "phase_sweep.v1", rows))
        manifest.add_output(write_csv(folder / "phase_boundaries.csv", "phase_boundaries.v1", boundaries))
        manifest.diagnostics = {"boundaries": len(boundaries), "reentrant": reentrant}
        log.info(f"Found {len(boundaries)} phase boundaries over {len(rows)} classifications")
        manifest.finish(folder)
        return 0


def setup(subparsers) -> None:
    """ Load the phase-sweep command. """
    PhaseSweep().register(subparsers)
    log.info("Commands loaded: phase-sweep")
