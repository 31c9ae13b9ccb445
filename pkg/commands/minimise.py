import logging

from commands._common import add_boundary_arguments, add_tau_arguments, boundary_from_args, command_dir, start_manifest, tau_from_args
from utils.errors import UsageError
from utils.exports import write_csv, write_json
from variational.phases import build_profile, classify

log = logging.getLogger(__name__)


class Minimise:
    """ Continuum minimiser construction """

    name = "minimise"

    def register(self, subparsers) -> None:
        parser = subparsers.add_parser(self.name, help="classify the minimisers for one boundary datum and reward")
        add_boundary_arguments(parser)
        add_tau_arguments(parser)
        parser.add_argument("--grid", type=int, default=256, help="profile grid size M (default 256)")
        parser.set_defaults(func=self.run)

    def run(self, args) -> int:
        """Write the phase report and one profile CSV per minimiser."""
        if args.grid < 2:
            raise UsageError(f"--grid must be at least 2, got {args.grid}")
        bc = boundary_from_args(args)
        tau = tau_from_args(args)

        report = classify(bc, tau)
        folder = command_dir(args)
        manifest = start_manifest(args, {"bc": bc.to_dict(), "tau": tau, "eps": args.eps, "grid": args.grid})

        manifest.add_output(write_json(folder / "phase_report.json", "phase_report.v1", report.to_dict()))
        for index, minimiser in enumerate(report.minimisers):
            profile = build_profile(minimiser, args.grid)
            path = folder / f"profile_{index}_{minimiser.kind.value}.csv"
            manifest.add_output(write_csv(path, "profile.v1", zip(profile.grid, profile.values)))

        manifest.diagnostics = {"phase": report.phase, "regime": report.regime, "degenerate": report.degenerate}
        log.info(f"{report.regime}: minimisers {report.phase} with sigma {report.sigma_min:.10g}")
        manifest.finish(folder)
        return 0


def setup(subparsers) -> None:
    """ Load the minimise command. """
    Minimise().register(subparsers)
    log.info("Commands loaded: minimise")
