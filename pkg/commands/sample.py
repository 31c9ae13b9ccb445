import functools
import logging
import math

import numpy as np

from commands._common import add_boundary_arguments, boundary_from_args, command_dir, default_workers, start_manifest
from sampler.diagnostics import RHAT_THRESHOLD, split_rhat
from sampler.gibbs import INITIAL_STATES, SamplerConfig, ScanOrder, run_chain, run_replicas
from utils.errors import UsageError
from utils.exports import write_csv

log = logging.getLogger(__name__)


def collect_trace(config: SamplerConfig, dump_every: int = 0) -> dict:
    """Trace rows of one replica, plus profile dumps every ``dump_every`` emitted samples."""
    trace, dumps = [], []
    for index, sample in enumerate(run_chain(config)):
        profile = sample.profile
        trace.append((
            config.replica,
            sample.sweep,
            sample.contact_fraction,
            sample.pin_density,
            float(np.max(np.abs(profile.values))),
            float(profile.values[0]),
            float(profile.values[-1]),
        ))
        if dump_every and index % dump_every == 0:
            dumps += [(config.replica, sample.sweep, t, h) for t, h in zip(profile.grid, profile.values)]
    return {"trace": trace, "dumps": dumps}


class Sample:
    """ Heat-bath sampling runs """

    name = "sample"

    def register(self, subparsers) -> None:
        parser = subparsers.add_parser(self.name, help="run heat-bath chains and write their traces")
        parser.add_argument("--N", type=int, required=True, help="system size")
        add_boundary_arguments(parser)
        parser.add_argument("--eps", type=float, required=True, help="pinning strength")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--sweeps", type=int, default=1000)
        parser.add_argument("--burn-in", type=int, default=100)
        parser.add_argument("--thin", type=int, default=1)
        parser.add_argument("--replicas", type=int, default=1)
        parser.add_argument("--scan", choices=[order.value for order in ScanOrder], default=ScanOrder.FORWARD_BACKWARD.value)
        parser.add_argument("--init", choices=INITIAL_STATES, default="auto")
        parser.add_argument("--workers", type=int, default=None, help="parallel replicas (PINLAB_WORKERS)")
        parser.add_argument("--dump-every", type=int, default=0, help="write every k-th emitted profile (0: none)")
        parser.set_defaults(func=self.run)

    def run(self, args) -> int:
        if args.replicas < 1 or args.dump_every < 0:
            raise UsageError("--replicas must be positive and --dump-every non-negative")
        config = SamplerConfig(
            N=args.N,
            bc=boundary_from_args(args),
            eps=args.eps,
            seed=args.seed,
            sweeps=args.sweeps,
            burn_in=args.burn_in,
            thin=args.thin,
            scan=args.scan,
            init=args.init,
        )
        workers = default_workers(args.workers)
        folder = command_dir(args)
        manifest = start_manifest(args, {**config.to_dict(), "replicas": args.replicas, "workers": workers}, args.seed)

        collect = functools.partial(collect_trace, dump_every=args.dump_every)
        results = run_replicas(config, args.replicas, workers, collect)

        trace = [row for result in results for row in result["trace"]]
        manifest.add_output(write_csv(folder / "trace.csv", "trace.v1", trace))
        if args.dump_every:
            dumps = [row for result in results for row in result["dumps"]]
            manifest.add_output(write_csv(folder / "profiles.csv", "profile_dump.v1", dumps))

        fractions = [[row[2] for row in result["trace"]] for result in results]
        length = min(len(values) for values in fractions)
        rhat = split_rhat([values[:length] for values in fractions]) if length >= 4 else math.nan
        if math.isfinite(rhat) and rhat > RHAT_THRESHOLD:
            log.warning(f"Contact fraction traces did not converge (split R-hat {rhat:.3f})")

        manifest.diagnostics = {
            "samples": len(trace),
            "split_rhat": rhat,
            "mean_contact_fraction": float(np.mean([row[2] for row in trace])) if trace else math.nan,
            "mean_pin_density": float(np.mean([row[3] for row in trace])) if trace else math.nan,
        }
        manifest.finish(folder)
        return 0


def setup(subparsers) -> None:
    """ Load the sample command. """
    Sample().register(subparsers)
    log.info("Commands loaded: sample")
