"""Argument helpers shared by the command modules."""
import argparse
import logging
import math
from pathlib import Path
from typing import Callable, List

import numpy as np

from core.field import BoundaryData
from utils import config
from utils.errors import DomainError, UsageError
from utils.exports import RunManifest, read_csv

log = logging.getLogger(__name__)


def number_list(kind: Callable = float) -> Callable:
    """argparse type for comma separated lists such as ``32,64,128``."""

    def parse(text: str) -> List:
        try:
            return [kind(item) for item in text.split(",") if item.strip()]
        except ValueError as error:
            raise argparse.ArgumentTypeError(f"expected a comma separated list, got {text!r}") from error

    return parse


def add_boundary_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--a", type=float, required=True, help="left height")
    parser.add_argument("--alpha", type=float, required=True, help="left slope")
    parser.add_argument("--b", type=float, default=None, help="right height (Dirichlet)")
    parser.add_argument("--beta", type=float, default=None, help="right slope (Dirichlet)")
    parser.add_argument("--free-right", action="store_true", help="leave the right boundary free")


def boundary_from_args(args) -> BoundaryData:
    """BoundaryData from --a --alpha [--b --beta | --free-right]."""
    has_right = args.b is not None or args.beta is not None
    if args.free_right and has_right:
        raise UsageError("--free-right cannot be combined with --b/--beta")
    if args.free_right:
        return BoundaryData.free(args.a, args.alpha)
    if args.b is None or args.beta is None:
        raise UsageError("Dirichlet data need both --b and --beta (or pass --free-right)")
    return BoundaryData.dirichlet(args.a, args.alpha, args.b, args.beta)


def add_tau_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau", type=float, default=None, help="reward tau used directly")
    parser.add_argument("--eps", type=float, default=None, help="pinning strength, needs --tau-from")
    parser.add_argument("--tau-from", type=Path, default=None, help="free_energy.v1 CSV holding tau rows")


def tau_from_table(path: Path, eps: float) -> float:
    """Interpolate tau at eps in log eps from the tau rows of a free-energy table.

    Extrapolated rows (N = inf) are preferred, otherwise the largest N is used.
    """
    rows = [row for row in read_csv(path) if row["quantity"] == "tau"]
    if not rows:
        raise DomainError(f"{path} holds no tau rows")

    sizes = {float(row["N"]) for row in rows}
    size = math.inf if math.inf in sizes else max(sizes)
    points = sorted((float(row["eps"]), float(row["log_ratio_or_tau"])) for row in rows if float(row["N"]) == size)
    strengths = np.array([point[0] for point in points])
    taus = np.array([point[1] for point in points])
    if not strengths[0] <= eps <= strengths[-1]:
        raise DomainError(f"eps={eps} lies outside the table range [{strengths[0]}, {strengths[-1]}]")
    if len(points) == 1:
        return float(taus[0])
    return float(np.interp(math.log(eps), np.log(strengths), taus))


def tau_from_args(args) -> float:
    """Reward from --tau, or from --eps looked up in the --tau-from table."""
    if args.tau is not None and (args.eps is not None or args.tau_from is not None):
        raise UsageError("pass either --tau or --eps with --tau-from, not both")
    if args.tau is not None:
        if args.tau < 0:
            raise UsageError(f"--tau must be non-negative, got {args.tau}")
        return args.tau
    if args.eps is None or args.tau_from is None:
        raise UsageError("a reward is required: --tau, or --eps together with --tau-from")
    tau = tau_from_table(args.tau_from, args.eps)
    log.info(f"Using tau={tau:.6g} for eps={args.eps} from {args.tau_from}")
    return tau


def command_dir(args) -> Path:
    """Folder for one command's outputs inside the run output directory."""
    path = Path(args.output_dir, args.command)
    path.mkdir(parents=True, exist_ok=True)
    return path


def start_manifest(args, settings: dict, seed: int = None) -> RunManifest:
    return RunManifest(command=args.command, config=settings, argv=list(args.argv), seed=seed)


def default_workers(value: int = None) -> int:
    return int(value or config.get_value("PINLAB_WORKERS"))
