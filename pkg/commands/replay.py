import logging
from pathlib import Path
from typing import List

from utils.errors import UsageError
from utils.exports import read_manifest

log = logging.getLogger(__name__)


def replay_argv(recorded: List[str], output_dir: str = None) -> List[str]:
    """Recorded argv with ``--output-dir`` replaced; unchanged without an override."""
    if output_dir is None:
        return list(recorded)
    argv, skip = [], False
    for item in recorded:
        if skip:
            skip = False
            continue
        if item == "--output-dir":
            skip = True
            continue
        if item.startswith("--output-dir="):
            continue
        argv.append(item)
    return ["--output-dir", str(output_dir), *argv]


class Replay:
    """ Manifest replay """

    name = "replay"

    def register(self, subparsers) -> None:
        parser = subparsers.add_parser(self.name, help="re-run the command recorded in a manifest")
        parser.add_argument("manifest", type=Path, help="manifest.json written by an earlier run")
        parser.add_argument("--into", type=Path, default=None, help="output directory for the replayed run")
        parser.set_defaults(func=self.run)

    def run(self, args) -> int:
        if not args.manifest.is_file():
            raise UsageError(f"no manifest at {args.manifest}")
        manifest = read_manifest(args.manifest)
        recorded = manifest.get("argv") or []
        if not recorded:
            raise UsageError(f"{args.manifest} does not record a replayable command")

        import pinlab

        argv = replay_argv(recorded, args.into)
        log.info(f"Replaying {manifest['command']} from {args.manifest}")
        return pinlab.main(argv)


def setup(subparsers) -> None:
    """ Load the replay command. """
    Replay().register(subparsers)
    log.info("Commands loaded: replay")
