import argparse
import glob
import importlib
import logging
import sys
from pathlib import Path

from handlers.error_handle import handle_error
from utils import config, database
from utils.errors import UsageError
from utils.logger import setup_logging
from utils.record import record_usage

log = logging.getLogger(__name__)

ROOT = Path(__file__).resolve().parent


class ArgumentParser(argparse.ArgumentParser):
    """Parser that raises UsageError instead of exiting, so the error handler sees bad flags."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="pinlab", description="Laplacian pinning model: phases, sampling and free energies.")
    parser.add_argument("--output-dir", default=None, help="output folder (PINLAB_OUTPUT_DIR, default ./output)")
    parser.add_argument("--log-level", default=None, help="log level (LOG_LEVEL, default NOTSET)")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    # Loads every command module in the commands folder.
    # Skips over any module that starts with '_'.
    for path in sorted(glob.glob(str(ROOT / "commands" / "[!_]*.py"))):
        module = importlib.import_module(f"commands.{Path(path).stem}")
        module.setup(subparsers)
    return parser


def main(argv=None) -> int:
    """Parse argv, run the selected command and return its exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as error:
        setup_logging()
        return handle_error(error)

    setup_logging(args.log_level)
    args.argv = argv
    args.output_dir = config.output_dir(args.output_dir)

    try:
        database.setup_db(args.output_dir)
        record_usage(args)
        return args.func(args)
    except Exception as error:
        return handle_error(error, args.command)


if __name__ == "__main__":
    sys.exit(main())
