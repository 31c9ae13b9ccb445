import importlib
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List

from commands._common import command_dir, start_manifest
from utils.errors import PinLabError
from utils.exports import write_json

log = logging.getLogger(__name__)

# Selector name -> module under suites/.
SUITES = {
    "core": "suites.core",
    "variational": "suites.variational",
    "sampler": "suites.sampler",
    "free-energy": "suites.free_energy",
    "ldp": "suites.ldp",
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    seconds: float
    details: dict = field(default_factory=dict)
    error: str = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "seconds": self.seconds,
            "details": self.details,
            "error": self.error,
        }


def run_check(check: Callable, quick: bool, seed: int, folder: Path) -> CheckResult:
    """Run one check; a pinlab error inside a check counts as a failure, not a crash."""
    started = time.perf_counter()
    try:
        details = check(quick, seed, folder)
        error = None
    except PinLabError as exception:
        details, error = {"passed": False}, f"{type(exception).__name__}: {exception}"
        log.error(f"Check {check.__name__} raised {error}")

    passed = bool(details.pop("passed"))
    result = CheckResult(check.__name__, passed, time.perf_counter() - started, details, error)
    log.info(f"{'PASS' if passed else 'FAIL'} {check.__name__} ({result.seconds:.2f}s)")
    return result


def run_suite(name: str, quick: bool, seed: int, folder: Path) -> List[CheckResult]:
    module = importlib.import_module(SUITES[name])
    log.info(f"Running suite {name} ({len(module.CHECKS)} checks{', quick' if quick else ''})")
    return [run_check(check, quick, seed, folder) for check in module.CHECKS]


class Verify:
    """ Acceptance suites """

    name = "verify"

    def register(self, subparsers) -> None:
        parser = subparsers.add_parser(self.name, help="run verification suites and write a pass/fail report")
        parser.add_argument("--suite", choices=[*SUITES, "all"], default="all")
        parser.add_argument("--quick", action="store_true", help="scale down Monte Carlo budgets")
        parser.add_argument("--seed", type=int, default=0)
        parser.set_defaults(func=self.run)

    def run(self, args) -> int:
        """Returns 1 when any check fails."""
        names = list(SUITES) if args.suite == "all" else [args.suite]
        folder = command_dir(args)
        manifest = start_manifest(args, {"suites": names, "quick": args.quick}, args.seed)

        suites = {}
        for name in names:
            results = run_suite(name, args.quick, args.seed, folder)
            suites[name] = {"passed": all(result.passed for result in results), "checks": results}
        passed = all(suite["passed"] for suite in suites.values())

        report = {"passed": passed, "quick": args.quick, "seed": args.seed, "suites": suites}
        manifest.add_output(write_json(folder / "verify.json", "verify.v1", report))
        for extra in ("gamma.csv", "concentration.csv"):
            if (folder / extra).exists() and "ldp" in names:
                manifest.add_output(folder / extra)
        manifest.diagnostics = {name: suite["passed"] for name, suite in suites.items()}
        manifest.finish(folder)

        if not passed:
            failed = [f"{name}.{check.name}" for name, suite in suites.items() for check in suite["checks"] if not check.passed]
            log.error(f"Verification failed: {', '.join(failed)}")
            return 1
        log.info("All verification checks passed")
        return 0


def setup(subparsers) -> None:
    """ Load the verify command. """
    Verify().register(subparsers)
    log.info("Commands loaded: verify")
