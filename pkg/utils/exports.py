import csv
import datetime
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from utils import database
from utils.errors import InternalError
from utils.rng import BIT_GENERATOR

log = logging.getLogger(__name__)

ARTIFACT_VERSION = "1.0.0"
SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


def format_float(value) -> str:
    """Serialise a number with 17 significant digits, keeping inf and nan readable."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def load_schema(schema_id: str) -> dict:
    """Return the versioned schema shipped in the schemas folder."""
    path = SCHEMA_DIR / f"{schema_id}.json"
    with open(path, encoding="utf8") as handle:
        return json.load(handle)


def write_csv(path: Path, schema_id: str, rows: Iterable[Sequence]) -> Path:
    """Write rows under the header declared by a schema.

    Args:
        path (Path): Target file, parent folders are created.
        schema_id (str): Schema id such as ``trace.v1``.
        rows (Iterable[Sequence]): Row values in header order.

    Returns:
        Path: The written file.
    """
    columns = [column["name"] for column in load_schema(schema_id)["columns"]]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    # Output writing is single-owner per file.
    count = 0
    with open(path, "w", newline="", encoding="utf8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise InternalError(f"{schema_id} row has {len(row)} values, header has {len(columns)}")
            writer.writerow([format_float(value) for value in row])
            count += 1

    log.debug(f"Wrote {count} rows to {path} ({schema_id})")
    return path


def read_csv(path: Path) -> List[dict]:
    """Read a pinlab CSV back into dictionaries of strings."""
    with open(path, newline="", encoding="utf8") as handle:
        return list(csv.DictReader(handle))


def _to_jsonable(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(path: Path, schema_id: str, payload: dict) -> Path:
    """Write a JSON document tagged with its schema id.

    Raises:
        InternalError: The payload misses a key the schema requires.
    """
    document = {"schema": schema_id, **payload}
    missing = [key for key in load_schema(schema_id).get("required", []) if key not in document]
    if missing:
        raise InternalError(f"{schema_id} document misses {', '.join(missing)}")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf8") as handle:
        json.dump(document, handle, indent=2, default=_to_jsonable)
    log.debug(f"Wrote {path} ({schema_id})")
    return path


@dataclass
class RunManifest:
    """Everything needed to reproduce one command run."""

    command: str
    config: dict
    argv: List[str]
    seed: Optional[int] = None
    version: str = ARTIFACT_VERSION
    started_at: str = field(default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat())
    elapsed_seconds: float = 0.0
    outputs: List[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    _clock: float = field(default_factory=time.perf_counter, repr=False)

    def add_output(self, path: Path) -> Path:
        self.outputs.append(Path(path).name)
        return path

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "argv": self.argv,
            "seed": self.seed,
            "version": self.version,
            "rng": BIT_GENERATOR,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "started_at": self.started_at,
            "elapsed_seconds": self.elapsed_seconds,
            "outputs": self.outputs,
            "diagnostics": self.diagnostics,
        }

    def finish(self, output_dir: Path) -> Path:
        """Stamp the timing, write manifest.json and record the run in the ledger."""
        self.elapsed_seconds = time.perf_counter() - self._clock
        path = write_json(Path(output_dir, "manifest.json"), "manifest.v1", self.to_dict())
        database.record_run(self.to_dict(), output_dir)
        log.info(f"{self.command} finished in {self.elapsed_seconds:.2f}s, outputs: {', '.join(self.outputs)}")
        return path


def read_manifest(path: Path) -> dict:
    with open(path, encoding="utf8") as handle:
        return json.load(handle)
