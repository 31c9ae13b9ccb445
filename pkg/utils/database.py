import json
import logging
from pathlib import Path

import dataset
from sqlalchemy import create_engine
from sqlalchemy_utils import database_exists, create_database

from utils import config

log = logging.getLogger(__name__)


def get_db(output_dir: str = None) -> str:
    """ Returns the SQLAlchemy URL of the run ledger. """
    url = config.get_value("PINLAB_DATABASE_URL")
    if url:
        return url

    # Default to a SQLite file next to the run outputs.
    path = Path(output_dir or config.get_value("PINLAB_OUTPUT_DIR"), "pinlab.db")
    path.parent.mkdir(parents=True, exist_ok=True)
    return f"sqlite:///{path.resolve()}"


def setup_db(output_dir: str = None) -> None:
    """ Sets up the tables needed for the run ledger. """
    # Create the database if it doesn't already exist.
    engine = create_engine(get_db(output_dir))
    if not database_exists(engine.url):
        create_database(engine.url)
    engine.dispose()

    # Open a connection to the database.
    db = dataset.connect(get_db(output_dir))

    # Create runs table and columns to store one manifest per command run.
    runs = db.create_table("runs")
    runs.create_column("command", db.types.text)
    runs.create_column("seed", db.types.text)
    runs.create_column("version", db.types.text)
    runs.create_column("started_at", db.types.text)
    runs.create_column("elapsed", db.types.float)
    runs.create_column("manifest", db.types.text)

    # Create ratio_tables table and columns to cache exact enumeration results.
    ratio_tables = db.create_table("ratio_tables")
    ratio_tables.create_column("N", db.types.integer)
    ratio_tables.create_column("eps", db.types.float)
    ratio_tables.create_column("log_ratio", db.types.float)

    # Commit the changes to the database and close the connection.
    db.commit()
    db.close()

    log.debug("Created any missing tables and columns.")


def record_run(manifest: dict, output_dir: str = None) -> int:
    """Insert a manifest into the runs table.

    Args:
        manifest (dict): Serialised RunManifest.
        output_dir (str, optional): Output folder holding the default SQLite ledger.

    Returns:
        int: Primary key of the new row.
    """
    db = dataset.connect(get_db(output_dir))
    row_id = db["runs"].insert(dict(
        command=manifest["command"],
        seed=None if manifest.get("seed") is None else str(manifest["seed"]),
        version=manifest["version"],
        started_at=manifest["started_at"],
        elapsed=manifest["elapsed_seconds"],
        manifest=json.dumps(manifest, default=str),
    ))
    db.commit()
    db.close()
    log.debug(f"Recorded run {row_id} for command {manifest['command']}")
    return row_id


def store_ratios(N: int, eps_grid, log_ratios, output_dir: str = None) -> None:
    """Cache exact log ratios for one N, replacing equal (N, eps) rows."""
    db = dataset.connect(get_db(output_dir))
    table = db["ratio_tables"]
    for eps, value in zip(eps_grid, log_ratios):
        table.upsert(dict(N=int(N), eps=float(eps), log_ratio=float(value)), ["N", "eps"])
    db.commit()
    db.close()


def fetch_ratio(N: int, eps: float, output_dir: str = None):
    """Return a cached exact log ratio, or None when it was never stored."""
    db = dataset.connect(get_db(output_dir))
    row = db["ratio_tables"].find_one(N=int(N), eps=float(eps))
    db.close()
    return None if row is None else row["log_ratio"]
