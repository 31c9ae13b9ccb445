import logging
import os
from pathlib import Path

log = logging.getLogger(__name__)

# Values used when the environment does not set a variable.
DEFAULTS = {
    "LOG_LEVEL": "NOTSET",
    "PINLAB_OUTPUT_DIR": "output",
    "PINLAB_LOGS_DIR": "logs",
    "PINLAB_DATABASE_URL": "",
    "PINLAB_WORKERS": "1",
}


def get_value(name: str):
    """Return a configuration value from the environment.

    Decimal strings come back as int and other numeric strings as float,
    anything else is returned as the raw string.

    Args:
        name (str): Environment variable name.

    Returns:
        The parsed value, or the default from DEFAULTS when unset.
    """
    value = os.getenv(name)
    if value is None or value == "":
        value = DEFAULTS.get(name)
    if value is None:
        return None

    # If the entry's value consists of only numbers, return it as an int.
    if value.isdecimal():
        return int(value)

    try:
        return float(value)
    except ValueError:
        # Otherwise, return the value normally (as a string by default).
        return value


def output_dir(override: str = None) -> Path:
    """Return the output directory, creating it when missing."""
    path = Path(override or get_value("PINLAB_OUTPUT_DIR"))
    path.mkdir(parents=True, exist_ok=True)
    return path
