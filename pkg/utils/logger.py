import logging
import sys
from logging import Logger, handlers
from pathlib import Path

import coloredlogs

from utils import config

# TRACE sits below DEBUG; per-site sampler output goes there. Keep it off for long runs.
TRACE_LEVEL = logging.TRACE = 5
logging.addLevelName(TRACE_LEVEL, "TRACE")


def monkeypatch_trace(self: logging.Logger, msg: str, *args, **kwargs) -> None:
    """Log at TRACE level, same arguments as ``Logger.debug``.

    Example: ``log.trace("sweep %d pinned %d sites", sweep, count)``
    """
    if self.isEnabledFor(TRACE_LEVEL):
        self._log(TRACE_LEVEL, msg, args, **kwargs)


# Every logger gets .trace()
Logger.trace = monkeypatch_trace

# Same layout for console and file
FORMAT_STRING = "%(asctime)s | %(name)s | %(levelname)s | %(message)s"

# Third party loggers that are too chatty for a run log.
NOISY_LOGGERS = ("joblib", "numba", "matplotlib", "sqlalchemy", "alembic", "urllib3")


def setup_logging(level: str = None, log_dir: str = None) -> logging.Logger:
    """Configure the root logger once for a CLI run.

    Library modules only create module loggers; this is called by the entry point.

    Args:
        level (str, optional): Log level name, defaults to the LOG_LEVEL environment variable.
        log_dir (str, optional): Folder for the rotating log file, defaults to PINLAB_LOGS_DIR.

    Returns:
        logging.Logger: The configured root logger.
    """
    log_level = level or config.get_value("LOG_LEVEL")
    root_log = logging.getLogger()

    # Re-running inside one interpreter (tests, replay) must not stack handlers.
    if getattr(root_log, "_pinlab_configured", False):
        root_log.setLevel(log_level)
        return root_log

    # Rotating run log under the logs folder
    log_file = Path(log_dir or config.get_value("PINLAB_LOGS_DIR"), "pinlab.log")
    log_file.parent.mkdir(parents=True, exist_ok=True)
    file_handler = handlers.RotatingFileHandler(log_file, maxBytes=5242880, backupCount=7, encoding="utf8")
    file_handler.setFormatter(logging.Formatter(FORMAT_STRING))

    root_log.setLevel(log_level)
    root_log.addHandler(file_handler)

    # Console output, TRACE dimmed
    coloredlogs.DEFAULT_LEVEL_STYLES = {
        **coloredlogs.DEFAULT_LEVEL_STYLES,
        "trace": {"color": 246},
        "critical": {"background": "red"},
        "debug": coloredlogs.DEFAULT_LEVEL_STYLES["info"]
    }
    coloredlogs.DEFAULT_LOG_FORMAT = FORMAT_STRING
    coloredlogs.DEFAULT_LOG_LEVEL = log_level
    coloredlogs.install(level=log_level, logger=root_log, stream=sys.stdout)

    # Third-party chatter stays at WARNING unless everything is requested
    if root_log.level != 0:
        for name in NOISY_LOGGERS:
            logging.getLogger(name).setLevel(logging.WARNING)

    root_log._pinlab_configured = True
    return root_log
