"""Root-logger setup for the ``hyposelect`` command.

The console gets ``LEVEL: message`` (timestamps with ``-v``). The rotating
file under ``$XDG_DATA_HOME/hyposelect/logs`` always records DEBUG, so a
failed bench run can be read back round by round without rerunning it.
Library modules only call :func:`get_logger`.
"""

import logging
import logging.handlers
import sys
from pathlib import Path

from . import paths

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
SIMPLE_FORMAT = "%(levelname)s: %(message)s"

LOG_MAX_BYTES = 10 * 1024 * 1024
LOG_BACKUPS = 5


def console_level(verbose: bool, quiet: bool) -> int:
    """``-q`` wins over ``-v``."""
    if quiet:
        return logging.ERROR
    return logging.DEBUG if verbose else logging.INFO


def _file_handler(log_file: str | Path | None) -> logging.Handler:
    path = Path(log_file) if log_file else paths.LOG_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.handlers.RotatingFileHandler(
        path, maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUPS
    )
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(DEFAULT_FORMAT))
    return handler


def setup_logging(
    verbose: bool = False,
    quiet: bool = False,
    log_file: str | Path | None = None,
    log_to_file: bool = True,
) -> None:
    """Replace the root logger's handlers.

    Args:
        verbose: DEBUG on the console: margins, cut counts, slice indices
        quiet: ERROR only on the console
        log_file: Override for the rotating log path
        log_to_file: Set False to skip the file handler entirely
    """
    level = console_level(verbose, quiet)
    root = logging.getLogger()
    root.handlers.clear()

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.setFormatter(logging.Formatter(DEFAULT_FORMAT if verbose else SIMPLE_FORMAT))
    root.addHandler(console)

    if log_to_file:
        root.addHandler(_file_handler(log_file))
        root.setLevel(logging.DEBUG)
    else:
        root.setLevel(level)

    # scipy's OptimizeWarning and numpy RuntimeWarnings land in the log.
    logging.captureWarnings(True)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
