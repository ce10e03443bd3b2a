"""Logging for oscillodx: one ``oscillodx`` logger tree, console plus optional file."""
from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

_ROOT_LOGGER_NAME = "oscillodx"
_FORMAT = "%(asctime)s [%(levelname)s] %(command)s %(name)s: %(message)s"
_DATEFMT = "%Y-%m-%d %H:%M:%S"


class _CommandTag(logging.Filter):
    """Stamp every record with the running subcommand."""

    def __init__(self, command: str) -> None:
        super().__init__()
        self.command = command

    def filter(self, record: logging.LogRecord) -> bool:
        record.command = self.command
        return True


def setup_logging(verbose: bool = False, log_file: Optional[Path] = None, command: Optional[str] = None) -> logging.Logger:
    """Attach console and optional file handlers to the ``oscillodx`` logger.

    Parameters
    ----------
    verbose: bool
        Console at DEBUG instead of INFO. The file always gets DEBUG.
    log_file: Optional[Path]
        Appended to, so one file can collect several runs.
    command: Optional[str]
        Subcommand name written into every line.

    Returns
    -------
    logging.Logger
        The ``oscillodx`` logger.
    """
    root_logger = logging.getLogger(_ROOT_LOGGER_NAME)
    root_logger.setLevel(logging.DEBUG)
    for handler in list(root_logger.handlers):
        handler.close()
        root_logger.removeHandler(handler)

    formatter = logging.Formatter(fmt=_FORMAT, datefmt=_DATEFMT)
    tag = _CommandTag(command or "-")

    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
    console_handler.setFormatter(formatter)
    console_handler.addFilter(tag)
    root_logger.addHandler(console_handler)

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        file_handler.addFilter(tag)
        root_logger.addHandler(file_handler)

    # numpy/scipy RuntimeWarnings land under py.warnings; send them to the same handlers
    logging.captureWarnings(True)
    warnings_logger = logging.getLogger("py.warnings")
    warnings_logger.handlers = list(root_logger.handlers)
    warnings_logger.propagate = False

    root_logger.propagate = False
    return root_logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Return a logger below the ``oscillodx`` root.

    Library modules call this at import time; handlers are only attached by
    :func:`setup_logging`, so an unconfigured library stays silent apart
    from Python's last-resort handler for warnings.
    """
    if name is None or name == _ROOT_LOGGER_NAME:
        return logging.getLogger(_ROOT_LOGGER_NAME)
    if name.startswith(_ROOT_LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{_ROOT_LOGGER_NAME}.{name}")


@contextmanager
def log_elapsed(logger: logging.Logger, what: str, level: int = logging.DEBUG) -> Iterator[None]:
    """Log the wall time spent inside the block."""
    start = time.perf_counter()
    try:
        yield
    finally:
        logger.log(level, "%s took %.2f s", what, time.perf_counter() - start)
