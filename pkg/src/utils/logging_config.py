"""Logging configuration for the CLI and its worker processes."""

import logging
import sys
from pathlib import Path
from typing import Optional


DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
WORKER_FORMAT = "%(asctime)s - %(processName)s - %(name)s - %(levelname)s - %(message)s"


def _level(name: str) -> int:
    return getattr(logging, name.upper(), logging.INFO)


def setup_logging(
    level: str = "INFO",
    log_file: Optional[str] = None,
    log_format: Optional[str] = None
) -> None:
    """Route log records to stdout and, optionally, a file.

    numpy ``RuntimeWarning``s raised inside rollouts are captured into the
    ``py.warnings`` logger so they land in the same stream as everything else.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log file path; its directory is created
        log_format: Optional custom format string
    """
    numeric_level = _level(level)
    formatter = logging.Formatter(log_format or DEFAULT_FORMAT)

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)
    root_logger.handlers = []

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_path)
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    logging.captureWarnings(True)
    logging.getLogger("py.warnings").setLevel(numeric_level)


def setup_worker_logging(level: str = "WARNING") -> None:
    """Minimal stderr logging for pool workers.

    Spawned workers start with an unconfigured root logger; without this
    their warnings are lost. Records carry the process name.
    """
    root_logger = logging.getLogger()
    if root_logger.handlers:
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(WORKER_FORMAT))
    root_logger.addHandler(handler)
    root_logger.setLevel(max(_level(level), logging.WARNING))
    logging.captureWarnings(True)
