import logging
import sys
import warnings

import pytest

from src.utils.logging_config import DEFAULT_FORMAT, setup_logging, setup_worker_logging


@pytest.fixture
def root_logger():
    root = logging.getLogger()
    saved_handlers, saved_level = root.handlers[:], root.level
    warnings_level = logging.getLogger("py.warnings").level
    yield root
    for handler in root.handlers:
        if handler not in saved_handlers:
            handler.close()
    root.handlers = saved_handlers
    root.setLevel(saved_level)
    logging.getLogger("py.warnings").setLevel(warnings_level)
    logging.captureWarnings(False)


def test_console_handler_on_stdout(root_logger):
    setup_logging(level="debug")
    assert root_logger.level == logging.DEBUG
    assert len(root_logger.handlers) == 1
    handler = root_logger.handlers[0]
    assert handler.stream is sys.stdout
    assert handler.formatter._fmt == DEFAULT_FORMAT


def test_unknown_level_falls_back_to_info(root_logger):
    setup_logging(level="chatty")
    assert root_logger.level == logging.INFO


def test_log_file_directory_created(root_logger, tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    setup_logging(level="INFO", log_file=str(log_file), log_format="%(message)s")
    logging.getLogger("src.test").info("catalog ready")
    for handler in root_logger.handlers:
        handler.flush()
    assert log_file.read_text().strip() == "catalog ready"


def test_python_warnings_reach_the_log(root_logger, tmp_path):
    log_file = tmp_path / "run.log"
    setup_logging(level="WARNING", log_file=str(log_file), log_format="%(message)s")
    assert logging.getLogger("py.warnings").level == logging.WARNING
    warnings.warn("overflow encountered in multiply", RuntimeWarning)
    for handler in root_logger.handlers:
        handler.flush()
    assert "overflow encountered in multiply" in log_file.read_text()


def test_worker_logging_keeps_existing_handlers(root_logger):
    setup_logging(level="INFO")
    handlers = root_logger.handlers[:]
    setup_worker_logging("DEBUG")
    assert root_logger.handlers == handlers
    assert root_logger.level == logging.INFO


def test_worker_logging_on_bare_process(root_logger):
    root_logger.handlers = []
    setup_worker_logging("DEBUG")
    assert len(root_logger.handlers) == 1
    assert root_logger.handlers[0].stream is sys.stderr
    assert root_logger.level == logging.WARNING
