"""
Tests for the logging configuration and the JSON formatter.
"""

import json
import logging

import pytest

from ddalpha.log_setup import ROOT_LOGGER, JsonFormatter, configure_logging, new_run_id


@pytest.fixture
def restore_logger():
    logger = logging.getLogger(ROOT_LOGGER)
    handlers, level, propagate = list(logger.handlers), logger.level, logger.propagate
    yield logger
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    for handler in handlers:
        logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = propagate


def test_json_formatter_merges_extra_fields():
    record = logging.LogRecord("ddalpha.test", logging.INFO, __file__, 1, "AMR %.2f", (0.125,), None)
    record.replication = 3
    entry = json.loads(JsonFormatter().format(record))
    assert entry["message"] == "AMR 0.12"
    assert entry["level"] == "INFO"
    assert entry["replication"] == 3


def test_configure_replaces_handlers(restore_logger, tmp_path):
    configure_logging(logging.DEBUG)
    logger = configure_logging(logging.INFO, json_output=True, log_file=str(tmp_path / "run.log"))
    ours = [h for h in logger.handlers if getattr(h, "_ddalpha_handler", False)]
    assert len(ours) == 2
    assert logger.level == logging.INFO

    logging.getLogger("ddalpha.simulation").info("finished", extra={"run_id": "run_x"})
    for handler in ours:
        handler.flush()
    line = (tmp_path / "run.log").read_text(encoding="utf-8").strip().splitlines()[-1]
    assert json.loads(line)["run_id"] == "run_x"


def test_run_ids_are_unique():
    assert new_run_id() != new_run_id()
    assert new_run_id().startswith("run_")
