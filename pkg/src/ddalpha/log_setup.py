"""
Structured logging setup for ddalpha.

Library modules only ever call ``logging.getLogger(__name__)``; the command
line front end calls ``configure_logging`` once to attach handlers to the
``ddalpha`` logger.
"""

import json
import logging
import logging.handlers
import uuid
from datetime import datetime
from typing import Optional

ROOT_LOGGER = "ddalpha"

_STANDARD_ATTRS = frozenset([
    'name', 'msg', 'args', 'levelname', 'levelno', 'pathname', 'filename',
    'module', 'exc_info', 'exc_text', 'stack_info', 'lineno', 'funcName',
    'created', 'msecs', 'relativeCreated', 'thread', 'threadName',
    'processName', 'process', 'taskName', 'message',
])


class JsonFormatter(logging.Formatter):
    """JSON formatter for structured logging."""

    def format(self, record):
        log_entry = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        # Merge any extra= fields
        for key, value in record.__dict__.items():
            if key not in _STANDARD_ATTRS:
                log_entry[key] = value

        if record.exc_info:
            log_entry["exc_info"] = self.formatException(record.exc_info)

        return json.dumps(log_entry, ensure_ascii=False, default=str)


def new_run_id() -> str:
    """Generate a short id used to correlate the records of one run."""
    return f"run_{uuid.uuid4().hex[:8]}"


def configure_logging(level: int = logging.WARNING,
                      json_output: bool = False,
                      log_file: Optional[str] = None) -> logging.Logger:
    """
    Attach console (and optionally file) handlers to the ddalpha logger.

    Calling it again replaces the handlers installed by a previous call.

    Args:
        level: Logging level for the ddalpha namespace
        json_output: Emit one JSON object per record instead of plain text
        log_file: Optional path of a rotating log file (always JSON)

    Returns:
        The configured ddalpha logger
    """
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        if getattr(handler, "_ddalpha_handler", False):
            logger.removeHandler(handler)
            handler.close()

    console = logging.StreamHandler()
    if json_output:
        console.setFormatter(JsonFormatter())
    else:
        console.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    console._ddalpha_handler = True
    logger.addHandler(console)

    if log_file:
        file_handler = logging.handlers.RotatingFileHandler(
            log_file, maxBytes=5 * 1024 * 1024, backupCount=3, encoding='utf-8'
        )
        file_handler.setFormatter(JsonFormatter())
        file_handler._ddalpha_handler = True
        logger.addHandler(file_handler)

    logger.setLevel(level)
    logger.propagate = False
    return logger
