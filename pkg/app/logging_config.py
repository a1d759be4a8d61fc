"""
Logging Setup
=============

Description: Root logger configuration shared by the HTTP app and the CLI
Version: 1.0.0

Console handler on stdout, error handler on stderr and, when LOG_TO_STDOUT is
disabled, a file handler rotating at midnight.
"""

import logging
import os
import sys
from logging.handlers import TimedRotatingFileHandler

from app.config import LOG_LEVEL, LOG_PATH, LOG_TO_STDOUT

logger = logging.getLogger(__name__)

FORMATTER = logging.Formatter(
    fmt="%(asctime)s %(levelname)-5s [%(name)s] %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)


def _file_handler(level: int):
    try:
        log_dir = os.path.dirname(LOG_PATH)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir, exist_ok=True)

        handler = TimedRotatingFileHandler(
            filename=LOG_PATH,
            when="midnight",
            backupCount=7,
            encoding="utf-8"
        )
        handler.setFormatter(FORMATTER)
        handler.setLevel(level)
        return handler
    except OSError as e:
        logger.warning(f"Could not create file handler: {e}")
        return None


def configure_logging(level: str | None = None, console_stream=None) -> logging.Logger:
    """
    Install the application handlers on the root logger.

    Existing root handlers are removed first, so repeated calls (CLI
    invocations inside one test process, app reloads) never duplicate output.

    Args:
        level: overrides LOG_LEVEL
        console_stream: stream for the console handler (default sys.stdout)

    Returns:
        logging.Logger: the configured root logger
    """
    numeric_level = getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO)

    console_handler = logging.StreamHandler(console_stream or sys.stdout)
    console_handler.setFormatter(FORMATTER)
    console_handler.setLevel(numeric_level)

    error_handler = logging.StreamHandler(sys.stderr)
    error_handler.setFormatter(FORMATTER)
    error_handler.setLevel(logging.ERROR)

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)

    # Remove any existing handlers to avoid duplicates
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    root_logger.addHandler(console_handler)
    root_logger.addHandler(error_handler)

    if not LOG_TO_STDOUT:
        file_handler = _file_handler(numeric_level)
        if file_handler:
            root_logger.addHandler(file_handler)
            logger.info(f"File logging enabled: {LOG_PATH}")
    else:
        logger.debug("Logging to stdout/stderr enabled")

    return root_logger
