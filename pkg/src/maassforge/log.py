"""Logging helpers.

Library modules obtain loggers through ``get_logger(__name__)``; only the
command line entry point installs a handler.
"""

import logging
from typing import Literal

from rich.console import Console
from rich.logging import RichHandler

ROOT_LOGGER_NAME = "MaassForge"

LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


def get_logger(name: str) -> logging.Logger:
    """Get a logger nested under the MaassForge namespace.

    Args:
        name: the name of the logger, usually ``__name__``

    Returns:
        a configured logger instance
    """
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")


def configure_logging(
    level: LogLevel | int = "INFO",
    logger: logging.Logger | None = None,
    enable_rich_tracebacks: bool = True,
) -> None:
    """Configure logging for maassforge.

    Args:
        level: the log level to use
        logger: the logger to configure, defaults to the MaassForge root
        enable_rich_tracebacks: whether rich renders exception tracebacks
    """
    if logger is None:
        logger = logging.getLogger(ROOT_LOGGER_NAME)

    handler = RichHandler(
        console=Console(stderr=True),
        rich_tracebacks=enable_rich_tracebacks,
        show_path=False,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))

    logger.setLevel(level)
    for existing in list(logger.handlers):
        logger.removeHandler(existing)
    logger.addHandler(handler)
    logger.propagate = False
