"""Unit tests for logging helpers."""

import logging

from rich.logging import RichHandler

from maassforge.log import ROOT_LOGGER_NAME, configure_logging, get_logger


class TestLogging:
    def test_namespace(self):
        assert get_logger("maassforge.qseries").name == "MaassForge.maassforge.qseries"

    def test_configure_installs_one_handler(self):
        """Test that repeated configuration replaces the rich handler."""
        logger = logging.getLogger(f"{ROOT_LOGGER_NAME}.test")
        configure_logging("DEBUG", logger=logger)
        configure_logging("WARNING", logger=logger)
        assert len(logger.handlers) == 1
        assert isinstance(logger.handlers[0], RichHandler)
        assert logger.level == logging.WARNING
        assert logger.propagate is False
