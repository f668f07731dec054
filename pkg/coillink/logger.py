"""
Logging setup for coillink.

Library modules only call logging.getLogger(__name__); handlers are attached
here, by the command-line front end.
"""
import logging
import os
import sys
from typing import Optional, TextIO

PACKAGE_LOGGER_NAME = "coillink"

_LEVEL_COLORS = {
    "DEBUG": "\033[36m",
    "INFO": "\033[32m",
    "WARNING": "\033[33m",
    "ERROR": "\033[31m",
    "CRITICAL": "\033[1;31m",
}
_RESET = "\033[0m"


def use_color(stream: TextIO) -> bool:
    """Color only interactive streams, and never when NO_COLOR is set"""
    if "NO_COLOR" in os.environ:
        return False
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())


class _LevelColorFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)
        color = _LEVEL_COLORS.get(record.levelname)
        if color:
            text = text.replace(record.levelname, f"{color}{record.levelname}{_RESET}", 1)
        return text


class Logger:
    """Package logger with a console handler and an optional file handler"""

    FORMAT = '%(asctime)s | %(levelname)-8s | %(name)s | %(message)s'
    DATEFMT = '%Y-%m-%d %H:%M:%S'

    def __init__(self, name: str = PACKAGE_LOGGER_NAME, log_level: str = "WARNING",
                 log_file: Optional[str] = None, stream: Optional[TextIO] = None):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(log_level)
        self.logger.propagate = False
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            handler.close()

        stream = stream if stream is not None else sys.stderr
        formatter_cls = _LevelColorFormatter if use_color(stream) else logging.Formatter
        console_handler = logging.StreamHandler(stream)
        console_handler.setFormatter(formatter_cls(fmt=self.FORMAT, datefmt=self.DATEFMT))
        self.logger.addHandler(console_handler)

        # File output is never colored
        if log_file:
            file_handler = logging.FileHandler(log_file, encoding="utf-8")
            file_handler.setFormatter(logging.Formatter(fmt=self.FORMAT, datefmt=self.DATEFMT))
            self.logger.addHandler(file_handler)


def configure_logging(log_level: Optional[str] = None, log_file: Optional[str] = None,
                      stream: Optional[TextIO] = None) -> Logger:
    """Attach handlers to the package logger.

    The level falls back to COIL_LINK_LOG_LEVEL, then WARNING.
    """
    level = (log_level or os.environ.get("COIL_LINK_LOG_LEVEL") or "WARNING").upper()
    return Logger(PACKAGE_LOGGER_NAME, level, log_file, stream)
