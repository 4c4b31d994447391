# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

import logging
import sys
from enum import IntEnum, StrEnum

LOG_FORMAT = "%(asctime)s : [%(name)s:%(levelname)s] - %(message)s"
DATE_FORMAT = "%d/%m/%Y %H:%M:%S"
DEFAULT_LOG_FILE = "rp_toolbox.log"


class LoggingLevel(IntEnum):
    DEBUG = logging.DEBUG
    INFO = logging.INFO
    WARNING = logging.WARNING
    ERROR = logging.ERROR
    CRITICAL = logging.CRITICAL

    @classmethod
    def from_flag(cls, name) -> "LoggingLevel":
        """Level named by the --log-level flag; INFO for unknown names."""
        flags = {"debug": cls.DEBUG, "warnings": cls.WARNING, "errors": cls.ERROR, "critical": cls.CRITICAL}
        return flags.get(name, cls.INFO)


class LoggingDestination(StrEnum):
    CONSOLE = "Standard error"
    FILE = "File"


def set_up_logging(level=LoggingLevel.INFO, destination=LoggingDestination.CONSOLE, log_file=None):
    """Route every record of the package to one handler on the root logger.

    Earlier handlers are dropped, so calling it again (once per CLI run)
    does not duplicate records.
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
        if isinstance(handler, logging.FileHandler):
            handler.close()
    if destination == LoggingDestination.FILE:
        handler = logging.FileHandler(log_file or DEFAULT_LOG_FILE, mode="w", encoding="utf-8")
    else:
        # Reports may go to stdout
        handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)
