# Copyright (c) 2025 RP-Toolbox contributors
# SPDX-License-Identifier: AGPL-3.0-or-later

from pathlib import Path, PurePosixPath
import logging
# Create a logger for the toolbox helpers
logger = logging.getLogger(__name__)


def _suffix_matches(path: PurePosixPath, extensions) -> bool:
    if extensions is None:
        return True
    normalized = {e if e.startswith(".") else "." + e for e in extensions}
    return path.suffix in normalized


def _parse(path_str) -> PurePosixPath | None:
    try:
        path = PurePosixPath(path_str)
    except TypeError:
        logger.error(f"Invalid POSIX path: {path_str}")
        return None
    if path.name in ("", ".", ".."):
        logger.info(f"Invalid file name in path: {path_str}")
        return None
    return path


def is_readable_file(path_str, extensions=None) -> bool:
    """An existing regular file whose suffix is one of ``extensions`` (any when None)."""
    path = _parse(path_str)
    if path is None:
        return False
    if not _suffix_matches(path, extensions):
        logger.info(f"File extension of {path_str} is not one of {extensions}.")
        return False
    try:
        return Path(path_str).is_file()
    except PermissionError:
        logger.error(f"Permission denied for path: {path_str}")
        return False
    except OSError:
        logger.error(f"OS error when accessing path: {path_str}")
        return False


def is_writable_target(path_str, extensions=None) -> bool:
    """A file name with an allowed suffix whose parent directory exists."""
    path = _parse(path_str)
    if path is None:
        return False
    if not _suffix_matches(path, extensions):
        logger.info(f"File extension of {path_str} is not one of {extensions}.")
        return False
    try:
        if not Path(path_str).parent.is_dir():
            logger.info(f"Parent directory does not exist for path: {path_str}")
            return False
        return not Path(path_str).is_dir()
    except PermissionError:
        logger.error(f"Permission denied for path: {path_str}")
        return False
    except OSError:
        logger.error(f"OS error when accessing path: {path_str}")
        return False
