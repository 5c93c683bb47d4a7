"""Loguru sink setup shared by the CLI and the HTTP service."""

import sys

from loguru import logger

LOG_FORMAT = "{time:HH:mm:ss} | {level:8} | {message}"

_LEVELS = {0: "WARNING", 1: "INFO", 2: "DEBUG"}


def configure(verbosity=0, sink=None):
    """
    Replace loguru's default handler with a single stderr sink.

    verbosity: 0 -> WARNING, 1 -> INFO, 2+ -> DEBUG
    """
    logger.remove()
    level = _LEVELS.get(min(int(verbosity), 2), "WARNING")
    logger.add(sink if sink is not None else sys.stderr, level=level, format=LOG_FORMAT)
    return level
