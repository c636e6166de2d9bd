"""
Tagged logging in the `[Component] message` format used across the toolkit.
"""
import logging
import sys

from src.config import LOG_LEVEL

_FORMAT = "[%(name)s] %(message)s"
_configured = set()


def get_logger(tag):
    """Return a logger that prints `[tag] message` lines to stderr."""
    logger = logging.getLogger(tag)
    if tag not in _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        logger.addHandler(handler)
        logger.setLevel(LOG_LEVEL.upper())
        logger.propagate = False
        _configured.add(tag)
    return logger
