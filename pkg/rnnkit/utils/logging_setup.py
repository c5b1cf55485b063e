"""Logging configuration for command-line runs."""
import logging
import os
from typing import Optional

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
ENV_LEVEL = "RNNKIT_LOG_LEVEL"


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Attach a single stderr handler to the ``rnnkit`` logger.

    The level comes from ``level``, then RNNKIT_LOG_LEVEL, then WARNING.
    Calling this again replaces the previous handler.
    """
    name = (level or os.environ.get(ENV_LEVEL) or "WARNING").upper()
    resolved = logging.getLevelName(name)
    if not isinstance(resolved, int):
        resolved = logging.WARNING

    root = logging.getLogger("rnnkit")
    for handler in list(root.handlers):
        if getattr(handler, "_rnnkit", False):
            root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._rnnkit = True
    root.addHandler(handler)
    root.setLevel(resolved)
    return root
