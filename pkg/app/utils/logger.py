"""
Logging setup shared by every service.
"""
import logging
import sys
from typing import Optional

from ..core.config import settings

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_configured = False


def configure_logging(level: Optional[str] = None) -> None:
    """
    Install the toolkit handler on the package logger.

    Args:
        level: Log level name; defaults to settings.LOG_LEVEL
    """
    global _configured
    root = logging.getLogger("maxstab")
    if level is not None:
        root.setLevel(level.upper())
    if not _configured:
        if level is None:
            root.setLevel(settings.LOG_LEVEL.upper())
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True


def get_logger(name: str) -> logging.Logger:
    """Return a child of the toolkit logger, configuring handlers on first use."""
    if not _configured:
        configure_logging()
    short = name.rsplit(".", 1)[-1]
    return logging.getLogger(f"maxstab.{short}")
