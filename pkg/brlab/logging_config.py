"""Logging setup shared by all brlab modules"""
import logging
import sys

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_ROOT = "brlab"
_configured = False


def configure_logging(level: str = None) -> None:
    """Attach a single stderr handler to the package logger.

    Level defaults to BRLAB_LOG_LEVEL (via settings). Calling again only
    updates the level.
    """
    global _configured
    if level is None:
        from brlab.settings import get_settings
        level = get_settings().log_level

    root = logging.getLogger(_ROOT)
    root.setLevel(getattr(logging, str(level).upper(), logging.WARNING))
    if not _configured:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
        root.propagate = False
        _configured = True


def get_logger(name: str) -> logging.Logger:
    """Return a module logger under the brlab namespace"""
    if not _configured:
        configure_logging()
    if not name.startswith(_ROOT):
        name = f"{_ROOT}.{name}"
    return logging.getLogger(name)
