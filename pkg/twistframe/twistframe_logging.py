import logging
from logging import Logger
from logging import config as logging_config
from typing import Callable

from twistframe import config

try:
    logging_config.fileConfig(config.get_config("logging"))
except KeyError:
    logging.basicConfig(format="%(asctime)s %(name)-12s %(levelname)-8s %(message)s", level=logging.INFO)

_LEVELS = {
    logging.CRITICAL: "critical",
    logging.ERROR: "error",
    logging.WARNING: "warning",
    logging.INFO: "info",
    logging.DEBUG: "debug",
}


def set_log_func(loglevel: int, logger: Logger) -> Callable[..., None]:
    """Bound logging method for a numeric level; unknown levels log at INFO."""
    log_func: Callable[..., None] = getattr(logger, _LEVELS.get(loglevel, "info"))
    return log_func


def log_truncation(logger: Logger, loglevel: int, what: str, ratio: float, tolerance: float) -> bool:
    """Report a truncation whose relative size exceeds the tolerance.

    Returns True when something was logged.
    """
    if not ratio > tolerance:
        return False
    set_log_func(loglevel, logger)("%s (relative size %.3e, tolerance %.1e)", what, ratio, tolerance)
    return True


def init_logging(loggername: str) -> Logger:
    return logging.getLogger(f"twistframe.{loggername}")
