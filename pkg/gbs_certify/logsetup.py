"""Structured logging configuration."""

import logging
import os
import sys

import structlog


def _stderr_logger(*args) -> structlog.PrintLogger:
    # sys.stderr is looked up per logger so redirected streams are honoured
    return structlog.PrintLogger(file=sys.stderr)


def setup(identity: str | None = None, level: str | None = None, json_logs: bool = False) -> None:
    """
    Configure structlog for the process and bind the run identity.

    :param identity: Identity bound to every log event (e.g. the experiment name)
    :type identity: str | None
    :param level: Log level name; defaults to ``LOG_LEVEL`` or ``INFO``
    :type level: str | None
    :param json_logs: Render events as JSON lines instead of console text
    :type json_logs: bool

    Examples
    --------
    >>> setup("gbs-certify", "DEBUG")
    >>> structlog.get_logger("x").debug("hello", details={"a": 1})
    """
    level_name = (level or os.environ.get("LOG_LEVEL") or "INFO").upper()
    level_value = logging.getLevelName(level_name)
    if not isinstance(level_value, int):
        level_value = logging.INFO

    renderer = (
        structlog.processors.JSONRenderer(sort_keys=True)
        if json_logs
        else structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty())
    )

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level_value),
        logger_factory=_stderr_logger,
        cache_logger_on_first_use=False,
    )

    structlog.contextvars.clear_contextvars()
    if identity:
        structlog.contextvars.bind_contextvars(identity=identity)


def configure_default() -> None:
    """Route log events to stderr unless the application configured structlog already."""
    if not structlog.is_configured():
        setup()
