"""Logging Configuration."""

from __future__ import annotations

import logging
import logging.config
import sys
from typing import TYPE_CHECKING, Any

import structlog

from wdce.lib import settings
from wdce.lib.log.utils import EventFilter, msgspec_json_renderer, round_floats

if TYPE_CHECKING:
    from collections.abc import Sequence

    from structlog import BoundLogger
    from structlog.types import Processor

__all__ = (
    "default_processors",
    "stdlib_processors",
    "configure",
    "get_logger",
)


default_processors: list[Any] = [
    structlog.contextvars.merge_contextvars,
    structlog.processors.add_log_level,
    round_floats,
    structlog.processors.TimeStamper(fmt="iso", utc=True),
]
"""Default processors to apply to all loggers. See :mod:`structlog.processors` for more information."""

stdlib_processors: list[Any] = [
    structlog.processors.TimeStamper(fmt="iso", utc=True),
    structlog.stdlib.add_log_level,
    structlog.stdlib.ExtraAdder(),
    EventFilter(["color_message"]),
    structlog.stdlib.ProcessorFormatter.remove_processors_meta,
]
"""Processors to apply to the stdlib logger. See :mod:`structlog.stdlib` for more information."""

if sys.stderr.isatty() or "pytest" in sys.modules:
    LoggerFactory: Any = structlog.WriteLoggerFactory
    log_stream: Any = sys.stderr
    console_processor = structlog.dev.ConsoleRenderer(
        colors=sys.stderr.isatty(),
        exception_formatter=structlog.dev.plain_traceback,
    )
    default_processors.extend([console_processor])
    stdlib_processors.append(console_processor)
else:
    LoggerFactory = structlog.BytesLoggerFactory
    log_stream = sys.stderr.buffer
    default_processors.extend([msgspec_json_renderer])
    stdlib_processors.append(structlog.processors.JSONRenderer())

_configured = False


def configure(processors: Sequence[Processor] | None = None) -> None:
    """Call to configure `structlog` and the stdlib root logger on startup.

    Safe to call more than once; only the first call has an effect unless
    ``processors`` is passed explicitly.

    Args:
        processors: A list of processors to apply to all loggers, defaults to :data:`default_processors`.

    Returns:
        None
    """
    global _configured  # noqa: PLW0603
    if _configured and processors is None:
        return
    structlog.configure(
        cache_logger_on_first_use=True,
        logger_factory=LoggerFactory(file=log_stream),
        processors=list(processors or default_processors),
        wrapper_class=structlog.make_filtering_bound_logger(settings.log.LEVEL),
    )
    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "standard": {"()": structlog.stdlib.ProcessorFormatter, "processors": stdlib_processors},
            },
            "handlers": {
                "console": {"class": "logging.StreamHandler", "formatter": "standard", "stream": "ext://sys.stderr"},
            },
            "root": {
                "level": logging.getLevelName(logging.DEBUG if settings.project.DEBUG else settings.log.LEVEL),
                "handlers": ["console"],
            },
        },
    )
    _configured = True


def get_logger(*args: Any, **kwargs: Any) -> BoundLogger:
    """Return a configured logger for the given name.

    Args:
        *args: Positional arguments to pass to :func:`get_logger() <structlog.get_logger()>`
        **kwargs: Keyword arguments to pass to :func:`get_logger() <structlog.get_logger()>`

    Returns:
        Logger: A configured logger instance
    """
    configure()
    return structlog.getLogger(*args, **kwargs)  # type: ignore[no-any-return]
