"""
Structured Logging Configuration

Uses structlog for structured logging with JSON output outside development
and pretty console output in development. Everything goes to stderr: stdout is
reserved for series and reports.
"""

import logging
import sys
from pathlib import Path
from typing import Any

import structlog
from structlog.typing import EventDict, Processor, WrappedLogger


# ============================================================
# Custom Processors
# ============================================================

def add_app_context(
    logger: WrappedLogger, method_name: str, event_dict: EventDict
) -> EventDict:
    """Add application context to log events."""
    event_dict["app"] = "haupt"
    return event_dict


def shorten_series(
    logger: WrappedLogger, method_name: str, event_dict: EventDict
) -> EventDict:
    """Keep huge integers (coefficients, moduli) from flooding the log."""
    for key, value in list(event_dict.items()):
        if isinstance(value, int) and not isinstance(value, bool) and value.bit_length() > 256:
            event_dict[key] = f"<int {value.bit_length()} bits>"
    return event_dict


# ============================================================
# Logging Setup
# ============================================================

def setup_logging(level: str | None = None, fmt: str | None = None) -> None:
    """
    Configure structured logging for the application.

    In development: pretty console output with colors.
    Otherwise: JSON lines, optionally mirrored to a file.
    """
    from haupt.config import get_settings

    settings = get_settings()
    level = (level or settings.logging.level).upper()
    fmt = fmt or settings.logging.format
    is_development = settings.environment == "development" and fmt != "json"

    shared_processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.add_log_level,
        add_app_context,
        shorten_series,
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.TimeStamper(fmt="iso"),
    ]

    if is_development:
        processors = [*shared_processors, structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty())]
    else:
        processors = [
            *shared_processors,
            structlog.processors.dict_tracebacks,
            structlog.processors.JSONRenderer(),
        ]

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(logging.getLevelName(level)),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=logging.getLevelName(level))

    if settings.logging.file and not is_development:
        log_file = Path(settings.logging.file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(logging.Formatter("%(message)s"))
        logging.root.addHandler(file_handler)


# ============================================================
# Logger Instance
# ============================================================

logger = structlog.get_logger()


def get_logger(service: str) -> Any:
    """Logger tagged with ``service``; resolved lazily so setup_logging() applies to it."""
    return structlog.get_logger(service=service)


# ============================================================
# Convenience Functions
# ============================================================

def log_check(name: str, verdict: str, window: int, duration_ms: float) -> None:
    """Log the outcome of one check."""
    logger.info(
        "Check finished",
        check=name,
        verdict=verdict,
        window=window,
        duration_ms=round(duration_ms, 2),
    )
