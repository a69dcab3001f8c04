"""Logging configuration for the application."""

import logging
from datetime import datetime
from pathlib import Path
from typing import Optional

from app.core.config import settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_configured = False


def _file_handler(logs_dir: Path, prefix: str, level: int) -> logging.FileHandler:
    handler = logging.FileHandler(
        logs_dir / f"{prefix}_{datetime.now().strftime('%Y%m%d')}.log",
        encoding='utf-8'
    )
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
    return handler


def setup_logging():
    """Setup logging configuration.

    Console output goes to stderr so that reports on stdout stay byte-stable.
    File handlers are only attached when ``LOG_DIR`` is configured.
    """
    global _configured

    app_logger = logging.getLogger("app")
    error_logger = logging.getLogger("app.errors")
    pipeline_logger = logging.getLogger("app.pipeline")

    if _configured:
        return app_logger, error_logger, pipeline_logger

    level = getattr(logging, settings.EFFECTIVE_LOG_LEVEL, logging.WARNING)

    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
    app_logger.addHandler(console)
    app_logger.setLevel(level)
    app_logger.propagate = False

    error_logger.setLevel(logging.ERROR)
    pipeline_logger.setLevel(level)

    if settings.LOG_DIR:
        logs_dir = Path(settings.LOG_DIR)
        logs_dir.mkdir(parents=True, exist_ok=True)
        app_logger.addHandler(_file_handler(logs_dir, "app", level))
        error_logger.addHandler(_file_handler(logs_dir, "errors", logging.ERROR))
        pipeline_logger.addHandler(_file_handler(logs_dir, "pipeline", logging.INFO))

    _configured = True
    return app_logger, error_logger, pipeline_logger


# Initialize loggers
app_logger, error_logger, pipeline_logger = setup_logging()


def _context(machine: Optional[str], input_word: Optional[str]) -> str:
    context = []
    if machine:
        context.append(f"machine={machine}")
    if input_word is not None:
        context.append(f"input={input_word!r}")
    return f" [{', '.join(context)}]" if context else ""


def log_error(error_message: str, error_details: str = None, machine: str = None, input_word: str = None):
    """Log an error with context."""
    error_logger.error(f"{error_message}{_context(machine, input_word)}")
    if error_details:
        error_logger.error(f"Details: {error_details}")


def log_pipeline_event(stage: str, machine: str = None, input_word: str = None, **details):
    """Log a pipeline stage event."""
    context = [f"stage={stage}"]

    if machine:
        context.append(f"machine={machine}")
    if input_word is not None:
        context.append(f"input={input_word!r}")
    for key, value in details.items():
        context.append(f"{key}={value}")

    context_str = " | ".join(context)
    pipeline_logger.info(f"Pipeline event: {context_str}")


def log_command(command: str, exit_code: int, duration_ms: float = None):
    """Log a command line invocation."""
    context = [f"command={command}", f"exit={exit_code}"]

    if duration_ms:
        context.append(f"duration={duration_ms:.2f}ms")

    context_str = " | ".join(context)
    app_logger.info(f"Command: {context_str}")
