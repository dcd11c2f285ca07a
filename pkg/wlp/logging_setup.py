"""
Logging Setup - Structured Engine Logging
=========================================
Configures the `wlp` logger hierarchy. Results go to stdout, so every
handler here writes to stderr or to a file.

Features:
- Plain console format for interactive use
- JSON structured records (one object per line)
- Optional rotating log file
- Solver/transform context fields passed through `extra=`

Author: WLP Engine
Version: 1.0.0
"""

import json
import logging
import sys
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from typing import Optional

ROOT_LOGGER = 'wlp'

CONTEXT_FIELDS = ('semiring', 'mode', 'iterations', 'residual', 'atoms', 'rules')


# ============================================================
# FORMATTERS
# ============================================================

class JSONFormatter(logging.Formatter):
    """Custom JSON formatter for structured logging"""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON"""
        log_data = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'module': record.module,
            'function': record.funcName,
            'line': record.lineno
        }

        if record.exc_info:
            log_data['exception'] = self.formatException(record.exc_info)

        for field in CONTEXT_FIELDS:
            if hasattr(record, field):
                log_data[field] = getattr(record, field)

        return json.dumps(log_data, default=str)


# ============================================================
# LOGGER CONFIGURATION
# ============================================================

class EngineLogger:
    """
    Handler setup for the engine's logger tree.

    Re-running it replaces the handlers, so the CLI and tests can call it
    as often as they like.
    """

    def __init__(
        self,
        log_level: str = 'WARNING',
        json_format: bool = False,
        log_file: Optional[str] = None
    ):
        self.log_level = getattr(logging, str(log_level).upper(), logging.WARNING)
        self.logger = logging.getLogger(ROOT_LOGGER)
        self.logger.setLevel(self.log_level)
        self.logger.handlers = []
        self.logger.propagate = False

        self._add_console_handler(json_format)
        if log_file:
            self._add_file_handler(log_file)

    def _add_console_handler(self, json_format: bool):
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(self.log_level)
        if json_format:
            console_handler.setFormatter(JSONFormatter())
        else:
            console_handler.setFormatter(logging.Formatter(
                '[%(asctime)s] %(levelname)s [%(name)s] %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S'
            ))
        self.logger.addHandler(console_handler)

    def _add_file_handler(self, log_file: str):
        # Rotate after 10MB, keep 5 backups
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,
            backupCount=5
        )
        file_handler.setLevel(self.log_level)
        file_handler.setFormatter(JSONFormatter())
        self.logger.addHandler(file_handler)

    def get_logger(self) -> logging.Logger:
        return self.logger


def configure_logging(
    level: str = 'WARNING',
    json_format: bool = False,
    log_file: Optional[str] = None
) -> logging.Logger:
    """Configure the `wlp` logger and return it."""
    return EngineLogger(level, json_format, log_file).get_logger()
