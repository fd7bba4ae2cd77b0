from __future__ import annotations

import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from pathlib import Path

# One live file plus two rotated backups, 512 KiB each.
_LOG_FILE_BYTES = 512 * 1024
_LOG_FILE_BACKUPS = 2

_LINE_FORMAT = "%(asctime)s.%(msecs)03d %(levelname)s [%(name)s] %(message)s"
_TIME_FORMAT = "%H:%M:%S"


def setup_logging(level: str | int = logging.WARNING, log_file: Path | None = None) -> None:
    """Attach a stderr handler to the root logger, and a rotating file handler if asked.

    Reports own standard output, so console logging goes to stderr. The file
    handler records DEBUG whatever the console level is. Only the first call
    in a process installs handlers.
    """
    root = logging.getLogger()
    if root.handlers:
        return

    formatter = logging.Formatter(_LINE_FORMAT, datefmt=_TIME_FORMAT)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    root.addHandler(console_handler)
    root.setLevel(level)

    if log_file is not None:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=_LOG_FILE_BYTES,
            backupCount=_LOG_FILE_BACKUPS,
            encoding="utf-8",
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)
        root.setLevel(logging.DEBUG)
