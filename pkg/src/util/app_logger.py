from __future__ import annotations
from typing import TYPE_CHECKING

from datetime import datetime
import logging
from logging.handlers import QueueHandler, QueueListener
import os
import queue
import re

from pythonjsonlogger.jsonlogger import JsonFormatter
from state import AppState

if TYPE_CHECKING:
    from check.base_check import Check

TEXT_FORMAT = "t=%(elapsed)ss::%(levelname)s::%(name)s: %(message)s"
JSON_FORMAT = "%(elapsed)s %(levelname)s %(name)s %(message)s"


class ElapsedInjector(logging.Filter):
    """Stamps records with the seconds since the run started."""

    def __init__(self, app_state: AppState):
        super().__init__()
        self.app_state = app_state

    def filter(self, record):
        record.elapsed = f"{self.app_state.elapsed():.3f}"
        return True


def run_name(app_state: AppState) -> str:
    """
    Log file stem for one run, e.g. smooth2d-canonical-osgood. Slope-field ids
    carry a path, so anything outside [A-Za-z0-9._-] becomes "_".
    """
    config = app_state.config
    return re.sub(r"[^A-Za-z0-9._-]+", "_", f"{config.suite}-{config.family_id}")


def log_paths(directory: str, stem: str) -> tuple[str, str]:
    """Timestamped (json, text) log paths under `directory`, created when missing."""
    os.makedirs(directory, exist_ok=True)
    stamp = datetime.now().strftime("%Y-%m-%d_%Hh%Mm%Ss")
    base = os.path.join(directory, f"{stem}-{stamp}")
    return f"{base}.json", f"{base}.log"


def init_logger(
    app_state: AppState,
    level,
    logger_name=None,
    stdout=False,
    directory="./logs",
) -> tuple[logging.Logger, QueueListener]:
    """
    Initializes a logger that can be used throughout the program.

    Records go through a queue so that sweep cells running on worker threads
    never write to a file handler concurrently. The JSON file keeps every
    level together with the check, delta and grid_j extras of per-cell
    records; the text file keeps INFO and above.

    Arguments:
        app_state (AppState): Supplies the run name and the elapsed time stamped on records.
        level: The logging level to log at.
        stdout (bool): Whether or not to print Log to stdout. False by default.
        directory (str): Log directory, PWD/logs by default.

    Returns:
        logger, queue_listener (tuple[logging.Logger, QueueListener]): Logger objects.
    """
    json_path, text_path = log_paths(directory, run_name(app_state))

    logger = logging.getLogger(logger_name)
    logger.setLevel(level)

    text_formatter = logging.Formatter(fmt=TEXT_FORMAT)
    json_formatter = JsonFormatter(
        fmt=JSON_FORMAT,
        rename_fields={
            "elapsed": "time",
            "levelname": "level",
            "message": "msg",
        },
    )

    log_queue = queue.Queue()
    queue_handler = QueueHandler(log_queue)
    queue_handler.addFilter(ElapsedInjector(app_state))
    logger.addHandler(queue_handler)

    json_file_handler = logging.FileHandler(json_path)
    json_file_handler.setFormatter(json_formatter)

    text_file_handler = logging.FileHandler(text_path)
    text_file_handler.setLevel(logging.INFO)
    text_file_handler.setFormatter(text_formatter)

    handlers: list[logging.Handler] = [json_file_handler, text_file_handler]
    if stdout:
        stream_handler = logging.StreamHandler()
        stream_handler.setLevel(logging.INFO)
        stream_handler.setFormatter(text_formatter)
        handlers.append(stream_handler)

    listener = QueueListener(log_queue, *handlers, respect_handler_level=True)
    listener.start()
    return logger, listener


class NamedLoggerAdapter(logging.LoggerAdapter):
    def __init__(self, logger, prefix: str, extra=None, merge_extra=False):
        super().__init__(logger, extra, merge_extra)
        self.prefix = prefix

    def process(self, msg, kwargs):
        msg, kwargs = super().process(msg, kwargs)
        return f"[{self.prefix}] {msg}", kwargs


def init_check_logger(check: Check) -> logging.LoggerAdapter:
    """
    Logger for one sweep cell: named check.<name>, messages prefixed with the
    cell, and the cell's coordinates attached as extras.
    """
    return NamedLoggerAdapter(
        logging.getLogger(f"check.{check.name}"),
        str(check),
        extra=check.log_extra(),
        merge_extra=True,
    )
