"""Tagged loggers: every record reads ``[COMPONENT][name] message``."""

from __future__ import annotations

import logging

_ROOT = "qchanest"
_FORMAT = "[%(component)s][%(shortname)s] %(message)s"


class _TagFilter(logging.Filter):
    def __init__(self, component: str) -> None:
        super().__init__()
        self.component = component

    def filter(self, record: logging.LogRecord) -> bool:
        record.component = self.component
        record.shortname = record.name.rsplit(".", 1)[-1]
        return True


def get_logger(component: str, name: str) -> logging.Logger:
    logger = logging.getLogger(f"{_ROOT}.{component.lower()}.{name}")
    if not any(isinstance(item, _TagFilter) for item in logger.filters):
        logger.addFilter(_TagFilter(component.upper()))
    return logger


def configure(verbose: bool = False) -> None:
    root = logging.getLogger(_ROOT)
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
