import json
import os
from datetime import datetime, timezone
from typing import Any, Dict

from .config import settings


def _timestamp() -> str:
    return datetime.now(timezone.utc).replace(tzinfo=None).isoformat() + "Z"


def _append(path: str, payload: Dict[str, Any]) -> None:
    """One NDJSON line; the directory is created on first use."""
    os.makedirs(os.path.dirname(path), exist_ok=True)
    # numpy integers and other non-JSON values are written with str()
    line = json.dumps({"timestamp": _timestamp(), **payload}, ensure_ascii=False, default=str)
    with open(path, "a", encoding="utf-8") as f:
        f.write(line + "\n")


def log_run_event(event: Dict[str, Any]) -> None:
    if settings.log_runs:
        _append(settings.run_log_path, event)


def log_error(message: str, extra: Dict[str, Any] | None = None) -> None:
    _append(settings.error_log_path, {"level": "ERROR", "message": message, "extra": extra or {}})
