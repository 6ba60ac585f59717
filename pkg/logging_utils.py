import hashlib
import json
import logging
import os
from contextvars import ContextVar
from typing import Any

import numpy as np

# Per-run correlation id (set by the CLI for the duration of one command)
run_id_ctx: ContextVar[str | None] = ContextVar("run_id", default=None)


class RunIdFilter(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:  # pragma: no cover
        record.run_id = run_id_ctx.get() or "-"
        return True


def setup_logging() -> None:
    """Configure CLI logging.

    - LOG_LEVEL controls verbosity (default: INFO)
    - Adds run_id field to all log records
    - Logs go to stderr; reports on stdout stay clean
    """
    level_name = os.getenv("LOG_LEVEL", "INFO").upper().strip()
    level = getattr(logging, level_name, logging.INFO)
    if not isinstance(level, int):
        level = logging.INFO

    root = logging.getLogger()
    root.setLevel(level)

    # Avoid duplicate handlers when main() runs more than once in a process.
    if not root.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter(fmt="%(asctime)s %(levelname)s [%(name)s] [run=%(run_id)s] %(message)s")
        handler.setFormatter(formatter)
        root.addHandler(handler)

    filt = RunIdFilter()
    for h in root.handlers:
        if not any(isinstance(f, RunIdFilter) for f in h.filters):
            h.addFilter(filt)

    # Reduce noisy libraries a bit (still overrideable with LOG_LEVEL=DEBUG)
    if level > logging.DEBUG:
        logging.getLogger("hypothesis").setLevel(logging.WARNING)


def make_run_id(config: dict[str, Any]) -> str:
    """Deterministic id: identical configurations log under the same run id."""
    canonical = json.dumps(config, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _truncate(s: str, limit: int) -> str:
    if len(s) > limit:
        s = s[:limit] + f"…(+{len(s) - limit} chars)"
    return s


def sanitize_for_log(value: Any, *, max_chars: int = 2000, max_items: int = 16) -> str:
    """Render a matrix, model or report for a log line.

    Numeric arrays longer than ``max_items`` collapse to shape and range; the
    result is cut at ``max_chars``.
    """
    if hasattr(value, "model_dump"):
        value = value.model_dump(mode="json")
    try:
        s = json.dumps(_compact(value, max_items), ensure_ascii=False, default=str)
    except (TypeError, ValueError):
        s = repr(value)
    return _truncate(s, max_chars)


def _compact(obj: Any, max_items: int) -> Any:
    if isinstance(obj, np.ndarray):
        if obj.size > max_items and np.issubdtype(obj.dtype, np.number):
            return {"shape": list(obj.shape), "min": float(obj.min()), "max": float(obj.max())}
        return obj.tolist()
    if isinstance(obj, dict):
        return {str(k): _compact(v, max_items) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        if len(obj) > max_items and all(isinstance(v, (int, float)) for v in obj):
            return _compact(np.asarray(obj, dtype=float), max_items)
        return [_compact(v, max_items) for v in obj]
    return obj
