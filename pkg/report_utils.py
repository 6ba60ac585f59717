import csv
import io
import json
import logging
import math
from typing import Any, Iterable, Optional

import numpy as np
from pydantic import BaseModel

from summa.config import VERSION

logger = logging.getLogger(__name__)


def to_jsonable(obj: Any) -> Any:
    """Plain JSON data from pydantic models, numpy values and containers.

    Non-finite floats become the strings "inf", "-inf" and "nan".
    """
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump(mode="python"))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def envelope(command: str, config: dict[str, Any], result: Any) -> dict[str, Any]:
    """Every report carries {version, seed, config} next to its result."""
    return {
        "version": VERSION,
        "seed": config.get("seed"),
        "config": to_jsonable(config),
        "command": command,
        "result": to_jsonable(result),
    }


def render_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _flatten(obj: Any, prefix: str = "") -> dict[str, Any]:
    if isinstance(obj, dict):
        out: dict[str, Any] = {}
        for k in sorted(obj):
            out.update(_flatten(obj[k], f"{prefix}{k}."))
        return out
    if isinstance(obj, list) and obj and not isinstance(obj[0], (dict, list)):
        return {prefix[:-1]: ";".join(str(v) for v in obj)}
    if isinstance(obj, list):
        return {prefix[:-1]: json.dumps(obj, sort_keys=True)}
    return {prefix[:-1]: obj}


def table_rows(result: Any) -> list[dict[str, Any]]:
    """CSV rows for a result: one per entry of its `rows` list, else a single row."""
    if isinstance(result, dict) and isinstance(result.get("rows"), list) and result["rows"]:
        return [_flatten(row) for row in result["rows"]]
    return [_flatten(result)]


def render_csv(doc: dict[str, Any], columns: Optional[Iterable[str]] = None) -> str:
    """Comment header with the envelope, then a flat table of the result."""
    rows = table_rows(doc["result"])
    if columns is None:
        seen: dict[str, None] = {}
        for row in rows:
            for key in row:
                seen.setdefault(key, None)
        columns = list(seen)
    columns = list(columns)
    buf = io.StringIO()
    buf.write(f"# version={doc['version']} seed={doc['seed']} command={doc['command']}\n")
    buf.write(f"# config={json.dumps(doc['config'], sort_keys=True)}\n")
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def render(doc: dict[str, Any], output: str) -> str:
    if output == "csv":
        return render_csv(doc)
    return render_json(doc)
