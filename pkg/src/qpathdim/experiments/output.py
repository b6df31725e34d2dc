"""Writing result tables: CSV with '#' metadata lines, and a JSON twin."""

from __future__ import annotations

import json
import math
import time
from pathlib import Path

from .runner import ResultTable

__all__ = ["emit_results", "jsonable", "table_body_csv"]


def jsonable(obj):
    """Recursively replace non-finite floats with strings so the JSON is strict."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return jsonable(obj.item())
    return obj


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float) or hasattr(v, "item"):
        v = float(v)
        return repr(v) if math.isfinite(v) else jsonable(v)
    return str(v)


def table_body_csv(table: ResultTable) -> str:
    """Header plus data rows: the part of the CSV that is run-independent."""
    lines = [",".join(table.columns)]
    lines += [",".join(_cell(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def _dump(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, allow_nan=False)


def emit_results(table: ResultTable, out_dir, formats=("csv", "json"), stamp: str | None = None) -> list[Path]:
    """Write ``<mode>-<timestamp>.csv`` and/or ``.json`` into ``out_dir``."""
    if not table.rows:
        raise ValueError("refusing to write an empty result table")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = stamp or time.strftime("%Y%m%dT%H%M%S")
    stem = f"{table.mode}-{stamp}"
    written = []
    if "csv" in formats:
        path = out / f"{stem}.csv"
        meta = [f"# mode: {table.mode}"]
        meta += [f"# {k}: {_dump(v)}" for k, v in table.metadata.items()]
        if table.summary:
            meta.append(f"# summary: {_dump(table.summary)}")
        path.write_text("\n".join(meta) + "\n" + table_body_csv(table))
        written.append(path)
    if "json" in formats:
        path = out / f"{stem}.json"
        doc = {
            "mode": table.mode,
            "metadata": table.metadata,
            "columns": table.columns,
            "rows": [list(r) for r in table.rows],
            "series": table.series,
            "summary": table.summary,
        }
        path.write_text(json.dumps(jsonable(doc), indent=1, sort_keys=True, allow_nan=False) + "\n")
        written.append(path)
    return written
