"""Deterministic result emission.

Time series and sweeps go to CSV (RFC 4180 quoting, header row); reports
go to JSON.  Floats are printed with 17 significant digits so files
round-trip losslessly; every file embeds the resolved config, and the
timestamp is confined to one header line so byte-level diffs of repeated
runs differ nowhere else.
"""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone


def format_float(value: float) -> str:
    return f"{value:.17g}"


def _json_float(value: float) -> str:
    # strict JSON has no Infinity/NaN tokens
    return format_float(value) if math.isfinite(value) else "null"


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, complex):
        return f"{format_float(value.real)}+{format_float(value.imag)}j"
    return str(value)


def _json_fragment(value, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = ",\n".join(
            f"{pad}{json.dumps(str(key))}: {_json_fragment(val, indent, level + 1)}"
            for key, val in value.items()
        )
        return "{\n" + items + "\n" + closing + "}"
    if isinstance(value, (list, tuple)):
        seq = list(value)
        if not seq:
            return "[]"
        flat = all(isinstance(v, (int, float, str, bool)) or v is None for v in seq)
        if flat:
            return "[" + ", ".join(_json_fragment(v, indent, level + 1) for v in seq) + "]"
        items = ",\n".join(f"{pad}{_json_fragment(v, indent, level + 1)}" for v in seq)
        return "[\n" + items + "\n" + closing + "]"
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return json.dumps(value)
    if isinstance(value, float):
        return _json_float(value)
    if isinstance(value, complex):
        return f"[{_json_float(value.real)}, {_json_float(value.imag)}]"
    return json.dumps(str(value))


def dumps_json(value, indent: int = 1) -> str:
    """JSON text with 17-significant-digit floats (insertion order kept)."""
    return _json_fragment(value, indent, 0)


def timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def render_csv(table: list[dict], resolved_config: dict, stamp: str | None = None) -> str:
    """CSV text: comment header (version line, timestamp, embedded config),
    then a header row and the table rows.  Column order follows first
    appearance across rows."""
    columns: list[str] = []
    for row in table:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    buf.write(f"# generated_at: {stamp or timestamp()}\n")
    buf.write("# config: " + json.dumps(resolved_config, sort_keys=True, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(columns)
    for row in table:
        writer.writerow([_format_cell(row[col]) if col in row else "" for col in columns])
    return buf.getvalue()


def render_json(summary: dict, resolved_config: dict, stamp: str | None = None) -> str:
    document = {
        "generated_at": stamp or timestamp(),
        "config": resolved_config,
        "results": summary,
    }
    return dumps_json(document) + "\n"
