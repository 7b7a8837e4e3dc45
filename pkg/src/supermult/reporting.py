"""Report records and their on-disk formats.

A :class:`ReportRecord` is written either as one JSON line (appended) or as
a CSV table. Floats are printed with 17 significant digits, which
round-trips every double exactly. ``timestamp`` and ``timings`` are the only
fields allowed to differ between two runs with the same seed; everything
else is the *payload*.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import jsonschema

from . import __version__

SCHEMA_VERSION = "1.0"

RECORD_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "timestamp", "command", "inputs", "outputs", "software_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "timestamp": {"type": "string", "pattern": r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?Z$"},
        "command": {
            "enum": [
                "nu-p",
                "certify-eps",
                "lemma1",
                "lemma2-check",
                "violation",
                "crossover",
                "sweep-wh",
                "scaling",
                "rank-check",
            ]
        },
        "inputs": {"type": "object"},
        "outputs": {
            "type": "object",
            "properties": {"rows": {"type": "array", "items": {"type": "object"}}},
        },
        "software_version": {"type": "string"},
        "timings": {"type": "object"},
    },
    "additionalProperties": False,
}

_VOLATILE = ("timestamp", "timings")


@dataclass
class ReportRecord:
    command: str
    inputs: dict
    outputs: dict
    schema_version: str = SCHEMA_VERSION
    timestamp: str = field(default_factory=lambda: utc_now())
    software_version: str = __version__
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "timestamp": self.timestamp,
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "software_version": self.software_version,
        }
        if self.timings:
            out["timings"] = self.timings
        return out

    @classmethod
    def from_dict(cls, data) -> "ReportRecord":
        return cls(
            command=data["command"],
            inputs=data["inputs"],
            outputs=data["outputs"],
            schema_version=data["schema_version"],
            timestamp=data["timestamp"],
            software_version=data["software_version"],
            timings=data.get("timings", {}),
        )

    def payload(self) -> str:
        """Serialised record minus the volatile fields."""
        return dumps({k: v for k, v in self.to_dict().items() if k not in _VOLATILE})


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"  # keep floats distinguishable from ints on reload
    return text


def dumps(obj) -> str:
    """Compact JSON with 17-significant-digit floats and insertion-ordered keys."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def validate_record(data) -> None:
    """Raise ``jsonschema.ValidationError`` if ``data`` is not a valid record dict."""
    jsonschema.validate(data, RECORD_SCHEMA)


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = dumps(v)
        else:
            out[key] = v
    return out


def table_rows(record: ReportRecord) -> list:
    """The CSV projection: ``outputs["rows"]`` if present, else one flattened row."""
    rows = record.outputs.get("rows")
    if rows is None:
        rows = [{k: v for k, v in record.outputs.items()}]
    return [_flatten(r) for r in rows]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return v


def write_report(record: ReportRecord, path, fmt="json") -> None:
    """Append a JSON line, or (over)write a CSV table with a header."""
    path = Path(path)
    validate_record(json.loads(dumps(record.to_dict())))
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    if fmt == "json":
        with path.open("a", encoding="utf-8") as fh:
            fh.write(dumps(record.to_dict()) + "\n")
    elif fmt == "csv":
        rows = table_rows(record)
        header = []
        for r in rows:
            header += [k for k in r if k not in header]
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
            writer.writeheader()
            for r in rows:
                writer.writerow({k: _cell(r.get(k)) for k in header})
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_reports(path) -> list:
    with Path(path).open(encoding="utf-8") as fh:
        return [ReportRecord.from_dict(json.loads(line)) for line in fh if line.strip()]
