"""Run manifests and atomic JSON / CSV / SVG output."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import tempfile
import time
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

PACKAGE = "artifact"


def versions() -> dict[str, str]:
    out = {"python": platform.python_version()}
    for dist in (PACKAGE, "numpy", "scipy", "matplotlib"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = "unknown"
    return out


@dataclass
class RunManifest:
    subcommand: str
    spec_hash: str | None = None
    seed: int | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    versions: dict[str, str] = field(default_factory=versions)
    started: float = field(default_factory=time.time)
    wall_clock_s: float = 0.0
    outputs: dict[str, str] = field(default_factory=dict)
    argv: list[str] = field(default_factory=list)

    def finish(self) -> "RunManifest":
        self.wall_clock_s = time.time() - self.started
        return self

    def to_dict(self) -> dict:
        return asdict(self)


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy values and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> Path:
    """Write via a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n"


def write_json(path: str | os.PathLike, payload: Any) -> Path:
    return atomic_write_text(path, dumps(payload))


def write_csv(path: str | os.PathLike, rows: list[dict], columns: list[str] | None = None,
              manifest: RunManifest | None = None) -> Path:
    """CSV table plus a ``<name>.manifest.json`` sidecar when a manifest is given."""
    columns = columns or (list(rows[0].keys()) if rows else [])
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: to_jsonable(row.get(k)) for k in columns})
    out = atomic_write_text(path, buf.getvalue())
    if manifest is not None:
        write_json(sidecar_path(out), manifest.to_dict())
    return out


def sidecar_path(path: str | os.PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


# Envelope written by every CLI subcommand.
RESULT_SCHEMA = {
    "type": "object",
    "required": ["subcommand", "status", "exit_code", "result", "manifest", "input"],
    "properties": {
        "subcommand": {"type": "string"},
        "status": {"type": "string"},
        "exit_code": {"enum": [0, 2]},
        "result": {"type": "object"},
        "input": {"type": "object"},
        "manifest": {
            "type": "object",
            "required": ["subcommand", "seed", "tolerances", "versions", "wall_clock_s", "outputs"],
            "properties": {
                "subcommand": {"type": "string"},
                "spec_hash": {"type": ["string", "null"]},
                "seed": {"type": ["integer", "null"]},
                "tolerances": {"type": "object"},
                "versions": {"type": "object"},
                "wall_clock_s": {"type": "number", "minimum": 0},
                "outputs": {"type": "object", "additionalProperties": {"type": "string"}},
            },
        },
    },
}


def validate_result(payload: dict) -> None:
    """Raise jsonschema.ValidationError if the envelope is malformed."""
    jsonschema.validate(payload, RESULT_SCHEMA)
