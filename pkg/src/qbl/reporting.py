"""Report documents, CSV tables and the append-only result cache."""
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import threading
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
CACHE_FILE = "records.jsonl"
# fields that legitimately differ between two identical runs
TIMING_FIELDS = ("created_at", "elapsed_seconds")

_write_lock = threading.Lock()


def code_version() -> str:
    """Package version plus a digest of the module sources."""
    from . import __version__
    h = hashlib.sha256()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return f"{__version__}+{h.hexdigest()[:12]}"


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return to_jsonable(obj.to_dict())
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _float17(v: float) -> str:
    return format(v, ".17g")


def build_report(command: str, params: dict, result, elapsed: float, threads: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": to_jsonable(params),
        "result": to_jsonable(result),
        "provenance": {"code_version": code_version(),
                       "elapsed_seconds": float(elapsed),
                       "threads": int(threads)},
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


def dumps_json(doc: dict) -> str:
    # Python's float repr is the shortest string that round-trips, never
    # more than 17 significant digits
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def strip_timing(doc):
    if isinstance(doc, dict):
        return {k: strip_timing(v) for k, v in doc.items() if k not in TIMING_FIELDS}
    if isinstance(doc, list):
        return [strip_timing(v) for v in doc]
    return doc


# ---------------------------------------------------------------- CSV

CSV_COLUMNS = {
    "count": ["B", "canonical_count", "thin_excluded", "split", "split_boundary",
              "predicted", "ratio", "elapsed_seconds", "thread_count"],
    "series": ["p", "factor", "method", "r_used"],
    "constants": ["method", "value", "abs_error_bound", "sample_budget"],
    "fiber-y": ["y", "radius", "filter", "count", "det_squared", "rho", "lambda1",
                "lambda2", "lambda3", "shortest"],
    "fiber-x": ["x", "ybound", "count", "sigma", "series", "predicted"],
    "verify": ["name", "passed", "elapsed_seconds", "detail"],
}


def csv_rows(command: str, result: dict):
    if command == "series":
        return result["factors"]
    if command == "constants":
        return result["estimates"]
    if command == "verify":
        return [dict(c, detail=json.dumps(c.get("detail"), sort_keys=True)) for c in result["checks"]]
    if command == "fiber-y":
        m = result.get("minima") or [None] * 3
        return [dict(result, lambda1=m[0], lambda2=m[1], lambda3=m[2],
                     y=" ".join(map(str, result["y"])),
                     shortest=" ".join(map(str, result.get("shortest") or [])))]
    if command == "fiber-x":
        return [dict(result, x=" ".join(map(str, result["x"])))]
    return [result]


def dumps_csv(command: str, result: dict) -> str:
    rows = csv_rows(command, result)
    cols = CSV_COLUMNS.get(command) or sorted(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _float17(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def write_report(doc: dict, fmt: str = "json", out=None) -> str:
    """Serialize doc; write it to out (a path) when given.  Returns the text."""
    if fmt == "json":
        text = dumps_json(doc)
    elif fmt == "csv":
        text = dumps_csv(doc["command"], doc["result"])
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out is not None:
        Path(out).write_text(text)
    return text


def parse_report(text: str) -> dict:
    return json.loads(text)


# ---------------------------------------------------------------- cache

def default_cache_dir() -> Path:
    return Path(os.environ.get("QBL_CACHE_DIR", "cache"))


def fingerprint(command: str, params: dict, version: str = None) -> str:
    key = json.dumps({"command": command, "params": to_jsonable(params),
                      "code_version": version or code_version()}, sort_keys=True)
    return hashlib.sha256(key.encode()).hexdigest()


class ResultCache:
    """JSON-lines store; append-only, the latest record for a fingerprint wins."""

    def __init__(self, directory=None):
        self.dir = Path(directory) if directory is not None else default_cache_dir()
        self.path = self.dir / CACHE_FILE

    def lookup(self, fp: str):
        if not self.path.exists():
            return None
        hit = None
        with self.path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError:
                    continue   # a torn final line from an interrupted write
                if rec.get("fingerprint") == fp and rec.get("schema_version") == SCHEMA_VERSION:
                    hit = rec
        return hit

    def append(self, fp: str, command: str, params: dict, result, elapsed: float) -> dict:
        rec = {"schema_version": SCHEMA_VERSION, "fingerprint": fp, "command": command,
               "params": to_jsonable(params), "result": to_jsonable(result),
               "elapsed_seconds": float(elapsed),
               "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
        line = json.dumps(rec, sort_keys=True, allow_nan=False) + "\n"
        with _write_lock:
            self.dir.mkdir(parents=True, exist_ok=True)
            with self.path.open("a") as fh:
                fh.write(line)
        return rec
