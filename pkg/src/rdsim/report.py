"""Report assembly and serialization (JSON, and flattened RFC-4180 CSV).

Report layout (JSON keys, all stable)::

    schema      "rdsim-report/1"
    kind        pendulum | spinchain | born | verify-all
    config      echoed inputs; a valid config file by itself
    results     computed quantities, kind specific
    checks      list of {name, passed, value, threshold}
    passed      true iff every check passed
    timestamp   {started_utc, wall_time_s, ...}: the only non-reproducible field

The CSV form has two columns, ``key,value``. Keys are dotted paths into the
JSON document with list positions in brackets, e.g. ``results.counts.counts[1]``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone

SCHEMA = "rdsim-report/1"


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def build_report(kind: str, config: dict, results: dict, checks: list, timestamp: dict) -> dict:
    return {
        "schema": SCHEMA,
        "kind": kind,
        "config": config,
        "results": results,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
        "timestamp": timestamp,
    }


def _clean(x):
    """Plain JSON types; non-finite floats become strings so output stays valid JSON."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def to_json(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"


def flatten(obj, prefix: str = ""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        if not obj:
            yield prefix, "[]"
        for i, v in enumerate(obj):
            yield from flatten(v, f"{prefix}[{i}]")
    elif obj is None:
        yield prefix, ""
    elif isinstance(obj, bool):
        yield prefix, "true" if obj else "false"
    elif isinstance(obj, float):
        yield prefix, repr(obj)
    else:
        yield prefix, str(obj)


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(["key", "value"])
    w.writerows(flatten(_clean(report)))
    return buf.getvalue()


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        return to_csv(report)
    raise ValueError(f"unknown format {fmt!r}")


def strip_timestamp(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timestamp"}
