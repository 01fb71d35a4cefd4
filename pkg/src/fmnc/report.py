"""Canonical report emission (JSON with sorted keys and 17-digit floats, or CSV)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

VERDICTS = ("pass", "fail", "inconclusive", "info")


@dataclass
class Check:
    id: str
    anchor: str
    margin: float | None
    tolerance: float | None
    verdict: str
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"bad verdict {self.verdict!r}")

    @classmethod
    def assert_le(cls, id, anchor, margin, tolerance, **details) -> "Check":
        return cls(id, anchor, float(margin), float(tolerance),
                   "pass" if margin <= tolerance else "fail", details)

    def to_dict(self) -> dict:
        return {"id": self.id, "anchor": self.anchor, "margin": self.margin,
                "tolerance": self.tolerance, "verdict": self.verdict, "details": self.details}


def build_report(suite: str, header: dict, checks: list[Check]) -> dict:
    anchors: dict[str, list[str]] = {}
    for c in checks:
        anchors.setdefault(c.anchor, []).append(c.id)
    summary = {v: sum(c.verdict == v for c in checks) for v in VERDICTS}
    first_fail = next((c.to_dict() for c in checks if c.verdict == "fail"), None)
    return {"suite": suite, "header": header, "checks": [c.to_dict() for c in checks],
            "anchors": anchors, "summary": summary, "first_failure": first_fail}


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def canonical_json(obj: Any) -> str:
    """Sorted keys, floats with 17 significant digits, non-finite floats as strings."""
    return _render(_plain(obj)) + "\n"


def _render(x: Any) -> str:
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            return json.dumps("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
        s = format(x, ".17g")
        if "e" not in s and "." not in s and "n" not in s:
            s += ".0"
        return s
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, list):
        return "[" + ",".join(_render(v) for v in x) + "]"
    if isinstance(x, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{_render(x[k])}" for k in sorted(x)) + "}"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "margin", "tolerance", "verdict"])
    for c in report["checks"]:
        w.writerow([c["id"], _csv_num(c["margin"]), _csv_num(c["tolerance"]), c["verdict"]])
    return buf.getvalue()


def _csv_num(x):
    return "" if x is None else format(x, ".17g")


def emit_report(report: dict, path: str | Path | None, fmt: str = "json") -> str:
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    text = canonical_json(report) if fmt == "json" else to_csv(report)
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
    return text


def report_schema() -> dict:
    return json.loads(resources.files("fmnc").joinpath("report_schema.json").read_text())


def validate_report(report: dict) -> None:
    import jsonschema

    jsonschema.validate(report, report_schema())
