"""Run configuration and verification-report serialization.

Reports carry a fixed top-level field set (command, inputs, expected,
observed, stderr, z_score, verdict, duration, seed, version).  ``expected``
is either a target value, when a z-score criterion applies, or a two-sided
interval [lo, hi] with None for an open side.  JSON key order is fixed and
CSV is the flat projection of the same fields, so equal seeds reproduce
reports byte for byte apart from ``duration``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .errors import InvalidParams

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

FORMATS = ("json", "csv")

DEFAULT_SEED = 1729
DEFAULT_SAMPLES = 200_000


@dataclass
class RunConfig:
    """Shared command plumbing: seed, sample budget, tolerances, output."""

    seed: int = DEFAULT_SEED
    n_samples: int = DEFAULT_SAMPLES
    tolerances: dict[str, float] = field(default_factory=dict)
    out: str | None = None
    format: str = "json"

    def __post_init__(self) -> None:
        if self.format not in FORMATS:
            raise InvalidParams(f"format must be one of {FORMATS}")
        for name, value in self.tolerances.items():
            if not value > 0:
                raise InvalidParams(f"tolerance {name!r} must be positive, got {value}")

    def tol(self, name: str, default: float) -> float:
        return self.tolerances.get(name, default)


@dataclass
class VerificationReport:
    """One verification outcome; ``verdict`` is pass, fail or inconclusive."""

    command: str
    inputs: dict[str, Any]
    expected: Any
    observed: Any
    stderr: float | None
    z_score: float | None
    verdict: str
    duration: float | None
    seed: int
    version: str = __version__

    def to_dict(self) -> dict[str, Any]:
        out = {
            "command": self.command,
            "inputs": jsonable(self.inputs),
            "expected": jsonable(self.expected),
            "observed": jsonable(self.observed),
            "stderr": jsonable(self.stderr),
            "z_score": jsonable(self.z_score),
            "verdict": self.verdict,
            "duration": None if self.duration is None else round(float(self.duration), 6),
            "seed": int(self.seed),
            "version": self.version,
        }
        if out["duration"] is None:
            del out["duration"]
        return out


def jsonable(value: Any) -> Any:
    """Recursively coerce numpy scalars/arrays and non-finite floats."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if value != value:
            return "nan"
        if value in (float("inf"), float("-inf")):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    return value


def in_interval(value: float, interval) -> bool:
    """Membership of value in [lo, hi], None meaning unbounded."""
    lo, hi = interval
    if lo is not None and value < lo:
        return False
    if hi is not None and value > hi:
        return False
    return True


def render_report(report: VerificationReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    return render_table([report.to_dict()])


def render_table(rows: list[dict[str, Any]], fmt: str = "csv") -> str:
    """Rows as CSV with a header, or as a JSON array when asked."""
    if fmt == "json":
        return json.dumps([jsonable(r) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    if not rows:
        return ""
    header = list(rows[0].keys())
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(jsonable(row.get(k))) for k in header])
    return buf.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, (dict, list)):
        return json.dumps(value, separators=(",", ":"))
    if value is None:
        return ""
    return str(value)
