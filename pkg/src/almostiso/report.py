"""Verification reports: structured check records with deterministic output.

Reports serialize to a single JSON document (schema_version 1) with fields
``suite``, ``environment``, ``checks[]``, ``pass``.  Two runs with the same
configuration and seed produce byte-identical JSON: keys are sorted, floats
use the shortest round-trip representation, and wall-clock timings are only
included when explicitly requested.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1

__all__ = ["CheckRecord", "VerificationReport", "inputs_digest", "SCHEMA_VERSION"]


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return repr(value)
    return value


def inputs_digest(config: dict) -> str:
    """Stable digest of a configuration dictionary."""
    canon = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass
class CheckRecord:
    """One verification check: a measured value against its tolerance."""

    check_id: str
    digest: str
    measured: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)
    runtime_s: float | None = None

    def as_dict(self, with_timings: bool = False) -> dict:
        out = {
            "id": self.check_id,
            "inputs_digest": self.digest,
            "measured": _jsonable(self.measured),
            "tolerance": _jsonable(self.tolerance),
            "pass": bool(self.passed),
            "detail": _jsonable(self.detail),
        }
        if with_timings and self.runtime_s is not None:
            out["runtime_s"] = self.runtime_s
        return out


@dataclass
class VerificationReport:
    """A named suite of checks; overall pass iff every check passes."""

    suite: str
    environment: dict
    checks: list = field(default_factory=list)

    def add(self, record: CheckRecord) -> None:
        self.checks.append(record)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self, with_timings: bool = False) -> dict:
        return {
            "suite": self.suite,
            "schema_version": SCHEMA_VERSION,
            "environment": _jsonable(self.environment),
            "checks": [c.as_dict(with_timings) for c in sorted(self.checks, key=lambda c: c.check_id)],
            "pass": self.passed,
        }

    def to_json(self, with_timings: bool = False) -> str:
        return json.dumps(self.as_dict(with_timings), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        lines = ["suite,check_id,inputs_digest,measured,tolerance,pass"]
        for c in sorted(self.checks, key=lambda c: c.check_id):
            lines.append(
                f"{self.suite},{c.check_id},{c.digest},{_jsonable(c.measured)},"
                f"{_jsonable(c.tolerance)},{c.passed}"
            )
        return "\n".join(lines) + "\n"
