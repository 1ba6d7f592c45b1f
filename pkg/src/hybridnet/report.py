"""Verification reports shared by every checker in the package.

Reports never raise on a failed check; they collect issues and witnesses
so a model can be debugged from the output alone.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def jsonable(value: Any) -> Any:
    """Convert numpy values, tuples and tagged points into plain JSON data."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if hasattr(value, "to_dict"):
        return jsonable(value.to_dict())
    if value is None or isinstance(value, (bool, int, str)):
        return value
    return repr(value)


@dataclass
class Report:
    """Outcome of a sampled or exhaustive check."""

    kind: str
    passed: bool = True
    issues: list[str] = field(default_factory=list)
    witnesses: list[dict[str, Any]] = field(default_factory=list)
    metrics: dict[str, Any] = field(default_factory=dict)

    # cap on stored witnesses; the issue count is still exact
    max_witnesses: int = 20

    def fail(self, issue: str, **witness: Any) -> None:
        self.passed = False
        self.issues.append(issue)
        if witness and len(self.witnesses) < self.max_witnesses:
            self.witnesses.append(witness)

    def merge(self, other: "Report", prefix: str = "") -> None:
        if not other.passed:
            self.passed = False
        self.issues.extend(f"{prefix}{i}" for i in other.issues)
        room = self.max_witnesses - len(self.witnesses)
        self.witnesses.extend(other.witnesses[: max(room, 0)])

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "issues": list(self.issues),
            "witnesses": jsonable(self.witnesses),
            "metrics": jsonable(self.metrics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class RelatednessReport(Report):
    """Residuals of the two relatedness squares (flow and jump)."""

    max_vf_residual: float = 0.0
    max_jump_mismatch: float = 0.0
    node_mismatches: int = 0
    tol: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        d = super().to_dict()
        d.update(
            max_vf_residual=jsonable(self.max_vf_residual),
            max_jump_mismatch=jsonable(self.max_jump_mismatch),
            node_mismatches=self.node_mismatches,
            tol=self.tol,
        )
        return d
