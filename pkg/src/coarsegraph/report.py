"""Structured checker verdicts, serializable to deterministic JSON."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass
class AnalysisReport:
    """Outcome of one checker run: verdict, witness material, provenance."""

    check: str
    holds: bool
    params: dict = field(default_factory=dict)
    mode: str = "exhaustive"
    seed: Optional[int] = None
    witness: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict[str, Any]:
        obj = {
            "check": self.check,
            "holds": self.holds,
            "params": self.params,
            "mode": self.mode,
            "witness": self.witness,
            "details": self.details,
        }
        if self.seed is not None:
            obj["seed"] = self.seed
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, default=_jsonable)


def _jsonable(value):
    if isinstance(value, (frozenset, set)):
        return sorted(value)
    if isinstance(value, tuple):
        return list(value)
    if hasattr(value, "to_json_obj"):
        return value.to_json_obj()
    if hasattr(value, "item"):  # numpy scalars
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value)!r}")


def input_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]
