"""Result type shared by the three selectors."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

from .regex_literal import escape_bytes, unescape_bytes

__all__ = ["SelectionResult", "Deadline"]


@dataclass
class SelectionResult:
    grams: list = field(default_factory=list)
    per_iteration: list = field(default_factory=list)  # (candidate_count, selected_count)
    stopped_early: bool = False
    timed_out: bool = False
    method: str = ""
    warnings: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.grams)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "grams": [escape_bytes(g) for g in self.grams],
            "per_iteration": [list(p) for p in self.per_iteration],
            "stopped_early": self.stopped_early,
            "timed_out": self.timed_out,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SelectionResult":
        raw = json.loads(text)
        return cls(
            grams=[unescape_bytes(g) for g in raw["grams"]],
            per_iteration=[tuple(p) for p in raw["per_iteration"]],
            stopped_early=raw["stopped_early"],
            timed_out=raw.get("timed_out", False),
            method=raw.get("method", ""),
            warnings=raw.get("warnings", []),
        )


class Deadline:
    """Wall-clock budget checked cooperatively inside selection loops."""

    def __init__(self, seconds: Optional[float]):
        self.at = None if seconds is None else time.monotonic() + seconds

    def expired(self) -> bool:
        return self.at is not None and time.monotonic() >= self.at
