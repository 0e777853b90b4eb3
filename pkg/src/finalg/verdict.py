from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Outcome(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    """Result of a check: holds, fails (with a witness) or inconclusive (cap hit)."""

    outcome: Outcome
    witness: Any = None
    note: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome is Outcome.FAILS and self.witness is None:
            raise ValueError("a failing verdict needs a witness")

    @property
    def holds(self) -> bool:
        return self.outcome is Outcome.HOLDS

    @property
    def fails(self) -> bool:
        return self.outcome is Outcome.FAILS

    @property
    def inconclusive(self) -> bool:
        return self.outcome is Outcome.INCONCLUSIVE

    @property
    def exit_code(self) -> int:
        return {Outcome.HOLDS: 0, Outcome.FAILS: 1, Outcome.INCONCLUSIVE: 2}[self.outcome]

    def to_json(self) -> dict:
        out = {"outcome": self.outcome.value}
        if self.note:
            out["note"] = self.note
        if self.witness is not None:
            out["witness"] = to_jsonable(self.witness)
        if self.details:
            out["details"] = {k: to_jsonable(v) for k, v in self.details.items()}
        return out


def holds(note: str = "", witness=None, **details) -> Verdict:
    return Verdict(Outcome.HOLDS, witness, note, details)


def fails(witness, note: str = "", **details) -> Verdict:
    return Verdict(Outcome.FAILS, witness, note, details)


def inconclusive(note: str, **details) -> Verdict:
    return Verdict(Outcome.INCONCLUSIVE, None, note, details)


def to_jsonable(obj):
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(obj)]
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)
