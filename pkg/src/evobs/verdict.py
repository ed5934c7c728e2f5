"""Three-valued axiom outcomes."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Status(str, Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    UNDETERMINED = "Undetermined"

    def __str__(self) -> str:
        return self.value


@dataclass
class Verdict:
    status: Status
    reason: str = ""
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == Status.UNDETERMINED and not self.reason:
            raise ValueError("an undetermined verdict needs a reason")
        if self.status != Status.UNDETERMINED and not self.evidence:
            raise ValueError(f"a {self.status} verdict needs a witness")

    @property
    def satisfied(self) -> bool:
        return self.status == Status.SATISFIED

    @property
    def violated(self) -> bool:
        return self.status == Status.VIOLATED

    @property
    def undetermined(self) -> bool:
        return self.status == Status.UNDETERMINED


def satisfied(reason="", **evidence) -> Verdict:
    return Verdict(Status.SATISFIED, reason, evidence)


def violated(reason="", **evidence) -> Verdict:
    return Verdict(Status.VIOLATED, reason, evidence)


def undetermined(reason, **evidence) -> Verdict:
    return Verdict(Status.UNDETERMINED, reason, evidence)
