"""Three-valued verdicts of numerical convergence and theorem checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Status(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"
    PRECONDITION_FAILED = "precondition-failed"

    def __str__(self) -> str:
        return self.value

    @property
    def definitive(self) -> bool:
        return self in (Status.HOLDS, Status.FAILS)


@dataclass
class Verdict:
    """Outcome of a check.

    Attributes
    ----------
    status : Status
    witnesses : list of dict
        Per-point or per-index measurements backing the status.
    tolerances : dict
        Tolerances the decision used.
    parts : dict of str to Verdict
        Sub-verdicts of composite checks.
    consistent : bool or None
        For equivalence checks, whether the definitive parts agree.
    note : str
    data : dict
        Extra diagnostics (estimates, traces); not part of the decision.
    """

    status: Status
    witnesses: list = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    parts: dict = field(default_factory=dict)
    consistent: bool | None = None
    note: str = ""
    data: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.status = Status(self.status)
        if self.status.definitive and not self.witnesses:
            raise ValueError(f"a '{self.status}' verdict needs at least one witness")

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS


def combine(statuses) -> Status:
    """Conjunction: fails beats inconclusive beats holds."""
    statuses = [Status(s) for s in statuses]
    if Status.PRECONDITION_FAILED in statuses:
        return Status.PRECONDITION_FAILED
    if Status.FAILS in statuses:
        return Status.FAILS
    if Status.INCONCLUSIVE in statuses or not statuses:
        return Status.INCONCLUSIVE
    return Status.HOLDS
