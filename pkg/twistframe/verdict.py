"""Collection of numerical verdicts produced by the diagnostics.

A verdict records the outcome of one checkable statement (condition C holds,
1/w is integrable, a witness inequality holds, ...). The collector keeps them
in insertion order so reports are reproducible.
"""

import functools
from typing import Any, Dict, List, Optional, Union

from twistframe import json, twistframe_logging

logger = twistframe_logging.init_logging("verdict")


@functools.total_ordering
class SeverityLabel:
    """
    Severity attached to a verdict status.
    """

    name: str
    severity: int

    def __init__(self, name: str, severity: int):
        self.name = name
        self.severity = severity

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, SeverityLabel):
            return NotImplemented
        return self.severity < other.severity

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SeverityLabel):
            return NotImplemented
        return self.severity == other.severity

    def __repr__(self) -> str:
        return f"SeverityLabel({self.name!r}, {self.severity})"


OK = SeverityLabel("ok", 0)
NOTE = SeverityLabel("note", 1)
VIOLATED = SeverityLabel("violated", 2)
REFUSED = SeverityLabel("refused", 3)

STATUS_SEVERITY: Dict[str, SeverityLabel] = {
    "condition C satisfied": OK,
    "condition C violated": VIOLATED,
    "finite": OK,
    "divergent": VIOLATED,
    "consistent with l2-independence": OK,
    "inconsistent": VIOLATED,
    "dependent": VIOLATED,
    "trend reported": NOTE,
    "holds": OK,
    "fails": VIOLATED,
    "non-asserting": NOTE,
    "identity not guaranteed": NOTE,
    "refused": REFUSED,
}


def severity_of(status: str) -> SeverityLabel:
    if status not in STATUS_SEVERITY:
        logger.warning("Unknown verdict status %r, treating it as a note", status)
        return NOTE
    return STATUS_SEVERITY[status]


class Verdict:
    name: str
    status: str
    severity_label: SeverityLabel
    context: str

    def __init__(self, name: str, status: str, context: Union[None, str, Dict[str, Any]] = None):
        self.name = name
        self.status = status
        self.severity_label = severity_of(status)
        if context is None:
            context = {}
        elif isinstance(context, str):
            context = {"message": context}
        self.context = json.dumps(context, sort_keys=True)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"name": self.name, "status": self.status}
        context = json.loads(self.context)
        if context:
            out["context"] = context
        return out

    def __repr__(self) -> str:
        return f"Verdict({self.name!r}, {self.status!r})"


class Verdicts:
    """
    Ordered collection of verdicts.

    The collection is truthy when at least one verdict is violated or refused,
    mirroring a failure collector.
    """

    items: List[Verdict]
    highest_severity: Optional[SeverityLabel]

    def __init__(self) -> None:
        self.items = []
        self.highest_severity = None

    def _add(self, verdict: Verdict) -> None:
        if self.highest_severity is None or verdict.severity_label > self.highest_severity:
            self.highest_severity = verdict.severity_label
        self.items.append(verdict)

    def add(self, name: str, status: str, context: Union[None, str, Dict[str, Any]] = None) -> Verdict:
        verdict = Verdict(name, status, context)
        self._add(verdict)
        return verdict

    def merge(self, other: "Verdicts") -> None:
        for verdict in other.items:
            self._add(verdict)

    def names(self) -> List[str]:
        return [v.name for v in self.items]

    def status(self, name: str) -> Optional[str]:
        for verdict in self.items:
            if verdict.name == name:
                return verdict.status
        return None

    def to_list(self) -> List[Dict[str, Any]]:
        return [v.to_dict() for v in self.items]

    def __bool__(self) -> bool:
        return self.highest_severity is not None and self.highest_severity >= VIOLATED

    def __len__(self) -> int:
        return len(self.items)
