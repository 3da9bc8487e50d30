"""Uniform result record for identity checks.

Every checker in :mod:`qvirasoro.relations` and
:mod:`qvirasoro.correlators` returns a :class:`CheckReport`.  The CLI
serializes these to JSON/CSV; tests assert on ``passed`` and
``residual``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


@dataclass
class CheckReport:
    """Outcome of a single identity verification.

    residual
        Worst absolute deviation found (max over all probed matrix
        elements / coefficients), already normalized the way the check
        documents.
    worst_location
        Human-readable tag of where the worst deviation occurred,
        e.g. ``"mode k=-2, bra (1,1), ket (2)"``.
    status
        ``"pass"``, ``"fail"`` or ``"inconclusive"`` (the latter for
        checks that could not run at the given parameters, e.g. a
        product form outside its convergence region).
    """

    identity: str
    residual: float
    tolerance: float
    worst_location: str = ""
    config: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    status: str = ""
    runtime_ms: float = 0.0

    def __post_init__(self) -> None:
        if not self.status:
            ok = math.isfinite(self.residual) and self.residual <= self.tolerance
            self.status = "pass" if ok else "fail"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def add_note(self, text: str) -> None:
        self.notes.append(text)

    def summary_line(self) -> str:
        return (
            f"[{self.status.upper():4s}] {self.identity}: "
            f"residual={self.residual:.3e} (tol={self.tolerance:.1e})"
            + (f" at {self.worst_location}" if self.worst_location else "")
        )


def worst(reports: list[CheckReport]) -> CheckReport:
    """The report with the largest residual (ties broken by order)."""
    return max(reports, key=lambda r: r.residual)
