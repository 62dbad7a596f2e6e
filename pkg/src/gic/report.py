"""Machine-readable outcome of one verification run."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

__all__ = ["VerificationReport"]


def _clean(value):
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


@dataclass(frozen=True)
class VerificationReport:
    """Result of checking one claim over a set of instances.

    ``worst_gap`` is the most adverse signed slack: for an inequality it is
    the smallest ``lhs - rhs`` oriented so that non-negative means the claim
    holds, and for an equality it is ``-max |difference|``.  The report
    passes iff ``worst_gap >= -tolerance``.

    ``noise_floor`` is the numerical resolution of the method that produced
    the gaps (quadrature error estimate or Monte Carlo spread).  A failure
    whose violation is itself within ``noise_floor`` is flagged
    ``tolerance_too_tight``: the claim cannot be resolved at that tolerance,
    which is different from it being contradicted.
    """

    lemma_id: str
    relation: str
    instances_run: int
    worst_gap: float
    tolerance: float
    diagnostics: list = field(default_factory=list)
    noise_floor: float = 0.0

    def __post_init__(self):
        if self.relation not in ("ge", "eq"):
            raise ValueError(f"relation must be 'ge' or 'eq', got {self.relation!r}")
        if not self.tolerance >= 0:
            raise ValueError("tolerance must be non-negative")

    @property
    def passed(self) -> bool:
        return bool(self.worst_gap >= -self.tolerance)

    @property
    def tolerance_too_tight(self) -> bool:
        return (not self.passed) and -self.worst_gap <= self.noise_floor

    def to_dict(self) -> dict[str, Any]:
        out = {
            "lemma_id": self.lemma_id,
            "relation": self.relation,
            "instances_run": self.instances_run,
            "worst_gap": self.worst_gap,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "noise_floor": self.noise_floor,
            "tolerance_too_tight": self.tolerance_too_tight,
            "diagnostics": self.diagnostics,
        }
        return _clean(out)

    @staticmethod
    def merge(lemma_id: str, relation: str, parts: list["VerificationReport"],
              tolerance: Optional[float] = None) -> "VerificationReport":
        tol = parts[0].tolerance if tolerance is None else tolerance
        return VerificationReport(
            lemma_id=lemma_id,
            relation=relation,
            instances_run=sum(p.instances_run for p in parts),
            worst_gap=min(p.worst_gap for p in parts),
            tolerance=tol,
            diagnostics=[d for p in parts for d in p.diagnostics],
            noise_floor=max(p.noise_floor for p in parts),
        )
