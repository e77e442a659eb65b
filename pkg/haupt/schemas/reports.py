"""
Report models.

Every check returns a :class:`CheckReport`; the moonshine check wraps several
of them in a :class:`MultiplicityReport`. Values are converted to plain JSON
types on construction (Fractions as ``"p/q"``, infinite valuations as
``"inf"``) so dumps are stable.
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator


# ============================================================
# Helpers
# ============================================================

def plain(value: Any) -> Any:
    """Convert values to JSON-friendly builtins."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return int(value)
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return "inf" if value == math.inf else value
    if isinstance(value, dict):
        return {str(plain(k)): plain(v) for k, v in value.items()}
    if isinstance(value, list | tuple | set | frozenset):
        items = sorted(value) if isinstance(value, set | frozenset) else value
        return [plain(v) for v in items]
    if hasattr(value, "value") and hasattr(value, "window_high"):
        return plain(value.value)
    return str(value)


# ============================================================
# Check reports
# ============================================================

class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"


class CheckReport(BaseModel):
    """Outcome of one check."""

    model_config = ConfigDict(frozen=True)

    name: str
    params: dict[str, Any] = Field(default_factory=dict)
    window: int
    verdict: Verdict
    witness: int | None = Field(None, description="First offending exponent, or the n found by a search")
    valuations: list[Any] | None = None
    details: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _to_plain(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            for key in ("params", "details", "valuations"):
                if data.get(key) is not None:
                    data[key] = plain(data[key])
        return data

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_dict(self) -> dict[str, Any]:
        out = self.model_dump(mode="json")
        if out["valuations"] is None:
            del out["valuations"]
        return out


def combine_verdicts(verdicts: list[Verdict]) -> Verdict:
    """fail beats indeterminate beats pass; an empty list passes."""
    if Verdict.FAIL in verdicts:
        return Verdict.FAIL
    if Verdict.INDETERMINATE in verdicts:
        return Verdict.INDETERMINATE
    return Verdict.PASS


# ============================================================
# Moonshine
# ============================================================

class MultiplicityReport(BaseModel):
    """Integrality, positivity and annihilation evidence for the M_χ of one group."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = "moonshine"
    group: str
    p: int
    window: int
    characters: list[str]
    integrality: CheckReport
    positivity: CheckReport
    evidence: list[CheckReport]
    verdict: Verdict
    conclusion: str
    series: dict[str, Any] = Field(default_factory=dict, exclude=True)

    def to_dict(self) -> dict[str, Any]:
        out = self.model_dump(mode="json", exclude={"integrality", "positivity", "evidence"})
        out["integrality"] = self.integrality.to_dict()
        out["positivity"] = self.positivity.to_dict()
        out["evidence"] = [r.to_dict() for r in self.evidence]
        return out


# ============================================================
# Envelope
# ============================================================

class ReportEnvelope(BaseModel):
    """Top-level JSON document written by the CLI."""

    tool: str = "haupt"
    version: str
    config: dict[str, Any] = Field(default_factory=dict)
    checks: list[dict[str, Any]] = Field(default_factory=list)
