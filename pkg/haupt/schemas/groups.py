"""
Group file models.

A group file is JSON::

    {
      "name": "A5",
      "order": 60,
      "quad_d": 5,
      "classes": [{"name": "1A", "size": 1, "order": 1}, ...],
      "character_names": ["1", "4", ...],
      "characters": [[[1, 0], [1, 0], ...], ...],
      "power_map": {"5A": {"2": "5B", ...}, ...},
      "assignment": {"1A": "1", ...}
    }

Character values are ``[a, b]`` meaning a + b√d, with a and b integers or
``"p/q"`` strings; a bare number means b = 0.
"""

from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator


def _rational(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ValueError("booleans are not character values")
    if isinstance(value, int | str):
        return Fraction(value)
    raise ValueError(f"expected an integer or 'p/q' string, got {value!r}")


class ClassEntry(BaseModel):
    name: str
    size: PositiveInt
    order: PositiveInt


class GroupFile(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = "G"
    order: PositiveInt
    quad_d: int = -1
    classes: list[ClassEntry] = Field(min_length=1)
    character_names: list[str] | None = None
    characters: list[list[tuple[Fraction, Fraction]]]
    power_map: dict[str, dict[int, str]] = Field(default_factory=dict)
    assignment: dict[str, str] | None = None

    @field_validator("characters", mode="before")
    @classmethod
    def _parse_values(cls, rows: Any) -> Any:
        if not isinstance(rows, list):
            raise ValueError("characters must be a list of rows")
        parsed = []
        for row in rows:
            if not isinstance(row, list):
                raise ValueError("each character must be a list of values")
            values = []
            for value in row:
                if isinstance(value, list):
                    if len(value) != 2:
                        raise ValueError(f"character value {value!r} must be [a, b]")
                    values.append((_rational(value[0]), _rational(value[1])))
                else:
                    values.append((_rational(value), Fraction(0)))
            parsed.append(values)
        return parsed

    @field_validator("quad_d")
    @classmethod
    def _squarefree(cls, d: int) -> int:
        if d in (0, 1):
            raise ValueError("quad_d must be a squarefree integer other than 0 and 1")
        k = 2
        while k * k <= abs(d):
            if d % (k * k) == 0:
                raise ValueError(f"quad_d={d} is not squarefree")
            k += 1
        return d
