from enum import StrEnum
from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator

class Dimension(StrEnum):
    ONE_D = "1D"
    TWO_D = "2D"

class PreprocessSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dimension: Dimension = Dimension.ONE_D
    parity: bool = False
    sections: PositiveInt = 1
    threshold: int = Field(default=25, ge=0, le=255)

    @property
    def method(self) -> str:
        """
        Short method label, e.g. "1D", "2D+parity".
        """
        return f"{self.dimension}+parity" if self.parity else str(self.dimension)

    def __str__(self) -> str:
        return f"{self.method} k={self.sections}"

class PulseTrain(BaseModel):
    model_config = ConfigDict(frozen=True)

    slots: Tuple[int, ...]

    @field_validator("slots")
    @classmethod
    def _check_slots(cls, slots: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(slots) == 0:
            raise ValueError("A pulse train needs at least one slot.")
        if any(slot not in (0, 1) for slot in slots):
            raise ValueError(f"Pulse slots must be 0 or 1, got {slots}")
        return slots

    def __len__(self) -> int:
        return len(self.slots)
