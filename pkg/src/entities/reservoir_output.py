from typing import Tuple

from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, NonNegativeInt

class ImageCost(BaseModel):
    """
    Energy and device time spent by a reservoir bank on one image.
    """
    model_config = ConfigDict(frozen=True)

    write_energy: NonNegativeFloat = 0.0 # J
    read_energy: NonNegativeFloat = 0.0 # J
    slot_count: NonNegativeInt = 0
    wall_time: NonNegativeFloat = 0.0 # s

    @property
    def total_energy(self) -> float:
        return self.write_energy + self.read_energy

    def __add__(self, other: 'ImageCost') -> 'ImageCost':
        return ImageCost(
            write_energy=self.write_energy + other.write_energy,
            read_energy=self.read_energy + other.read_energy,
            slot_count=self.slot_count + other.slot_count,
            wall_time=self.wall_time + other.wall_time
        )

class FeatureVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...]
    bits: int = Field(ge=1, le=7)

    def __len__(self) -> int:
        return len(self.values)
