from typing import Dict, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt

from src.entities.preprocess_spec import Dimension, PreprocessSpec

Scaling = Literal["per_image", "global"]

class ExperimentReport(BaseModel):
    """
    Accuracy plus energy, throughput and area accounting for one configuration.
    Field order is the column order of reports.csv.
    """
    model_config = ConfigDict(frozen=True)

    method: str
    dimension: Dimension
    parity: bool
    sections: PositiveInt
    threshold: int
    bits: int = Field(ge=1, le=7)
    scaling: Scaling
    accuracy: float = Field(ge=0.0, le=1.0)
    train_accuracy: float = Field(ge=0.0, le=1.0)
    images_per_second: PositiveFloat
    images_per_joule: PositiveFloat
    energy_per_image: PositiveFloat # J
    write_energy_fraction: float = Field(ge=0.0, le=1.0)
    device_count: PositiveInt
    readout_weights: PositiveInt
    total_memristors: PositiveInt
    epochs: PositiveInt
    learning_rate: PositiveFloat
    seed: int
    train_count: PositiveInt
    test_count: PositiveInt

    @property
    def spec(self) -> PreprocessSpec:
        return PreprocessSpec(
            dimension=self.dimension,
            parity=self.parity,
            sections=self.sections,
            threshold=self.threshold
        )

    def as_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")
