import itertools
import logging
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator

from src.entities.device import DeviceParams
from src.entities.experiment_report import Scaling
from src.entities.preprocess_spec import Dimension, PreprocessSpec
from src.entities.training import TrainConfig, TrainingSettings
from src.utils.config import settings

_logger = logging.getLogger(__name__)

MNIST_TRAIN_IMAGES = "train-images-idx3-ubyte.gz"
MNIST_TRAIN_LABELS = "train-labels-idx1-ubyte.gz"
MNIST_TEST_IMAGES = "t10k-images-idx3-ubyte.gz"
MNIST_TEST_LABELS = "t10k-labels-idx1-ubyte.gz"

Bits = Annotated[int, Field(ge=1, le=7)]

class ConfigError(Exception):
    """
    Raised when an experiment config cannot be read or does not describe a
    runnable experiment.
    """

def _as_list(value: Any) -> Any:
    if value is None or isinstance(value, (list, tuple)):
        return value
    return [value]

def _unique(values: List[Any]) -> List[Any]:
    if len(values) == 0:
        raise ValueError("at least one value is required")
    return list(dict.fromkeys(values))

class DatasetSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    train_images: Path = Field(default_factory=lambda: settings.DATA_DIR / MNIST_TRAIN_IMAGES)
    train_labels: Path = Field(default_factory=lambda: settings.DATA_DIR / MNIST_TRAIN_LABELS)
    test_images: Path = Field(default_factory=lambda: settings.DATA_DIR / MNIST_TEST_IMAGES)
    test_labels: Path = Field(default_factory=lambda: settings.DATA_DIR / MNIST_TEST_LABELS)
    train_subset: Optional[PositiveInt] = None
    test_subset: Optional[PositiveInt] = None

class PreprocessGrid(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: List[Dimension] = [Dimension.ONE_D]
    parity: List[bool] = [False]
    sections: List[PositiveInt] = [1]
    threshold: int = Field(default=25, ge=0, le=255)

    @field_validator("dimension", "parity", "sections", mode="before")
    @classmethod
    def _wrap_scalar(cls, value: Any) -> Any:
        return _as_list(value)

    @field_validator("dimension", "parity", "sections")
    @classmethod
    def _deduplicate(cls, values: List[Any]) -> List[Any]:
        return _unique(values)

    def specs(self) -> List[PreprocessSpec]:
        return [
            PreprocessSpec(dimension=dimension, parity=parity, sections=sections, threshold=self.threshold)
            for dimension, parity, sections in itertools.product(self.dimension, self.parity, self.sections)
        ]

class QuantizationSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bits: List[Bits] = [6]
    scaling: Scaling = "per_image"

    @field_validator("bits", mode="before")
    @classmethod
    def _wrap_scalar(cls, value: Any) -> Any:
        return _as_list(value)

    @field_validator("bits")
    @classmethod
    def _deduplicate(cls, values: List[int]) -> List[int]:
        return _unique(values)

class OutputSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: Path = Field(default_factory=lambda: settings.OUTPUT_DIR)
    # Scatter tables drop k=1 configurations scoring below this accuracy
    omit_single_section_below: Optional[float] = Field(default=None, ge=0.0, le=1.0)

class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = 1
    seed: int = 0
    workers: PositiveInt = Field(default_factory=lambda: max(1, settings.WORKERS))
    dataset: DatasetSection = Field(default_factory=DatasetSection)
    preprocess: PreprocessGrid = Field(default_factory=PreprocessGrid)
    quantization: QuantizationSection = Field(default_factory=QuantizationSection)
    device: DeviceParams = Field(default_factory=DeviceParams)
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    output: OutputSection = Field(default_factory=OutputSection)

    def grid(self) -> List[Tuple[PreprocessSpec, int]]:
        """
        Cartesian grid of (preprocessing spec, bit width) points, bits varying fastest.
        """
        return [(spec, bits) for spec in self.preprocess.specs() for bits in self.quantization.bits]

    def train_config(self) -> TrainConfig:
        return TrainConfig(**self.training.model_dump(), seed=self.seed)

    def with_overrides(
            self,
            out: Optional[Path] = None,
            seed: Optional[int] = None,
            workers: Optional[int] = None,
            subset_train: Optional[int] = None,
            subset_test: Optional[int] = None
    ) -> 'ExperimentConfig':
        """
        Applies CLI overrides and re-validates the result.
        """
        data: Dict[str, Any] = self.model_dump(by_alias=True)
        if out is not None:
            data["output"]["directory"] = out
        if seed is not None:
            data["seed"] = seed
        if workers is not None:
            data["workers"] = workers
        if subset_train is not None:
            data["dataset"]["train_subset"] = subset_train
        if subset_test is not None:
            data["dataset"]["test_subset"] = subset_test
        return ExperimentConfig.model_validate(data)

    @staticmethod
    def load(path: Path) -> 'ExperimentConfig':
        """
        Reads and validates a YAML experiment config.
        """
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}")

        try:
            with open(path, encoding="utf-8") as f:
                raw = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {path} is not valid YAML: {e}") from e

        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"Config file {path} must contain a mapping at the top level.")

        _logger.info(f"Loaded experiment config from {path}")
        return ExperimentConfig.model_validate(raw)
