from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np
import numpy.typing as npt
import pytest

from src.dataset import write_idx
from src.entities.device import DeviceParams
from src.entities.experiment_config import ExperimentConfig

def synthetic_digits(count: int, seed: int, size: int = 28) -> Tuple[npt.NDArray[np.uint8], npt.NDArray[np.uint8]]:
    """
    Digit-like grayscale images: a ring whose radius depends on the label, with
    a horizontal stroke through it for labels 5-9. Labels cycle through 0-9.
    """
    rng = np.random.default_rng(seed)
    labels = (np.arange(count) % 10).astype(np.uint8)
    images = np.zeros((count, size, size), dtype=np.uint8)
    yy, xx = np.mgrid[:size, :size]
    scale = size / 28

    for index, label in enumerate(labels):
        cy, cx = size / 2 + rng.normal(0.0, 0.7 * scale, size=2)
        radius = (4.0 + 0.8 * (label % 5)) * scale
        stroke = np.abs(np.hypot(yy - cy, xx - cx) - radius) < 1.3 * scale
        if label >= 5:
            stroke |= (np.abs(yy - cy) < 1.0 * scale) & (np.abs(xx - cx) < radius)
        images[index][stroke] = rng.integers(120, 256, size=int(stroke.sum()))
    return images, labels

@pytest.fixture
def params() -> DeviceParams:
    return DeviceParams()

@pytest.fixture
def digit() -> npt.NDArray[np.uint8]:
    images, _ = synthetic_digits(1, seed=3)
    return images[0]

@pytest.fixture
def idx_dataset(tmp_path: Path) -> Dict[str, Any]:
    """
    Synthetic MNIST-shaped IDX files (60 train / 20 test images), as a config `dataset` section.
    """
    train_images, train_labels = synthetic_digits(60, seed=1)
    test_images, test_labels = synthetic_digits(20, seed=2)
    data_dir = tmp_path / "data"
    files = {
        "train_images": (data_dir / "train-images-idx3-ubyte.gz", train_images),
        "train_labels": (data_dir / "train-labels-idx1-ubyte.gz", train_labels),
        "test_images": (data_dir / "t10k-images-idx3-ubyte", test_images),
        "test_labels": (data_dir / "t10k-labels-idx1-ubyte", test_labels),
    }
    for path, array in files.values():
        write_idx(path, array)
    return {key: path for key, (path, _) in files.items()}

@pytest.fixture
def make_config(tmp_path: Path, idx_dataset: Dict[str, Any]):
    def _make(**sections: Any) -> ExperimentConfig:
        raw: Dict[str, Any] = {
            "seed": 11,
            "workers": 1,
            "dataset": dict(idx_dataset),
            "training": {"epochs": 3},
            "output": {"directory": tmp_path / "out"},
        }
        for key, value in sections.items():
            if isinstance(value, dict) and isinstance(raw.get(key), dict):
                raw[key] = {**raw[key], **value}
            else:
                raw[key] = value
        return ExperimentConfig.model_validate(raw)
    return _make
