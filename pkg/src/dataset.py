"""
MNIST loading from IDX files (optionally gzip-compressed), subsetting and the
inverse IDX writer.

IDX layout (big endian):
    u32    | magic: 0x00 0x00 <type code> <ndim> (0x08 = unsigned byte)
    u32[]  | one size per dimension
    u8[]   | payload, row-major
"""
import gzip
import logging
import struct
import threading
from pathlib import Path
from typing import Dict, Tuple

import numpy as np
import numpy.typing as npt

IMAGE_MAGIC = 2051 # ubyte, 3 dims
LABEL_MAGIC = 2049 # ubyte, 1 dim
CLASS_COUNT = 10

_UBYTE_TYPE_CODE = 0x08

_logger = logging.getLogger(__name__)

class DatasetError(Exception):
    pass

class BadMagicError(DatasetError):
    pass

class TruncatedPayloadError(DatasetError):
    pass

class CountMismatchError(DatasetError):
    pass

class SubsetSizeError(DatasetError):
    pass

class LabeledImageSet:
    def __init__(self, images: npt.NDArray[np.uint8], labels: npt.NDArray[np.uint8]):
        if images.ndim != 3:
            raise DatasetError(f"Images must be a (count, rows, cols) array, got shape {images.shape}")
        if images.shape[0] != labels.shape[0]:
            raise CountMismatchError(f"{images.shape[0]} images but {labels.shape[0]} labels")
        if labels.size > 0 and int(labels.max()) >= CLASS_COUNT:
            raise DatasetError(f"Label {int(labels.max())} is outside [0, {CLASS_COUNT - 1}]")
        self.images = images
        self.labels = labels

    @property
    def count(self) -> int:
        return self.images.shape[0]

    @property
    def image_shape(self) -> Tuple[int, int]:
        return self.images.shape[1], self.images.shape[2]

    def label_distribution(self) -> Dict[int, int]:
        counts = np.bincount(self.labels, minlength=CLASS_COUNT)
        return {label: int(count) for label, count in enumerate(counts)}

def _read_bytes(path: Path) -> bytes:
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rb") as f:
                return f.read()
        return path.read_bytes()
    except FileNotFoundError as e:
        raise DatasetError(f"IDX file not found: {path}") from e
    except (OSError, EOFError) as e:
        raise TruncatedPayloadError(f"Could not read {path}: {e}") from e

def read_idx(path: Path, expected_magic: int) -> npt.NDArray[np.uint8]:
    data = _read_bytes(path)
    if len(data) < 4:
        raise TruncatedPayloadError(f"{path} is too short to hold an IDX header")

    magic, = struct.unpack(">I", data[:4])
    if magic != expected_magic:
        _logger.error(f"Bad magic number {magic} in {path} (expected {expected_magic})")
        raise BadMagicError(f"Magic number mismatch in {path}: {magic} (expected {expected_magic})")
    if (magic >> 8) & 0xFF != _UBYTE_TYPE_CODE:
        raise BadMagicError(f"{path} does not hold unsigned bytes")

    ndim = magic & 0xFF
    header_size = 4 * (ndim + 1)
    if len(data) < header_size:
        raise TruncatedPayloadError(f"{path} ends inside its dimension header")
    shape = struct.unpack(f">{ndim}I", data[4:header_size])

    expected = int(np.prod(shape, dtype=np.int64))
    payload = len(data) - header_size
    if payload < expected:
        raise TruncatedPayloadError(f"{path} holds {payload} payload bytes, header announces {expected}")
    if payload > expected:
        _logger.warning(f"Ignoring {payload - expected} trailing bytes in {path}")

    return np.frombuffer(data, dtype=np.uint8, count=expected, offset=header_size).reshape(shape)

def encode_idx(array: npt.NDArray[np.uint8]) -> bytes:
    values = np.ascontiguousarray(array, dtype=np.uint8)
    magic = (_UBYTE_TYPE_CODE << 8) | values.ndim
    return struct.pack(f">I{values.ndim}I", magic, *values.shape) + values.tobytes()

def write_idx(path: Path, array: npt.NDArray[np.uint8]) -> None:
    """
    Writes an unsigned-byte IDX file, gzip-compressed when the name ends in ".gz".
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    data = encode_idx(array)
    if path.suffix == ".gz":
        data = gzip.compress(data, mtime=0)
    path.write_bytes(data)

def load_idx(images_path: Path, labels_path: Path) -> LabeledImageSet:
    images = read_idx(images_path, IMAGE_MAGIC)
    labels = read_idx(labels_path, LABEL_MAGIC)
    if images.shape[0] != labels.shape[0]:
        _logger.error(f"{images_path} has {images.shape[0]} images but {labels_path} has {labels.shape[0]} labels")
        raise CountMismatchError(
            f"{images_path} has {images.shape[0]} images but {labels_path} has {labels.shape[0]} labels"
        )

    _logger.info(f"Loaded {images.shape[0]} images of {images.shape[1]}x{images.shape[2]} from {images_path}")
    return LabeledImageSet(images, labels)

def subset(image_set: LabeledImageSet, count: int, seed: int) -> LabeledImageSet:
    """
    Seeded uniform sample without replacement.
    """
    if count > image_set.count:
        raise SubsetSizeError(f"Cannot draw {count} items from a set of {image_set.count}")

    rng = np.random.default_rng(seed)
    indices = rng.choice(image_set.count, size=count, replace=False)
    sampled = LabeledImageSet(image_set.images[indices], image_set.labels[indices])
    _logger.info(f"Drew {count}/{image_set.count} items, label distribution: {sampled.label_distribution()}")
    return sampled

class _DatasetCache:
    """
    Keeps loaded IDX pairs in memory so that a sweep reads each file once per process.
    """

    def __init__(self) -> None:
        self._sets: Dict[Tuple[Path, Path], LabeledImageSet] = {}
        self._lock = threading.Lock()

    def load(self, images_path: Path, labels_path: Path) -> LabeledImageSet:
        key = (images_path.resolve(), labels_path.resolve())
        with self._lock:
            if key not in self._sets:
                self._sets[key] = load_idx(images_path, labels_path)
            return self._sets[key]

    def clear(self) -> None:
        with self._lock:
            self._sets.clear()

dataset_cache = _DatasetCache()
