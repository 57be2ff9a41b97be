"""
Image -> pulse trains. A grayscale image is binarized, expanded into rows
(original rows, then columns for 2D, then parity rows) and every row is cut
into `k` contiguous sections, each section driving its own memristor.
"""
import logging
import math
from typing import List, Tuple

import numpy as np
import numpy.typing as npt

from src.entities.preprocess_spec import Dimension, PreprocessSpec, PulseTrain

BinaryImage = npt.NDArray[np.uint8]

_logger = logging.getLogger(__name__)

class PreprocessError(ValueError):
    pass

def binarize(image: npt.ArrayLike, threshold: int = 25) -> BinaryImage:
    """
    Pixels strictly above the threshold become 1, all others 0.
    """
    pixels = np.asarray(image)
    if pixels.ndim != 2 or pixels.size == 0:
        raise PreprocessError(f"Expected a non-empty 2D grayscale image, got shape {pixels.shape}")
    if pixels.min() < 0 or pixels.max() > 255:
        raise PreprocessError("Grayscale pixel values must lie in [0, 255].")
    return (pixels > threshold).astype(np.uint8)

def parity_rows(image: BinaryImage) -> BinaryImage:
    """
    Row i of the result is the XOR of rows i and i+1 (n-1 rows in total).
    """
    if image.shape[0] < 2:
        raise PreprocessError(f"Parity needs at least 2 rows, got {image.shape[0]}")
    return np.bitwise_xor(image[:-1], image[1:])

def expand(image: BinaryImage, spec: PreprocessSpec) -> List[BinaryImage]:
    rows = list(image)
    if spec.dimension is Dimension.TWO_D:
        # column j read top to bottom
        rows.extend(image.T)
    if spec.parity:
        rows.extend(parity_rows(image))
    return rows

def section_bounds(length: int, k: int) -> List[Tuple[int, int]]:
    """
    Near-equal contiguous partition of `length` slots into `k` sections, the
    first (length mod k) sections being one slot longer.
    """
    if k < 1 or k > length:
        raise PreprocessError(f"Cannot cut a row of {length} pixels into {k} sections.")
    base, longer = divmod(length, k)
    bounds = []
    start = 0
    for index in range(k):
        stop = start + base + (1 if index < longer else 0)
        bounds.append((start, stop))
        start = stop
    return bounds

def sectionize(row: npt.ArrayLike, k: int) -> List[PulseTrain]:
    slots = [int(slot) for slot in np.asarray(row).ravel()]
    return [
        PulseTrain(slots=tuple(slots[start:stop]))
        for start, stop in section_bounds(len(slots), k)
    ]

def reservoir_size(spec: PreprocessSpec, n: int, m: int) -> int:
    rows = n
    if spec.dimension is Dimension.TWO_D:
        rows += m
    if spec.parity:
        rows += n - 1
    return rows * spec.sections

def slot_count(spec: PreprocessSpec, n: int, m: int) -> int:
    """
    Length of the longest pulse train `spec` produces for an n x m image.
    """
    longest_row = max(m, n) if spec.dimension is Dimension.TWO_D else m
    return math.ceil(longest_row / spec.sections)

def pulse_trains(image: npt.ArrayLike, spec: PreprocessSpec) -> List[PulseTrain]:
    """
    Full per-image pipeline: binarize, expand, sectionize.
    """
    binary = binarize(image, spec.threshold)
    return [
        train
        for row in expand(binary, spec)
        for train in sectionize(row, spec.sections)
    ]

def _sectioned(group: BinaryImage, k: int, width: int) -> BinaryImage:
    batch, rows, length = group.shape
    out = np.zeros((batch, rows, k, width), dtype=np.uint8)
    for index, (start, stop) in enumerate(section_bounds(length, k)):
        out[:, :, index, :stop - start] = group[:, :, start:stop]
    return out.reshape(batch, rows * k, width)

def encode_batch(images: npt.ArrayLike, spec: PreprocessSpec) -> BinaryImage:
    """
    Vectorised `pulse_trains` over a stack of grayscale images.

    Returns a (batch, devices, slots) array in the same device order as
    `pulse_trains`; shorter trains are padded with trailing '0' slots.
    """
    stack = np.asarray(images)
    if stack.ndim != 3 or stack.size == 0:
        raise PreprocessError(f"Expected a non-empty (batch, n, m) image stack, got shape {stack.shape}")

    binary = (stack > spec.threshold).astype(np.uint8)
    groups = [binary]
    if spec.dimension is Dimension.TWO_D:
        groups.append(binary.transpose(0, 2, 1))
    if spec.parity:
        if binary.shape[1] < 2:
            raise PreprocessError(f"Parity needs at least 2 rows, got {binary.shape[1]}")
        groups.append(np.bitwise_xor(binary[:, :-1], binary[:, 1:]))

    _, n, m = binary.shape
    width = slot_count(spec, n, m)
    return np.concatenate([_sectioned(group, spec.sections, width) for group in groups], axis=1)
