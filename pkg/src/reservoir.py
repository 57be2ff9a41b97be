"""
Bank of volatile memristors driven in lockstep by an image's pulse trains,
read once with a single read pulse, then quantized and min-max rescaled into
the feature vector the readout consumes.
"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from src import device, preprocess
from src.entities.device import DeviceParams, DeviceState
from src.entities.preprocess_spec import PreprocessSpec, PulseTrain
from src.entities.reservoir_output import FeatureVector, ImageCost

FloatArray = npt.NDArray[np.float64]
Bounds = Tuple[float, float]

MIN_BITS = 1
MAX_BITS = 7

# relative error bound of the computed ratio, in ulps; exact halves round up
_ROUNDING_TOLERANCE_ULPS = 8

_logger = logging.getLogger(__name__)

class ReservoirError(ValueError):
    pass

def drive(states: FloatArray, pulses: npt.NDArray[np.uint8], params: DeviceParams) -> Tuple[FloatArray, FloatArray]:
    """
    Applies pulse slots (last axis of `pulses`) to `states` in order: '1'
    slots write, '0' slots decay. Returns the final states and the write
    energy consumed by each device.
    """
    w = np.array(states, dtype=np.float64)
    write_energy = np.zeros_like(w)
    for slot in np.moveaxis(np.asarray(pulses, dtype=bool), -1, 0):
        write_energy += np.where(slot, device.energy(w, params.v_write, params), 0.0)
        w = np.where(slot, device.write_step(w, params), device.decay_step(w, params))
    return w, write_energy

def read(states: FloatArray, params: DeviceParams) -> Tuple[FloatArray, FloatArray]:
    """
    One read pulse on every device: read currents and per-device read energy.
    """
    currents = device.current(states, params.v_read, params)
    return currents, params.v_read * currents * params.t_pulse

def _check_bits(bits: int) -> int:
    if not MIN_BITS <= bits <= MAX_BITS:
        raise ReservoirError(f"Quantization width must lie in [{MIN_BITS}, {MAX_BITS}] bits, got {bits}")
    return 2 ** bits - 1

def quantize_levels(currents: npt.ArrayLike, bits: int, bounds: Optional[Bounds] = None) -> npt.NDArray[np.int64]:
    """
    Integer ADC levels in [0, 2^bits - 1] along the last axis.

    Without `bounds` every vector is scaled by its own min/max; with `bounds`
    a fixed (low, high) range is used and values outside it saturate. A
    degenerate range maps to level 0. Halves round up.
    """
    top = _check_bits(bits)
    values = np.asarray(currents, dtype=np.float64)
    if values.size == 0:
        raise ReservoirError("Cannot quantize an empty current vector.")

    if bounds is None:
        low = values.min(axis=-1, keepdims=True)
        high = values.max(axis=-1, keepdims=True)
    else:
        low, high = (np.float64(bound) for bound in bounds)

    span = high - low
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(span > 0, (values - low) / np.where(span > 0, span, 1.0), 0.0)
    scaled = np.clip(ratio, 0.0, 1.0) * top
    slack = scaled * _ROUNDING_TOLERANCE_ULPS * np.finfo(np.float64).eps
    levels = np.floor(scaled + 0.5 + slack)
    return np.clip(levels, 0, top).astype(np.int64)

def rescale(currents: npt.ArrayLike, bits: int, bounds: Optional[Bounds] = None) -> FloatArray:
    """
    Quantize then rescale to [0, 1]: every value lands on the (2^bits - 1)-step lattice.
    """
    return quantize_levels(currents, bits, bounds) / float(2 ** bits - 1)

def quantize_rescale(currents: Sequence[float], bits: int) -> FeatureVector:
    return FeatureVector(values=tuple(float(v) for v in rescale(currents, bits)), bits=bits)

class ReservoirBank:
    """
    The reservoir for one preprocessing spec and image shape. Single writer:
    `reset`, `ingest` then `read_all` once per image.
    """

    def __init__(self, params: DeviceParams, spec: PreprocessSpec, image_shape: Tuple[int, int]):
        self.params = params
        self.spec = spec
        self.image_shape = image_shape
        self.devices: FloatArray = np.full(
            preprocess.reservoir_size(spec, *image_shape), params.w_min, dtype=np.float64
        )

    @property
    def device_count(self) -> int:
        return self.devices.shape[0]

    def states(self) -> List[DeviceState]:
        return [DeviceState(w=float(w)) for w in self.devices]

    def reset(self) -> 'ReservoirBank':
        self.devices.fill(self.params.w_min)
        return self

    def ingest(self, trains: Sequence[PulseTrain]) -> ImageCost:
        if len(trains) != self.device_count:
            _logger.error(f"Got {len(trains)} pulse trains for a bank of {self.device_count} devices")
            raise ReservoirError(f"Expected {self.device_count} pulse trains, got {len(trains)}")
        if np.any(self.devices != self.params.w_min):
            raise ReservoirError("The bank must be reset before ingesting a new image.")

        slot_count = max(len(train) for train in trains)
        pulses = np.zeros((self.device_count, slot_count), dtype=np.uint8)
        for index, train in enumerate(trains):
            # ragged trains are padded with trailing '0' slots
            pulses[index, :len(train)] = train.slots

        self.devices, write_energy = drive(self.devices, pulses, self.params)
        return ImageCost(
            write_energy=float(write_energy.sum()),
            slot_count=slot_count,
            wall_time=slot_count * self.params.t_pulse
        )

    def read_all(self) -> Tuple[FloatArray, ImageCost]:
        """
        Reads every device immediately (no extra decay); the read does not perturb w.
        """
        currents, read_energy = read(self.devices, self.params)
        return currents, ImageCost(read_energy=float(read_energy.sum()), wall_time=self.params.t_pulse)

    def process(self, image: npt.ArrayLike, bits: int) -> Tuple[FeatureVector, ImageCost]:
        """
        reset -> ingest -> read -> quantize for a single grayscale image.
        """
        self.reset()
        cost = self.ingest(preprocess.pulse_trains(image, self.spec))
        currents, read_cost = self.read_all()
        return quantize_rescale(currents, bits), cost + read_cost

class ReservoirResponse:
    """
    Raw read currents and energy of a stack of images driven through the same reservoir.
    """

    def __init__(
            self,
            currents: FloatArray,
            write_energy: FloatArray,
            read_energy: FloatArray,
            slot_count: int,
            t_pulse: float
    ):
        self.currents = currents
        self.write_energy = write_energy
        self.read_energy = read_energy
        self.slot_count = slot_count
        self.t_pulse = t_pulse

    @property
    def image_count(self) -> int:
        return self.currents.shape[0]

    @property
    def wall_time(self) -> float:
        return (self.slot_count + 1) * self.t_pulse

    @property
    def total_write_energy(self) -> float:
        return float(self.write_energy.sum())

    @property
    def total_energy(self) -> float:
        return float(self.write_energy.sum() + self.read_energy.sum())

    def image_cost(self, index: int) -> ImageCost:
        return ImageCost(
            write_energy=float(self.write_energy[index]),
            read_energy=float(self.read_energy[index]),
            slot_count=self.slot_count,
            wall_time=self.wall_time
        )

    def current_bounds(self) -> Bounds:
        return float(self.currents.min()), float(self.currents.max())

def simulate_images(
        images: npt.ArrayLike,
        spec: PreprocessSpec,
        params: DeviceParams,
        chunk_size: int = 2048
) -> ReservoirResponse:
    """
    Batched equivalent of `ReservoirBank.process` without the quantization
    step: every image starts from a fresh (w_min) bank.
    """
    stack = np.asarray(images)
    if stack.ndim != 3 or stack.shape[0] == 0:
        raise ReservoirError(f"Expected a non-empty (batch, n, m) image stack, got shape {stack.shape}")

    count, n, m = stack.shape
    devices = preprocess.reservoir_size(spec, n, m)
    currents = np.empty((count, devices), dtype=np.float64)
    write_energy = np.empty(count, dtype=np.float64)
    read_energy = np.empty(count, dtype=np.float64)

    for start in range(0, count, chunk_size):
        stop = min(start + chunk_size, count)
        pulses = preprocess.encode_batch(stack[start:stop], spec)
        states = np.full(pulses.shape[:2], params.w_min, dtype=np.float64)
        final, image_write = drive(states, pulses, params)
        chunk_currents, image_read = read(final, params)
        currents[start:stop] = chunk_currents
        write_energy[start:stop] = image_write.sum(axis=1)
        read_energy[start:stop] = image_read.sum(axis=1)

    _logger.info(f"Simulated {count} images through a {devices}-device reservoir ({spec})")
    return ReservoirResponse(
        currents=currents,
        write_energy=write_energy,
        read_energy=read_energy,
        slot_count=preprocess.slot_count(spec, n, m),
        t_pulse=params.t_pulse
    )
