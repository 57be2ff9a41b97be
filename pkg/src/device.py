"""
Closed-form volatile memristor model.

The array-level helpers (`window`, `write_step`, `decay_step`, `current`,
`energy`) work on a float or on any numpy array of states and are what the
reservoir uses to drive whole banks at once. The `DeviceState` operations
below them wrap the same helpers for a single device.
"""
import logging
from typing import Dict, List, Sequence

import numpy as np
import numpy.typing as npt

from src.entities.device import DeviceParams, DeviceState, DeviceStateError

States = float | npt.NDArray[np.float64]

_logger = logging.getLogger(__name__)

_WINDOW_STEEPNESS = 3.0

def _check_range(w: States, params: DeviceParams) -> None:
    values = np.asarray(w)
    if np.any((values < params.w_min) | (values > params.w_max)):
        raise DeviceStateError(f"States must lie in [{params.w_min}, {params.w_max}]")

def window(w: States, params: DeviceParams) -> States:
    """
    Window function R(w) = 1 - exp(3w) / exp(3 w_max). Closes (reaches 0) at w_max.
    """
    _check_range(w, params)
    return 1.0 - np.exp(_WINDOW_STEEPNESS * w) / np.exp(_WINDOW_STEEPNESS * params.w_max)

def write_step(w: States, params: DeviceParams) -> States:
    """
    State after one '1' slot: the write voltage is applied for t_pulse.
    """
    delta = window(w, params) * params.t_pulse * params.lambda_ * np.sinh(params.eta * params.v_write)
    return np.clip(w + delta, params.w_min, params.w_max)

def decay_step(w: States, params: DeviceParams) -> States:
    """
    State after one '0' slot: no voltage, the state relaxes towards w_min.
    """
    delta = (w - params.w_min) * -np.expm1(-params.t_pulse / params.tau)
    return np.clip(w - delta, params.w_min, params.w_max)

def current(w: States, voltage: float, params: DeviceParams) -> States:
    """
    I = (1 - w) alpha [1 - exp(-beta V)] + w gamma sinh(delta V)
    """
    return (
        (1.0 - w) * params.alpha * -np.expm1(-params.beta * voltage)
        + w * params.gamma * np.sinh(params.delta * voltage)
    )

def energy(w: States, voltage: float, params: DeviceParams) -> States:
    """
    Energy of one pulse of width t_pulse, using the current at the state held at pulse start.
    """
    return voltage * current(w, voltage, params) * params.t_pulse

def _checked(state: DeviceState, params: DeviceParams) -> DeviceState:
    return DeviceState.at(state.w, params)

def write_update(state: DeviceState, params: DeviceParams) -> DeviceState:
    _checked(state, params)
    return DeviceState(w=float(write_step(state.w, params)))

def decay_update(state: DeviceState, params: DeviceParams) -> DeviceState:
    _checked(state, params)
    return DeviceState(w=float(decay_step(state.w, params)))

def read_current(state: DeviceState, voltage: float, params: DeviceParams) -> float:
    _checked(state, params)
    return float(current(state.w, voltage, params))

def pulse_energy(state: DeviceState, voltage: float, params: DeviceParams) -> float:
    _checked(state, params)
    return float(energy(state.w, voltage, params))

def apply_slot(state: DeviceState, slot: int, params: DeviceParams) -> DeviceState:
    return write_update(state, params) if slot else decay_update(state, params)

def trajectory(
        slots: Sequence[int],
        params: DeviceParams,
        start: DeviceState | None = None
) -> List[Dict[str, float]]:
    """
    Per-slot trace of a single device: the state after each slot, the current a
    read pulse would draw at that point and the energy the slot itself consumed.
    Row 0 is the start state.
    """
    state = _checked(start, params) if start is not None else DeviceState.fresh(params)
    rows = [{
        "slot": 0,
        "pulse": 0,
        "w": state.w,
        "read_current": read_current(state, params.v_read, params),
        "slot_energy": 0.0
    }]

    for index, slot in enumerate(slots, start=1):
        slot_energy = pulse_energy(state, params.v_write, params) if slot else 0.0
        state = apply_slot(state, slot, params)
        rows.append({
            "slot": index,
            "pulse": int(slot),
            "w": state.w,
            "read_current": read_current(state, params.v_read, params),
            "slot_energy": slot_energy
        })

    _logger.debug(f"Traced {len(slots)} slots, final w={state.w:.6f}")
    return rows
