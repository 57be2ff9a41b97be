from typing import Self

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

class DeviceParams(BaseModel):
    """
    Fitting parameters of the volatile (metal-oxide) memristor plus the pulse
    scheme used to drive it. Defaults reproduce the published device.
    """
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    alpha: PositiveFloat = 1e-8 # A
    beta: PositiveFloat = 0.5 # 1/V
    gamma: PositiveFloat = 1e-5 # A
    delta: PositiveFloat = 4.0 # 1/V
    lambda_: PositiveFloat = Field(default=1e3, alias="lambda") # 1/s
    eta: PositiveFloat = 8.0 # 1/V
    tau: PositiveFloat = 5e-9 # s
    w_min: PositiveFloat = 0.1
    w_max: PositiveFloat = 1.0
    v_write: PositiveFloat = 1.5 # V
    v_read: PositiveFloat = 0.6 # V
    t_pulse: PositiveFloat = 1e-9 # s

    @model_validator(mode="after")
    def _check_state_range(self) -> Self:
        if self.w_min >= self.w_max:
            raise ValueError(f"w_min ({self.w_min}) must be lower than w_max ({self.w_max})")
        return self

class DeviceStateError(ValueError):
    pass

class DeviceState(BaseModel):
    model_config = ConfigDict(frozen=True)

    w: float

    @staticmethod
    def fresh(params: DeviceParams) -> 'DeviceState':
        return DeviceState(w=params.w_min)

    @staticmethod
    def at(w: float, params: DeviceParams) -> 'DeviceState':
        """
        A state inside [w_min, w_max]; anything else is rejected.
        """
        if not params.w_min <= w <= params.w_max:
            raise DeviceStateError(f"State w={w} lies outside [{params.w_min}, {params.w_max}]")
        return DeviceState(w=w)
