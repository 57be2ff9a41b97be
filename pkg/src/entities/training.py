from pydantic import BaseModel, ConfigDict, PositiveFloat, PositiveInt

class TrainingSettings(BaseModel):
    """
    Readout training knobs as written in an experiment config (the seed comes
    from the top level of the config).
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    epochs: PositiveInt = 500
    learning_rate: PositiveFloat = 0.02
    shuffle: bool = True
    bias: bool = False

class TrainConfig(TrainingSettings):
    seed: int = 0
