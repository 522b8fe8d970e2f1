"""
Transmit-duration models

A packet occupies the channel for a duration Delta drawn from one of these
models. Only ConstantDelta is slot-compatible; UniformDelta exercises the
stochastic-duration paths of the coordinated simulator and the general
lower bound.
"""
from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import ConfigError


@dataclass(frozen=True)
class ConstantDelta:
    """Every transmission takes exactly `value` time units"""

    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ConfigError(f"transmit duration must be positive, got {self.value}")

    @property
    def is_constant(self) -> bool:
        return True

    @property
    def mean(self) -> float:
        return float(self.value)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, float(self.value))


@dataclass(frozen=True)
class UniformDelta:
    """Durations drawn i.i.d. uniformly from [low, high]"""

    low: float
    high: float

    def __post_init__(self):
        if not (0 < self.low <= self.high):
            raise ConfigError(f"uniform duration needs 0 < low <= high, got [{self.low}, {self.high}]")

    @property
    def is_constant(self) -> bool:
        return self.low == self.high

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, size)


DeltaModel = Union[ConstantDelta, UniformDelta]


def delta_from_config(value) -> DeltaModel:
    """
    Build a duration model from its config representation

    Args:
        value: A positive number, or {"uniform": [low, high]}

    Returns:
        ConstantDelta or UniformDelta
    """
    if isinstance(value, dict):
        if set(value) != {"uniform"} or len(value["uniform"]) != 2:
            raise ConfigError(f"unsupported delta model: {value!r}")
        low, high = value["uniform"]
        return UniformDelta(float(low), float(high))
    try:
        number = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"delta must be a number, got {value!r}") from exc
    return ConstantDelta(number)


def delta_to_config(model: DeltaModel):
    """Inverse of delta_from_config"""
    if isinstance(model, ConstantDelta):
        return model.value
    return {"uniform": [model.low, model.high]}
