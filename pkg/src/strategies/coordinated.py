"""
Coordinated (centrally scheduled) channel-access policies

max-trials-(P_1, ..., P_G): sensors take turns in ascending cyclic order; a
turn ends after the first success or after P_g attempts.

multiple-success-(Q_1, ..., Q_G): every interval holds Q_g blocks of sensor g,
spread out as evenly as possible; a block ends after its first success.
"""
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

from ..exceptions import ConfigError
from .common import Outcome, PolicyState

UNBOUNDED = math.inf


class CoordinatedVariant(Enum):
    MAX_TRIALS = "max-trials"
    MULTIPLE_SUCCESS = "multiple-success"


@dataclass(frozen=True)
class CoordinatedPolicy:
    """
    Parameterized coordinated policy

    Args:
        variant: CoordinatedVariant
        max_trials: P_g per sensor (positive int or UNBOUNDED), max-trials only
        success_quota: Q_g per sensor (positive int), multiple-success only
    """

    variant: CoordinatedVariant
    max_trials: Tuple[float, ...] = ()
    success_quota: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.variant is CoordinatedVariant.MAX_TRIALS:
            if not self.max_trials or self.success_quota:
                raise ConfigError("max-trials needs max_trials and no success_quota")
            for value in self.max_trials:
                if not (value == UNBOUNDED or (float(value).is_integer() and value >= 1)):
                    raise ConfigError(f"max-trials entries must be positive integers or inf, got {value}")
            object.__setattr__(self, "max_trials", tuple(v if v == UNBOUNDED else int(v) for v in self.max_trials))
        else:
            if not self.success_quota or self.max_trials:
                raise ConfigError("multiple-success needs success_quota and no max_trials")
            for value in self.success_quota:
                if not (float(value).is_integer() and value >= 1):
                    raise ConfigError(f"multiple-success quotas must be positive integers, got {value}")
            object.__setattr__(self, "success_quota", tuple(int(v) for v in self.success_quota))

    @property
    def num_sensors(self) -> int:
        if self.variant is CoordinatedVariant.MAX_TRIALS:
            return len(self.max_trials)
        return len(self.success_quota)

    @property
    def parameters(self) -> Tuple:
        if self.variant is CoordinatedVariant.MAX_TRIALS:
            return (self.max_trials,)
        return (self.success_quota,)

    def new_state(self, seed, slot_length=1.0) -> PolicyState:
        order = ()
        if self.variant is CoordinatedVariant.MULTIPLE_SUCCESS:
            order = multiple_success_block_order(self.success_quota)
        return PolicyState.create(self.num_sensors, seed, slot_length, order)


def max_trials(*limits) -> CoordinatedPolicy:
    return CoordinatedPolicy(CoordinatedVariant.MAX_TRIALS, max_trials=tuple(limits))


def multiple_success(*quotas) -> CoordinatedPolicy:
    return CoordinatedPolicy(CoordinatedVariant.MULTIPLE_SUCCESS, success_quota=tuple(quotas))


def round_robin(num_sensors: int) -> CoordinatedPolicy:
    """max-trials with a single attempt per turn"""
    return max_trials(*([1] * num_sensors))


def maximum_age(num_sensors: int) -> CoordinatedPolicy:
    """max-trials where every turn lasts until a success"""
    return max_trials(*([UNBOUNDED] * num_sensors))


def multiple_success_block_order(quotas) -> List[int]:
    """
    Order of the transmission blocks within one multiple-success interval

    Block j of sensor g sits at fractional position (j + 1/2) / Q_g; blocks are
    sorted by position, ties by sensor index.

    Args:
        quotas: Q_g per sensor

    Returns:
        List of zero-based sensor indices of length sum(Q)
    """
    if any(q < 1 for q in quotas):
        raise ConfigError(f"quotas must be at least 1, got {tuple(quotas)}")
    blocks = [
        (Fraction(2 * j + 1, 2 * q), g)
        for g, q in enumerate(quotas)
        for j in range(q)
    ]
    return [g for _, g in sorted(blocks)]


def coordinated_next(policy: CoordinatedPolicy, state: PolicyState, last_outcome: Optional[Outcome]) -> int:
    """
    Sensor that transmits the next back-to-back packet

    Args:
        policy: CoordinatedPolicy
        state: PolicyState from policy.new_state(...)
        last_outcome: Outcome of the previous packet, None before the first

    Returns:
        Zero-based sensor index
    """
    if policy.variant is CoordinatedVariant.MAX_TRIALS:
        if state.started:
            spent = state.trials_used >= policy.max_trials[state.turn]
            if last_outcome is Outcome.SUCCESS:
                state.successes[state.turn] += 1
            if last_outcome is Outcome.SUCCESS or spent:
                state.turn = (state.turn + 1) % state.num_sensors
                state.trials_used = 0
        state.started = True
        state.trials_used += 1
        return state.turn

    if state.started and last_outcome is Outcome.SUCCESS:
        current = state.block_order[state.block_cursor]
        state.successes[current] += 1
        state.block_cursor += 1
        if state.block_cursor == len(state.block_order):
            state.block_cursor = 0
            state.successes = [0] * state.num_sensors
    state.started = True
    return state.block_order[state.block_cursor]
