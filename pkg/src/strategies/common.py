"""
State shared by all channel-access strategies
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from ..utils import SENSOR_STREAM, spawn_generator


class Outcome(Enum):
    """Feedback for one transmission, delivered at packet end"""

    SUCCESS = "success"
    FAILURE = "failure"


@dataclass
class PolicyState:
    """
    Mutable per-run scheduling state; owned by exactly one simulation

    Coordinated policies use turn, trials_used, block_order, block_cursor and
    successes. ALOHA policies use rngs, slot_length and last_success_slot.
    """

    num_sensors: int
    slot_length: float = 1.0
    turn: int = 0
    trials_used: int = 0
    started: bool = False
    block_order: Tuple[int, ...] = ()
    block_cursor: int = 0
    successes: List[int] = field(default_factory=list)
    last_success_slot: List[Optional[int]] = field(default_factory=list)
    rngs: List[np.random.Generator] = field(default_factory=list, repr=False)

    @classmethod
    def create(cls, num_sensors, seed, slot_length=1.0, block_order=()):
        return cls(
            num_sensors=num_sensors,
            slot_length=slot_length,
            block_order=tuple(block_order),
            successes=[0] * num_sensors,
            last_success_slot=[None] * num_sensors,
            rngs=[spawn_generator(seed, SENSOR_STREAM, g) for g in range(num_sensors)],
        )


def new_state(policy, seed: int, slot_length: float = 1.0) -> PolicyState:
    """
    Fresh scheduling state for a policy

    Args:
        policy: CoordinatedPolicy or AlohaPolicy
        seed: Master seed; sensor g draws from sub-stream (SENSOR_STREAM, g)
        slot_length: Slot duration (Delta) for ALOHA policies

    Returns:
        PolicyState
    """
    return policy.new_state(seed, slot_length)
