"""
Slotted-ALOHA channel-access policies

Slots have length Delta and are indexed from 0. Each sensor draws per-slot
Bernoulli(R_g) decisions from its own generator; a run of failed draws
followed by a success is one geometric draw, so the next slot is
resume + Geometric(R_g) - 1.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from ..exceptions import ConfigError
from .common import Outcome, PolicyState


class AlohaVariant(Enum):
    INDIVIDUAL_CAP = "individual-cap"
    THRESHOLD_ADRA = "threshold-adra"


@dataclass(frozen=True)
class AlohaPolicy:
    """
    Parameterized ALOHA policy

    Args:
        variant: AlohaVariant
        cap: channel access probability R_g per sensor, in (0, 1]
        threshold: AoI pause threshold per sensor (threshold-ADRA only)
    """

    variant: AlohaVariant
    cap: Tuple[float, ...]
    threshold: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.cap:
            raise ConfigError("ALOHA policy needs at least one sensor")
        for value in self.cap:
            if not 0 < value <= 1:
                raise ConfigError(f"channel access probabilities must lie in (0, 1], got {value}")
        object.__setattr__(self, "cap", tuple(float(v) for v in self.cap))
        if self.variant is AlohaVariant.THRESHOLD_ADRA:
            if len(self.threshold) != len(self.cap):
                raise ConfigError("threshold-adra needs one threshold per sensor")
            if any(not (t >= 0 and math.isfinite(t)) for t in self.threshold):
                raise ConfigError(f"thresholds must be finite and non-negative, got {self.threshold}")
            object.__setattr__(self, "threshold", tuple(float(t) for t in self.threshold))
        elif self.threshold:
            raise ConfigError("individual-cap takes no thresholds")

    @property
    def num_sensors(self) -> int:
        return len(self.cap)

    @property
    def parameters(self) -> Tuple:
        if self.variant is AlohaVariant.THRESHOLD_ADRA:
            return (self.cap, self.threshold)
        return (self.cap,)

    def threshold_slots(self, g: int, slot_length: float) -> int:
        if self.variant is not AlohaVariant.THRESHOLD_ADRA:
            return 0
        return max(0, math.ceil(self.threshold[g] / slot_length - 1e-9))

    def new_state(self, seed, slot_length=1.0) -> PolicyState:
        return PolicyState.create(self.num_sensors, seed, slot_length)


def individual_cap(*caps) -> AlohaPolicy:
    return AlohaPolicy(AlohaVariant.INDIVIDUAL_CAP, cap=tuple(caps))


def threshold_adra(caps, thresholds) -> AlohaPolicy:
    return AlohaPolicy(AlohaVariant.THRESHOLD_ADRA, cap=tuple(caps), threshold=tuple(thresholds))


def aloha_next_slot(policy: AlohaPolicy, g: int, state: PolicyState,
                    previous_slot: Optional[int], feedback: Optional[Outcome]) -> int:
    """
    Slot index of sensor g's next transmission

    Args:
        policy: AlohaPolicy
        g: Zero-based sensor index
        state: PolicyState owning g's generator
        previous_slot: Slot of g's previous transmission, None at start
        feedback: Outcome of that transmission, None at start

    Returns:
        Slot index, strictly greater than previous_slot
    """
    pause = policy.threshold_slots(g, state.slot_length)
    if previous_slot is None:
        # t = 0 acts as the generation time of a free delivered sample
        state.last_success_slot[g] = 0
        resume = pause
    else:
        resume = previous_slot + 1
        if feedback is Outcome.SUCCESS:
            state.last_success_slot[g] = previous_slot
            resume = max(resume, previous_slot + pause)
    draw = int(state.rngs[g].geometric(policy.cap[g]))
    return resume + draw - 1


def aloha_next_time(policy: AlohaPolicy, g: int, state: PolicyState,
                    now: Optional[float], feedback: Optional[Outcome]) -> float:
    """
    Start time of sensor g's next transmission

    Args:
        policy: AlohaPolicy
        g: Zero-based sensor index
        state: PolicyState (slot_length = Delta)
        now: Start time of g's previous transmission, None at start
        feedback: Outcome of that transmission, None at start

    Returns:
        Slot-aligned time k * Delta
    """
    previous_slot = None if now is None else int(round(now / state.slot_length))
    return aloha_next_slot(policy, g, state, previous_slot, feedback) * state.slot_length
