"""
Time-average MSE and AoI under distributed slotted ALOHA

Every sensor keeps its own next transmission slot. The earliest one (lowest
index on ties) is processed next; it succeeds only if no other sensor starts
before it ends, the previously processed packet did not overlap it (carry
flag) and the channel does not corrupt it.
"""
import logging

from ..exceptions import ConfigError
from ..strategies import AlohaPolicy, Outcome, aloha_next_slot
from ..utils import CHANNEL_STREAM, spawn_generator
from .common import (
    LossLedger, SimulationConfig, SimulationResult, TransmissionRecord,
    build_evaluators, check_policy_size,
)

logger = logging.getLogger(__name__)


def simulate_aloha(config: SimulationConfig, policy: AlohaPolicy) -> SimulationResult:
    """
    Run K transmissions of a slotted-ALOHA policy and average the estimation error

    Args:
        config: SimulationConfig with a constant transmit duration (the slot length)
        policy: AlohaPolicy with one parameter per system

    Returns:
        SimulationResult with collision counts and the number of elapsed slots
    """
    check_policy_size(policy, config)
    if not config.delta_model.is_constant:
        raise ConfigError("slotted ALOHA needs a constant transmit duration")
    evaluators = build_evaluators(config.systems)
    size = config.num_sensors
    num_packets = int(config.num_packets)
    delta = config.delta_model.mean

    state = policy.new_state(config.seed, delta)
    noise = spawn_generator(config.seed, CHANNEL_STREAM).random(num_packets)
    success_probability = 1.0 - config.epsilon
    ledger = LossLedger(evaluators, num_packets, config.num_batches, config.warmup_fraction)

    next_slot = [aloha_next_slot(policy, g, state, None, None) for g in range(size)]
    successes = [0] * size
    failures = [0] * size
    collisions = [0] * size
    events = []
    logger.info("ALOHA run: %s sensors, %s packets, seed %s", size, num_packets, config.seed)

    carry = True
    end_slot = 0
    sensors = range(size)
    for k in range(num_packets):
        g = min(sensors, key=lambda i: (next_slot[i], i))
        slot = next_slot[g]
        if ledger.due(k):
            ledger.close_segment(slot * delta)
        # t_g' < t_g + delta, in slots. Pending slots count even after the last
        # packet, so the K-th packet can collide with a transmission that is
        # never processed and has no event of its own.
        clear = all(next_slot[h] > slot for h in sensors if h != g)
        if clear and carry and noise[k] < success_probability:
            ledger.deliver(g, slot * delta, delta)
            successes[g] += 1
            outcome = Outcome.SUCCESS
        else:
            failures[g] += 1
            if not (clear and carry):
                collisions[g] += 1
            outcome = Outcome.FAILURE
        if config.record_events:
            events.append(TransmissionRecord(g, slot * delta, delta, outcome is Outcome.SUCCESS))
        carry = clear
        end_slot = max(end_slot, slot + 1)
        next_slot[g] = aloha_next_slot(policy, g, state, slot, outcome)

    return ledger.finalize(end_slot * delta, successes, failures, collisions, slots=end_slot, events=events)
