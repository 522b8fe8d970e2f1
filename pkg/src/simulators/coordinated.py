"""
Time-average MSE under coordinated (collision-free) scheduling

Packets are sent back to back: the next transmission starts when the previous
one ends. Each packet fails independently with probability epsilon.
"""
import logging

from ..strategies import CoordinatedPolicy, Outcome, coordinated_next
from ..utils import CHANNEL_STREAM, DELTA_STREAM, spawn_generator
from .common import (
    LossLedger, SimulationConfig, SimulationResult, TransmissionRecord,
    build_evaluators, check_policy_size,
)

logger = logging.getLogger(__name__)


def simulate_coordinated(config: SimulationConfig, policy: CoordinatedPolicy) -> SimulationResult:
    """
    Run K packets of a coordinated policy and average the estimation error

    Args:
        config: SimulationConfig
        policy: CoordinatedPolicy with one parameter per system

    Returns:
        SimulationResult
    """
    check_policy_size(policy, config)
    evaluators = build_evaluators(config.systems)
    size = config.num_sensors
    num_packets = int(config.num_packets)
    model = config.delta_model
    constant = model.is_constant
    delta = model.mean

    state = policy.new_state(config.seed)
    noise = spawn_generator(config.seed, CHANNEL_STREAM).random(num_packets)
    durations = None if constant else model.sample(spawn_generator(config.seed, DELTA_STREAM), num_packets)
    success_probability = 1.0 - config.epsilon
    ledger = LossLedger(evaluators, num_packets, config.num_batches, config.warmup_fraction)

    successes = [0] * size
    failures = [0] * size
    events = []
    logger.info("coordinated run: %s sensors, %s packets, seed %s", size, num_packets, config.seed)

    start = 0.0
    outcome = None
    for k in range(num_packets):
        if ledger.due(k):
            ledger.close_segment(start)
        g = coordinated_next(policy, state, outcome)
        duration = delta if constant else float(durations[k])
        if noise[k] < success_probability:
            ledger.deliver(g, start, duration)
            successes[g] += 1
            outcome = Outcome.SUCCESS
        else:
            failures[g] += 1
            outcome = Outcome.FAILURE
        if config.record_events:
            events.append(TransmissionRecord(g, start, duration, outcome is Outcome.SUCCESS))
        start = (k + 1) * delta if constant else start + duration

    return ledger.finalize(start, successes, failures, [0] * size, events=events)
