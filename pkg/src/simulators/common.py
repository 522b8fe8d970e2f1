"""
Configuration, result types and loss bookkeeping shared by both simulators
"""
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .. import config
from ..delta_models import ConstantDelta, DeltaModel
from ..exceptions import ConfigError, NumericalRejection, ZeroDuration
from ..gauss_markov import LinearSystem, LossEvaluator
from ..utils import standard_error


class TransmissionRecord(NamedTuple):
    sensor: int
    start: float
    duration: float
    success: bool


class DeliveryRecord(NamedTuple):
    """Event-log exchange format consumed by the trajectory oracle"""

    sensor: int
    generation_time: float
    delivery_time: float


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    """
    Inputs of one seeded simulation run

    Args:
        systems: One LinearSystem per sensor
        delta_model: Transmit-duration model
        epsilon: Decoding error probability
        num_packets: Number of simulated transmissions K
        seed: Master seed
        warmup_fraction: Leading fraction of packets excluded from the averages
        num_batches: Segments used for the batch-means standard error
        record_events: Keep a TransmissionRecord per packet
    """

    systems: Tuple[LinearSystem, ...]
    delta_model: DeltaModel = ConstantDelta(config.DEFAULT_DELTA)
    epsilon: float = config.DEFAULT_EPSILON
    num_packets: int = config.DEFAULT_NUM_PACKETS
    seed: int = 0
    warmup_fraction: float = config.DEFAULT_WARMUP_FRACTION
    num_batches: int = config.DEFAULT_NUM_BATCHES
    record_events: bool = False

    def __post_init__(self):
        object.__setattr__(self, "systems", tuple(self.systems))
        if not self.systems:
            raise ConfigError("at least one sensor system is required")
        if int(self.num_packets) != self.num_packets or self.num_packets < 1:
            raise ConfigError(f"num_packets must be a positive integer, got {self.num_packets}")
        if not 0 <= self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not 0 <= self.warmup_fraction < 1:
            raise ConfigError(f"warmup_fraction must lie in [0, 1), got {self.warmup_fraction}")
        if self.num_batches < 1:
            raise ConfigError("num_batches must be at least 1")

    @property
    def num_sensors(self) -> int:
        return len(self.systems)

    def with_seed(self, seed: int) -> "SimulationConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """
    Per-sensor averages and counters of one run

    mse = integrated_loss / total_time, both restricted to the post-warm-up part.
    """

    mse: np.ndarray
    aoi_mean: np.ndarray
    total_time: float
    integrated_loss: np.ndarray
    stderr: np.ndarray
    successes: np.ndarray
    failures: np.ndarray
    collisions: np.ndarray
    slots: int = 0
    events: Tuple[TransmissionRecord, ...] = field(default=(), repr=False)

    @property
    def num_sensors(self) -> int:
        return len(self.mse)

    def deliveries(self) -> List[DeliveryRecord]:
        return [
            DeliveryRecord(e.sensor, e.start, e.start + e.duration)
            for e in self.events if e.success
        ]


def build_evaluators(systems: Sequence[LinearSystem]) -> List[LossEvaluator]:
    """One LossEvaluator per sensor; numerical rejections name the sensor"""
    evaluators = []
    for g, system in enumerate(systems):
        try:
            evaluators.append(LossEvaluator(system))
        except NumericalRejection as exc:
            raise exc.with_sensor(g)
    return evaluators


class LossLedger:
    """
    Accumulates packet-integrated MSE and AoI area per sensor

    Holds the per-sensor loop state of the simulation algorithms: last stored
    transmit time and stored transmission delay. A run is cut into segments at
    packet boundaries; closing a segment integrates every sensor's open
    interval up to the cut and restarts it from the age reached there, which
    is exact because L(a, c) = L(a, b) + L(b, c).

    Args:
        evaluators: LossEvaluator per sensor
        num_packets: K
        num_batches: Segments after warm-up
        warmup_fraction: Fraction of packets in the discarded leading segment
    """

    def __init__(self, evaluators, num_packets, num_batches, warmup_fraction):
        self.evaluators = evaluators
        size = len(evaluators)
        self.last_time = [0.0] * size
        self.last_delay = [0.0] * size
        self._loss = [0.0] * size
        self._aoi = [0.0] * size
        self._segment_start = 0.0
        self._segments = []

        warmup = int(round(warmup_fraction * num_packets))
        remaining = num_packets - warmup
        batches = max(1, min(num_batches, remaining))
        cuts = {warmup + (i * remaining) // batches for i in range(1, batches)}
        if warmup > 0:
            cuts.add(warmup)
        self._cuts = sorted(c for c in cuts if 0 < c < num_packets)
        self._cut_index = 0
        self._warmup_segments = 1 if warmup > 0 else 0

    def due(self, k: int) -> bool:
        """True when packet k starts a new segment"""
        if self._cut_index < len(self._cuts) and self._cuts[self._cut_index] == k:
            self._cut_index += 1
            return True
        return False

    def _integrate(self, g, tau_lo, tau_hi):
        self._loss[g] += self.evaluators[g](tau_lo, tau_hi)
        self._aoi[g] += 0.5 * (tau_hi * tau_hi - tau_lo * tau_lo)

    def deliver(self, g: int, start: float, delay: float):
        """Successful packet of sensor g generated at `start`, received after `delay`"""
        self._integrate(g, self.last_delay[g], start + delay - self.last_time[g])
        self.last_time[g] = start
        self.last_delay[g] = delay

    def close_segment(self, time: float):
        """Integrate every open interval up to `time` and start a new segment there"""
        for g in range(len(self.evaluators)):
            age = time - self.last_time[g]
            self._integrate(g, self.last_delay[g], age)
            self.last_delay[g] = age
        self._segments.append((list(self._loss), list(self._aoi), time - self._segment_start))
        self._loss = [0.0] * len(self.evaluators)
        self._aoi = [0.0] * len(self.evaluators)
        self._segment_start = time

    def finalize(self, end_time: float, successes, failures, collisions, slots=0, events=()) -> SimulationResult:
        """Align all sensors to end_time and turn the kept segments into a SimulationResult"""
        self.close_segment(end_time)
        kept = [s for s in self._segments[self._warmup_segments:] if s[2] > 0]
        total_time = float(sum(s[2] for s in kept))
        if not total_time > 0:
            raise ZeroDuration("simulation covered no time after warm-up")
        loss = np.array([sum(s[0][g] for s in kept) for g in range(len(self.evaluators))])
        aoi = np.array([sum(s[1][g] for s in kept) for g in range(len(self.evaluators))])
        batch_mse = np.array([[s[0][g] / s[2] for s in kept] for g in range(len(self.evaluators))])
        stderr = np.array([standard_error(row) for row in batch_mse])
        with np.errstate(invalid="ignore"):
            mse = loss / total_time
        return SimulationResult(
            mse=mse,
            aoi_mean=aoi / total_time,
            total_time=total_time,
            integrated_loss=loss,
            stderr=stderr,
            successes=np.asarray(successes, dtype=np.int64),
            failures=np.asarray(failures, dtype=np.int64),
            collisions=np.asarray(collisions, dtype=np.int64),
            slots=int(slots),
            events=tuple(events),
        )


def check_policy_size(policy, config: SimulationConfig):
    if policy.num_sensors != config.num_sensors:
        raise ConfigError(
            f"policy has {policy.num_sensors} sensors but the config has {config.num_sensors} systems"
        )
