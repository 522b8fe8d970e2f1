"""
Seeded event-loop simulators for coordinated scheduling and slotted ALOHA
"""
from .common import DeliveryRecord, SimulationConfig, SimulationResult, TransmissionRecord
from .coordinated import simulate_coordinated
from .aloha import simulate_aloha
from ..strategies import AlohaPolicy


def simulate(config: SimulationConfig, policy) -> SimulationResult:
    """Dispatch to the simulator matching the policy family"""
    if isinstance(policy, AlohaPolicy):
        return simulate_aloha(config, policy)
    return simulate_coordinated(config, policy)


__all__ = [
    "DeliveryRecord", "SimulationConfig", "SimulationResult", "TransmissionRecord",
    "simulate", "simulate_aloha", "simulate_coordinated",
]
