"""
Channel-access strategies: coordinated scheduling and slotted-ALOHA policies
"""
from .common import Outcome, PolicyState, new_state
from .coordinated import (
    UNBOUNDED, CoordinatedPolicy, CoordinatedVariant, coordinated_next, max_trials,
    maximum_age, multiple_success, multiple_success_block_order, round_robin,
)
from .aloha import AlohaPolicy, AlohaVariant, aloha_next_slot, aloha_next_time, individual_cap, threshold_adra
from .grammar import format_policy, parse_policy

__all__ = [
    "Outcome", "PolicyState", "new_state",
    "UNBOUNDED", "CoordinatedPolicy", "CoordinatedVariant", "coordinated_next", "max_trials",
    "maximum_age", "multiple_success", "multiple_success_block_order", "round_robin",
    "AlohaPolicy", "AlohaVariant", "aloha_next_slot", "aloha_next_time", "individual_cap", "threshold_adra",
    "format_policy", "parse_policy",
]
