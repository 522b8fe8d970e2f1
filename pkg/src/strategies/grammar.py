"""
Text form of policies used in config files, grid files and CSV output

    max-trials:[1,inf]
    multiple-success:[2,1]
    individual-cap:[0.3,0.3]
    threshold-adra:[1.0,1.0]:[0,5]
"""
import re

from ..exceptions import ConfigError
from ..utils import format_number
from .aloha import AlohaPolicy, AlohaVariant
from .coordinated import UNBOUNDED, CoordinatedPolicy, CoordinatedVariant

_SPEC_RE = re.compile(r"^\s*([a-z-]+)\s*:\s*\[([^\]]*)\]\s*(?::\s*\[([^\]]*)\])?\s*$")

FAMILIES = tuple(v.value for v in CoordinatedVariant) + tuple(v.value for v in AlohaVariant)


def _numbers(text, allow_inf, spec):
    items = [item.strip() for item in text.split(",")]
    if not items or any(not item for item in items):
        raise ConfigError(f"empty entry in policy spec {spec!r}")
    values = []
    for item in items:
        if item.lower() == "inf":
            if not allow_inf:
                raise ConfigError(f"'inf' is only allowed for max-trials: {spec!r}")
            values.append(UNBOUNDED)
            continue
        try:
            values.append(float(item))
        except ValueError as exc:
            raise ConfigError(f"not a number: {item!r} in {spec!r}") from exc
    return values


def parse_policy(spec: str):
    """
    Parse a policy spec string

    Args:
        spec: e.g. "threshold-adra:[0.5,0.5]:[0,10]"

    Returns:
        CoordinatedPolicy or AlohaPolicy

    Raises:
        ConfigError: unknown family or malformed lists
    """
    match = _SPEC_RE.match(spec or "")
    if not match:
        raise ConfigError(f"malformed policy spec {spec!r}; expected family:[v1,v2,...]")
    family, first, second = match.groups()
    if family not in FAMILIES:
        raise ConfigError(f"unknown policy family {family!r}; choose one of {', '.join(FAMILIES)}")
    if (family == AlohaVariant.THRESHOLD_ADRA.value) != (second is not None):
        raise ConfigError(f"only threshold-adra takes a second list: {spec!r}")

    if family == CoordinatedVariant.MAX_TRIALS.value:
        return CoordinatedPolicy(CoordinatedVariant.MAX_TRIALS, max_trials=tuple(_numbers(first, True, spec)))
    if family == CoordinatedVariant.MULTIPLE_SUCCESS.value:
        return CoordinatedPolicy(CoordinatedVariant.MULTIPLE_SUCCESS, success_quota=tuple(_numbers(first, False, spec)))
    caps = tuple(_numbers(first, False, spec))
    if family == AlohaVariant.INDIVIDUAL_CAP.value:
        return AlohaPolicy(AlohaVariant.INDIVIDUAL_CAP, cap=caps)
    thresholds = tuple(_numbers(second, False, spec))
    if len(thresholds) != len(caps):
        raise ConfigError(f"threshold-adra lists differ in length: {spec!r}")
    return AlohaPolicy(AlohaVariant.THRESHOLD_ADRA, cap=caps, threshold=thresholds)


def format_policy(policy) -> str:
    """Inverse of parse_policy"""
    lists = ["[" + ",".join(format_number(v) for v in values) + "]" for values in policy.parameters]
    return policy.variant.value + ":" + ":".join(lists)
