"""
Utility functions for the project
"""
import math

import numpy as np

# Stream identifiers for seeded generators; each sensor gets its own
# sub-stream so adding a sensor leaves the other sensors' draws untouched.
CHANNEL_STREAM = 0
SENSOR_STREAM = 1
DELTA_STREAM = 2
TRIAL_STREAM = 3


def spawn_generator(seed, *key):
    """
    Create an independent numpy Generator derived from a master seed

    Args:
        seed: Master seed (non-negative integer)
        key: Integers naming the sub-stream, e.g. (SENSOR_STREAM, g)

    Returns:
        numpy.random.Generator
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(sequence))


def relative_error(value, reference):
    """
    Relative deviation of value from reference, safe for tiny references

    Args:
        value: Observed value
        reference: Expected value

    Returns:
        |value - reference| / |reference| (0.0 when both are the same infinity)
    """
    if math.isinf(value) and math.isinf(reference) and value == reference:
        return 0.0
    scale = max(abs(reference), np.finfo(float).tiny)
    return abs(value - reference) / scale


def format_number(value):
    """Full-precision decimal text for CSV cells and policy specs ('inf' for infinity)"""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def standard_error(samples):
    """
    Standard error of the mean of a 1-D sample

    Args:
        samples: Sequence of floats

    Returns:
        std(ddof=1) / sqrt(n), inf if any sample is infinite, nan if n < 2
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        return float("nan")
    if not np.all(np.isfinite(samples)):
        return float("inf")
    return float(np.std(samples, ddof=1) / math.sqrt(samples.size))
