"""
Shared fixtures: the two sensor systems of the numerical study, a scalar
system and a generator of random diagonalizable systems
"""
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.gauss_markov import LinearSystem  # noqa: E402

DRIFT_1 = [[-0.04, 0.03, -0.05], [-0.01, -0.06, 0.05], [0.2, 0.15, -0.4]]
DIFFUSION_1 = [[4.0, 1.0, 3.0], [1.0, 0.25, 0.75], [3.0, 0.75, 2.25]]
DRIFT_2 = [[-0.02, 0.0], [0.0, -0.03]]
DIFFUSION_2 = [[0.7, 0.2], [0.2, 0.6]]


@pytest.fixture
def stable_systems():
    return (LinearSystem(DRIFT_1, DIFFUSION_1), LinearSystem(DRIFT_2, DIFFUSION_2))


@pytest.fixture
def unstable_systems(stable_systems):
    return tuple(system.negated() for system in stable_systems)


@pytest.fixture
def scalar_system():
    """dx = -0.5 x dt + dW: Upsilon = -1, Phi = 1"""
    return LinearSystem([[-0.5]], [[1.0]])


def make_random_system(rng, dim, unstable=False):
    """
    Diagonalizable real system with well separated spectrum

    Stable modes have real parts in [-1, -0.5], unstable ones in [0.1, 0.3],
    so no eigenvalue pair comes close to resonance.
    """
    blocks = np.zeros((dim, dim))
    i = 0
    while i < dim:
        growing = unstable and rng.random() < 0.5
        real = rng.uniform(0.1, 0.3) if growing else rng.uniform(-1.0, -0.5)
        if i + 1 < dim and rng.random() < 0.5:
            imag = rng.uniform(0.2, 1.0)
            blocks[i:i + 2, i:i + 2] = [[real, imag], [-imag, real]]
            i += 2
        else:
            blocks[i, i] = real
            i += 1
    basis = np.eye(dim) + 0.3 * rng.standard_normal((dim, dim))
    drift = basis @ blocks @ np.linalg.inv(basis)
    factor = rng.standard_normal((dim, dim))
    return LinearSystem(drift, factor @ factor.T)


@pytest.fixture
def random_systems():
    """100 random systems of dimension 1 to 5, mixed stable and unstable"""
    rng = np.random.default_rng(20240611)
    return [make_random_system(rng, int(rng.integers(1, 6)), unstable=bool(k % 2)) for k in range(100)]
