"""
Brute-force validators for the closed forms

These share no code path with the eigenbasis formulas in gauss_markov:
Lyapunov solutions come from a dense Kronecker solve, error covariances from
Van Loan's block matrix exponential, and the MSE of a schedule from simulated
state trajectories.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy import integrate

from . import config
from .exceptions import InvalidInterval, NumericalRejection, SingularSystem, StepTooCoarse
from .gauss_markov import LinearSystem, spectral_decompose
from .simulators.common import DeliveryRecord
from .utils import TRIAL_STREAM, spawn_generator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrajectoryConfig:
    """
    Euler-Maruyama settings

    Args:
        step: Integration step (default Delta / 50)
        horizon: Simulated time span (at least 10 Delta)
        trials: Independent noise realizations
        seed: Master seed; trial j of sensor g uses sub-stream (TRIAL_STREAM, g, j)
        initial_state: Optional x_0 per sensor (zeros when omitted)
    """

    step: float
    horizon: float
    trials: int
    seed: int = 0
    initial_state: Optional[tuple] = None

    def __post_init__(self):
        if not self.step > 0 or not self.horizon > 0:
            raise ValueError("step and horizon must be positive")
        if self.step > self.horizon:
            raise ValueError("step exceeds horizon")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")

    @classmethod
    def for_delta(cls, delta, horizon, trials, seed=0, initial_state=None):
        return cls(step=delta / config.STEPS_PER_DELTA, horizon=max(horizon, 10 * delta),
                   trials=trials, seed=seed, initial_state=initial_state)


@dataclass(frozen=True, eq=False)
class TrajectoryEstimate:
    """Empirical per-sensor MSE with standard error across trials"""

    mse: np.ndarray
    stderr: np.ndarray


def _check_resonance(drift):
    eigvals = np.linalg.eigvals(drift)
    sums = eigvals[:, None] + np.conj(eigvals)[None, :]
    magnitudes = np.abs(eigvals)
    limits = config.RESONANCE_TOL * np.maximum(1.0, magnitudes[:, None] + magnitudes[None, :])
    if np.any(np.abs(sums) < limits):
        raise SingularSystem("drift has an eigenvalue pair summing to zero; the Lyapunov equation is singular")


def lyapunov_solve(system: LinearSystem) -> np.ndarray:
    """
    Solve A S + S A^T + D = 0 by vectorization

    Args:
        system: LinearSystem

    Returns:
        Symmetric n x n solution S (the steady-state error covariance when A is stable)
    """
    drift = system.drift
    _check_resonance(drift)
    n = system.dim
    identity = np.eye(n)
    operator = np.kron(identity, drift) + np.kron(drift, identity)
    try:
        solution = scipy.linalg.solve(operator, -system.diffusion.flatten(order="F"))
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise SingularSystem(str(exc)) from exc
    solution = solution.reshape((n, n), order="F")
    return 0.5 * (solution + solution.T)


def error_covariance(system: LinearSystem, tau: float) -> np.ndarray:
    """
    Covariance of x(t + tau) - e^{A tau} x(t), i.e. the integral of e^{As} D e^{A^T s} over [0, tau]

    Uses the upper-right block of expm([[-A, D], [0, A^T]] tau).
    """
    n = system.dim
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -system.drift
    block[:n, n:] = system.diffusion
    block[n:, n:] = system.drift.T
    exponential = scipy.linalg.expm(block * tau)
    return exponential[n:, n:].T @ exponential[:n, n:]


def quadrature_L(system: LinearSystem, tau_lo: float, tau_hi: float) -> float:
    """
    Packet-integrated MSE by adaptive quadrature of the error-covariance trace

    Args:
        system: LinearSystem
        tau_lo: Lower AoI bound
        tau_hi: Upper AoI bound

    Returns:
        Integral of trace(error_covariance(tau)) over [tau_lo, tau_hi]
    """
    spectral_decompose(system)
    if tau_lo < 0 or tau_lo > tau_hi:
        raise InvalidInterval(f"invalid AoI interval [{tau_lo}, {tau_hi})")
    if tau_lo == tau_hi:
        return 0.0
    value, _ = integrate.quad(
        lambda tau: float(np.trace(error_covariance(system, tau))),
        tau_lo, tau_hi, epsabs=1e-9, epsrel=1e-11, limit=500,
    )
    return value


def _trajectory_mse(system, deliveries, trajectory, sensor, step, draws_per_step=1):
    """
    Per-trial time-average squared error of one sensor

    Each step consumes draws_per_step normals per trial and uses their scaled
    sum, so a run at step h with 2 draws follows the same Brownian path as a
    run at step h / 2 with 1 draw.
    """
    n = system.dim
    trials = trajectory.trials
    num_steps = int(round(trajectory.horizon / step))
    drift = system.drift
    chol = np.linalg.cholesky(system.diffusion + config.CHOLESKY_JITTER * np.eye(n))
    propagate = scipy.linalg.expm(drift * step)

    snapshots_at: Dict[int, List[int]] = {}
    deliveries_at: Dict[int, List[int]] = {}
    for number, record in enumerate(deliveries):
        generated = int(round(record.generation_time / step))
        delivered = int(round(record.delivery_time / step))
        if delivered >= num_steps:
            continue
        snapshots_at.setdefault(generated, []).append(number)
        deliveries_at.setdefault(delivered, []).append(number)
    snapshots = {}
    lag_maps = {}

    if trajectory.initial_state is None:
        start = np.zeros(n)
    else:
        start = np.asarray(trajectory.initial_state[sensor], dtype=float)
    state = np.tile(start, (trials, 1))
    estimate = state.copy()
    squared_error = np.zeros(trials)

    rngs = [spawn_generator(trajectory.seed, TRIAL_STREAM, sensor, j) for j in range(trials)]
    chunk = 2048
    sqrt_step = math.sqrt(step)
    for first in range(0, num_steps, chunk):
        count = min(chunk, num_steps - first)
        noise = np.stack([rng.standard_normal((count * draws_per_step, n)) for rng in rngs], axis=1)
        if draws_per_step > 1:
            noise = noise.reshape(count, draws_per_step, trials, n).sum(axis=1) / math.sqrt(draws_per_step)
        increments = sqrt_step * noise @ chol.T
        for offset in range(count):
            i = first + offset
            for number in snapshots_at.get(i, ()):
                snapshots[number] = (i, state.copy())
            for number in deliveries_at.get(i, ()):
                generated, sample = snapshots.pop(number)
                lag = i - generated
                if lag not in lag_maps:
                    lag_maps[lag] = scipy.linalg.expm(drift * (lag * step))
                estimate = sample @ lag_maps[lag].T
            error = estimate - state
            squared_error += np.einsum("ij,ij->i", error, error)
            state = state + step * state @ drift.T + increments[offset]
            estimate = estimate @ propagate.T
    return squared_error / num_steps


def _summarize(per_trial):
    mean = float(np.mean(per_trial))
    if len(per_trial) < 2:
        return mean, math.inf
    return mean, float(np.std(per_trial, ddof=1) / math.sqrt(len(per_trial)))


def monte_carlo_mse(systems: Sequence[LinearSystem], schedule_trace: Sequence[DeliveryRecord],
                    trajectory: TrajectoryConfig, check_convergence: bool = False) -> TrajectoryEstimate:
    """
    Empirical MSE of a delivery schedule from simulated state trajectories

    Each sensor's state follows dx = A x dt + chol(D) dW (Euler-Maruyama); the
    receiver holds e^{A (t - t_i)} x(t_i) for the latest delivered sample.

    Args:
        systems: LinearSystem per sensor
        schedule_trace: DeliveryRecord list from a simulator event log
        trajectory: TrajectoryConfig
        check_convergence: Re-run at half the step and reject a coarse step

    Returns:
        TrajectoryEstimate with per-sensor mean and standard error

    Raises:
        StepTooCoarse: the half-step estimate differs by more than 2 standard errors
    """
    means, errors = [], []
    for g, system in enumerate(systems):
        deliveries = [record for record in schedule_trace if record.sensor == g]
        try:
            draws = 2 if check_convergence else 1
            mean, stderr = _summarize(_trajectory_mse(system, deliveries, trajectory, g, trajectory.step, draws))
            if check_convergence:
                fine_mean, fine_stderr = _summarize(
                    _trajectory_mse(system, deliveries, trajectory, g, trajectory.step / 2)
                )
                if abs(fine_mean - mean) > 2 * math.hypot(stderr, fine_stderr):
                    raise StepTooCoarse(
                        f"halving the step moved the estimate from {mean:.6g} to {fine_mean:.6g}"
                    )
        except NumericalRejection as exc:
            raise exc.with_sensor(g)
        logger.debug("trajectory oracle sensor %d: %.6g +/- %.2g", g + 1, mean, stderr)
        means.append(mean)
        errors.append(stderr)
    return TrajectoryEstimate(mse=np.array(means), stderr=np.array(errors))
