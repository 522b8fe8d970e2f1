"""
Closed-form estimation-error machinery for Gauss-Markov sensors

Everything is evaluated in the eigenbasis of the drift matrix A = U diag(lambda) U^-1.
A Hermitian matrix X = U X~ U^H is carried through time as
e^{A tau} X e^{A^H tau} = U (X~ o E(tau)) U^H with E_mn(tau) = exp((lambda_m + conj(lambda_n)) tau),
and its trace is sum(X~ o E(tau) o W) with W = (U^H U)^T. No general matrix
exponential is ever formed.
"""
import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .delta_models import DeltaModel
from .exceptions import (
    ConfigError, DegenerateGeometricSum, ImaginaryResidue, InvalidInterval,
    NegativeResult, NonDiagonalizable, Resonance,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """
    Continuous-time dynamics of one sensor: dx = A x dt + noise with covariance rate D

    Args:
        drift: n x n real drift matrix A (1/time)
        diffusion: n x n symmetric PSD diffusion matrix D (state^2/time)
    """

    drift: np.ndarray
    diffusion: np.ndarray

    def __post_init__(self):
        drift = np.array(self.drift, dtype=float, ndmin=2)
        diffusion = np.array(self.diffusion, dtype=float, ndmin=2)
        if drift.ndim != 2 or drift.shape[0] != drift.shape[1] or drift.shape[0] < 1:
            raise ConfigError(f"drift must be a non-empty square matrix, got shape {drift.shape}")
        if diffusion.shape != drift.shape:
            raise ConfigError(f"diffusion shape {diffusion.shape} does not match drift shape {drift.shape}")
        scale = max(1.0, float(np.linalg.norm(diffusion)))
        if np.max(np.abs(diffusion - diffusion.T)) > config.SYMMETRY_TOL * scale:
            raise ConfigError("diffusion matrix is not symmetric")
        if np.min(np.linalg.eigvalsh(diffusion)) < -config.PSD_TOL * np.linalg.norm(diffusion):
            raise ConfigError("diffusion matrix is not positive semidefinite")
        drift.setflags(write=False)
        diffusion.setflags(write=False)
        object.__setattr__(self, "drift", drift)
        object.__setattr__(self, "diffusion", diffusion)

    @property
    def dim(self) -> int:
        return self.drift.shape[0]

    def negated(self) -> "LinearSystem":
        """Same noise, mirrored dynamics (A' = -A)"""
        return LinearSystem(-self.drift, self.diffusion)

    def to_config(self) -> dict:
        return {"drift": self.drift.tolist(), "diffusion": self.diffusion.tolist()}


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigendecomposition of a drift matrix in deterministic eigenvalue order"""

    eigvecs: np.ndarray
    eigvals: np.ndarray
    inv_eigvecs: np.ndarray
    condition: float

    @functools.cached_property
    def exponent_sums(self) -> np.ndarray:
        """S_mn = lambda_m + conj(lambda_n)"""
        return self.eigvals[:, None] + np.conj(self.eigvals)[None, :]

    @functools.cached_property
    def trace_weights(self) -> np.ndarray:
        """W with trace(U X~ U^H) = sum(X~ o W)"""
        return (self.eigvecs.conj().T @ self.eigvecs).T

    def to_modal(self, matrix: np.ndarray) -> np.ndarray:
        """U^-1 X U^-H"""
        return self.inv_eigvecs @ matrix @ self.inv_eigvecs.conj().T

    def from_modal(self, modal: np.ndarray) -> np.ndarray:
        """U X~ U^H"""
        return self.eigvecs @ modal @ self.eigvecs.conj().T

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.eigvals.real < -config.STABILITY_TOL))


@dataclass(frozen=True, eq=False)
class MseKernels:
    """
    Upsilon, Phi and B of the packet-integrated MSE, plus their modal forms

    upsilon_modal and phi_modal are U^-1 Upsilon U^-H and U^-1 Phi U^-H.
    """

    upsilon: np.ndarray
    phi: np.ndarray
    b: np.ndarray
    upsilon_modal: np.ndarray = field(repr=False)
    phi_modal: np.ndarray = field(repr=False)

    @functools.cached_property
    def trace_upsilon(self) -> float:
        return _real_part(np.trace(self.upsilon), float(np.sum(np.abs(np.diag(self.upsilon)))), "trace(Upsilon)")


@dataclass(frozen=True, eq=False)
class BoundData:
    """Psi and C of the constant-duration lower bound"""

    psi: np.ndarray
    c: np.ndarray
    delta: float
    epsilon: float
    psi_modal: np.ndarray = field(repr=False)


def _hermitian(matrix):
    return 0.5 * (matrix + matrix.conj().T)


def _real_part(value, scale, what):
    """Drop the imaginary part of a trace after checking it is round-off"""
    value = complex(value)
    if abs(value.imag) > config.IMAGINARY_TOL * max(1.0, abs(value.real), scale):
        raise ImaginaryResidue(f"{what} has imaginary residue {value.imag:.3e}")
    return value.real


def _modal_trace(weighted, exponent_sums, taus):
    """
    sum(weighted o exp(S tau)) for every tau in taus

    Args:
        weighted: X~ o W (n x n complex)
        exponent_sums: S (n x n complex)
        taus: 1-D array of non-negative times

    Returns:
        (real traces, magnitude scale of the summed terms), both 1-D arrays;
        entries overflow to +inf for growing modes
    """
    taus = np.asarray(taus, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        terms = weighted[None, :, :] * np.exp(exponent_sums[None, :, :] * taus[:, None, None])
        sums = terms.sum(axis=(1, 2))
        scales = np.abs(terms).sum(axis=(1, 2))
    finite = np.isfinite(scales)
    bad = finite & (np.abs(sums.imag) > config.IMAGINARY_TOL * np.maximum(1.0, scales))
    if np.any(bad):
        raise ImaginaryResidue(f"trace has imaginary residue {np.max(np.abs(sums.imag[bad])):.3e}")
    values = np.where(finite, sums.real, math.inf)
    return values, np.where(finite, scales, math.inf)


def _cumulative(kernels, spec, taus):
    """F(tau) = trace{e^{A tau} Phi e^{A^H tau}} - trace{Upsilon} tau, so L(lo, hi) = F(hi) - F(lo)"""
    taus = np.asarray(taus, dtype=float)
    weighted = kernels.phi_modal * spec.trace_weights
    values, scales = _modal_trace(weighted, spec.exponent_sums, taus)
    linear = kernels.trace_upsilon * taus
    return values - linear, scales + np.abs(linear)


def spectral_decompose(system: LinearSystem) -> SpectralData:
    """
    Diagonalize the drift matrix

    Args:
        system: LinearSystem

    Returns:
        SpectralData with eigenvalues sorted by real part, then imaginary part,
        both descending, ties by original index

    Raises:
        NonDiagonalizable: ill-conditioned eigenvectors or failed reconstruction
        Resonance: some lambda_m + conj(lambda_n) vanishes
    """
    drift = system.drift
    eigvals, eigvecs = np.linalg.eig(drift.astype(complex))
    order = sorted(range(len(eigvals)), key=lambda i: (-eigvals[i].real, -eigvals[i].imag, i))
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    condition = float(np.linalg.cond(eigvecs))
    if not np.isfinite(condition) or condition > config.CONDITION_LIMIT:
        raise NonDiagonalizable(f"eigenvector condition number {condition:.3e} exceeds {config.CONDITION_LIMIT:.0e}")

    inv_eigvecs = np.linalg.inv(eigvecs)
    reconstructed = eigvecs @ np.diag(eigvals) @ inv_eigvecs
    if np.max(np.abs(reconstructed - drift)) > config.RECONSTRUCTION_TOL * np.linalg.norm(drift):
        raise NonDiagonalizable("eigendecomposition does not reconstruct the drift matrix")
    if np.max(np.abs(eigvecs @ inv_eigvecs - np.eye(system.dim))) > config.INVERSE_TOL:
        raise NonDiagonalizable("eigenvector matrix inverse is inaccurate")

    spec = SpectralData(eigvecs=eigvecs, eigvals=eigvals, inv_eigvecs=inv_eigvecs, condition=condition)
    magnitudes = np.abs(eigvals)
    limits = config.RESONANCE_TOL * np.maximum(1.0, magnitudes[:, None] + magnitudes[None, :])
    resonant = np.argwhere(np.abs(spec.exponent_sums) < limits)
    if len(resonant):
        m, n = resonant[0]
        raise Resonance(f"eigenvalues {eigvals[m]:.6g} and {eigvals[n]:.6g} are resonant")

    logger.debug("decomposed %dx%d drift, eigenvalues %s, condition %.3g", system.dim, system.dim, eigvals, condition)
    return spec


def compute_kernels(spec: SpectralData, system: LinearSystem) -> MseKernels:
    """
    Build Upsilon and Phi as printed in the packet-integrated MSE formula

    Args:
        spec: SpectralData of system.drift
        system: LinearSystem supplying the diffusion matrix

    Returns:
        MseKernels (Upsilon, Phi Hermitian-symmetrized)
    """
    sums = spec.exponent_sums
    if np.any(sums == 0):
        raise Resonance("B kernel is singular")
    b = 1.0 / sums
    upsilon = _hermitian(spec.from_modal(spec.to_modal(system.diffusion) * b))
    upsilon_modal = spec.to_modal(upsilon)
    phi = _hermitian(spec.from_modal(upsilon_modal * b))
    phi_modal = spec.to_modal(phi)
    return MseKernels(upsilon=upsilon, phi=phi, b=b, upsilon_modal=upsilon_modal, phi_modal=phi_modal)


def analyze_system(system: LinearSystem):
    """
    Decompose a system and build its kernels in one step

    Returns:
        (SpectralData, MseKernels)
    """
    spec = spectral_decompose(system)
    return spec, compute_kernels(spec, system)


def packet_integrated_mse(kernels: MseKernels, spec: SpectralData, tau_lo: float, tau_hi: float) -> float:
    """
    Integral of the instantaneous MSE over the AoI interval [tau_lo, tau_hi)

    Args:
        kernels: MseKernels of the sensor
        spec: SpectralData of the sensor
        tau_lo: AoI at which the packet starts being used
        tau_hi: AoI at which it is replaced

    Returns:
        L(tau_lo, tau_hi) >= 0, +inf if the system grows past float range

    Raises:
        InvalidInterval: tau_lo < 0 or tau_lo > tau_hi
        NegativeResult: value below -1e-10 times the magnitude of its terms
    """
    if tau_lo < 0 or tau_lo > tau_hi:
        raise InvalidInterval(f"invalid AoI interval [{tau_lo}, {tau_hi})")
    if tau_lo == tau_hi:
        return 0.0
    values, scales = _cumulative(kernels, spec, [tau_hi, tau_lo])
    return _difference(values[0], values[1], max(scales[0], scales[1]))


def _difference(upper, lower, scale):
    if math.isinf(upper):
        return math.inf
    value = upper - lower
    if value < 0:
        if value < -config.CLAMP_TOL * max(1.0, scale):
            raise NegativeResult(f"packet-integrated MSE is negative ({value:.3e})")
        return 0.0
    return float(value)


def instantaneous_mse(kernels: MseKernels, spec: SpectralData, tau: float) -> float:
    """
    Expected squared estimation error at age tau

    Args:
        kernels: MseKernels of the sensor
        spec: SpectralData of the sensor
        tau: AoI

    Returns:
        trace{e^{A tau} Upsilon e^{A^H tau} - Upsilon} (>= 0)
    """
    if tau < 0:
        raise InvalidInterval(f"negative age {tau}")
    if tau == 0:
        return 0.0
    weighted = kernels.upsilon_modal * spec.trace_weights
    values, scales = _modal_trace(weighted, spec.exponent_sums, [tau])
    return _difference(values[0], kernels.trace_upsilon, max(scales[0], abs(kernels.trace_upsilon)))


def mse_upper_bound(kernels: MseKernels, spec: SpectralData) -> float:
    """
    MSE when every packet collides: -trace{Upsilon} for stable drift, +inf otherwise
    """
    if not spec.is_stable:
        return math.inf
    return -kernels.trace_upsilon


def lower_bound_data(kernels: MseKernels, spec: SpectralData, delta: float, epsilon: float) -> BoundData:
    """
    Build Psi and C for a constant transmit duration

    Raises:
        DegenerateGeometricSum: epsilon * e^{(lambda_m + conj(lambda_n)) delta} reaches 1 in modulus
    """
    if not delta > 0:
        raise InvalidInterval(f"transmit duration must be positive, got {delta}")
    if not 0 <= epsilon < 1:
        raise ConfigError(f"epsilon must lie in [0, 1), got {epsilon}")
    with np.errstate(over="ignore"):
        growth = np.exp(spec.exponent_sums * delta)
    ratio = epsilon * growth
    if np.max(np.abs(ratio)) >= 1.0 - config.DENOMINATOR_TOL:
        raise DegenerateGeometricSum(
            f"epsilon * exp(2 Re(lambda) delta) = {np.max(np.abs(ratio)):.4g} >= 1, lower bound is infinite"
        )
    denominator = 1.0 - ratio
    c = (1.0 - epsilon) / denominator
    if epsilon == 0:
        return BoundData(psi=kernels.phi, c=c, delta=delta, epsilon=epsilon, psi_modal=kernels.phi_modal)
    psi = _hermitian(spec.from_modal(kernels.phi_modal * c))
    return BoundData(psi=psi, c=c, delta=delta, epsilon=epsilon, psi_modal=spec.to_modal(psi))


def mse_lower_bound_constant(kernels: MseKernels, spec: SpectralData, delta: float, epsilon: float) -> float:
    """
    Lower bound for back-to-back transmissions of constant duration delta

    Args:
        kernels: MseKernels of the sensor
        spec: SpectralData of the sensor
        delta: Transmit duration
        epsilon: Decoding error probability

    Returns:
        Expected loss per successful-packet cycle divided by its expected length
    """
    bound = lower_bound_data(kernels, spec, delta, epsilon)
    mean_span = delta / (1.0 - epsilon)
    trace_upsilon = kernels.trace_upsilon
    psi_term, psi_scale = _modal_trace(bound.psi_modal * spec.trace_weights, spec.exponent_sums, [2 * delta])
    phi_term, phi_scale = _modal_trace(kernels.phi_modal * spec.trace_weights, spec.exponent_sums, [delta])
    # Grouped so epsilon = 0 reproduces F(2 delta) - F(delta) bit for bit
    upper = psi_term[0] - trace_upsilon * (2 * delta)
    lower = phi_term[0] - trace_upsilon * delta
    correction = (2 * delta - delta - mean_span) * trace_upsilon
    scale = max(psi_scale[0], phi_scale[0], abs(trace_upsilon) * 2 * delta)
    numerator = _difference(upper + correction, lower, scale)
    return numerator / mean_span


def mse_lower_bound_general(
    kernels: MseKernels,
    spec: SpectralData,
    delta_sampler: DeltaModel,
    epsilon: float,
    num_samples: int,
    seed: int,
    chunk_size: int = 100_000,
) -> float:
    """
    Monte-Carlo lower bound for i.i.d. transmit durations

    Samples N ~ Geometric(1 - epsilon) failed attempts between successes and
    N + 2 durations per cycle, then returns E[L(D_1, sum D)] / E[sum D_2..N+2].

    Args:
        kernels: MseKernels of the sensor
        spec: SpectralData of the sensor
        delta_sampler: Duration model with sample(rng, size)
        epsilon: Decoding error probability
        num_samples: Number of sampled cycles
        seed: RNG seed
        chunk_size: Cycles evaluated per vectorized batch

    Returns:
        Estimated lower bound
    """
    if num_samples < 1:
        raise ConfigError("num_samples must be at least 1")
    if not 0 <= epsilon < 1:
        raise ConfigError(f"epsilon must lie in [0, 1), got {epsilon}")
    rng = np.random.default_rng(seed)
    loss_total = 0.0
    span_total = 0.0
    remaining = num_samples
    while remaining > 0:
        size = min(chunk_size, remaining)
        failures = rng.geometric(1.0 - epsilon, size) - 1
        counts = failures + 2
        durations = delta_sampler.sample(rng, int(counts.sum()))
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        totals = np.add.reduceat(durations, starts)
        first = durations[starts]
        upper, _ = _cumulative(kernels, spec, totals)
        lower, _ = _cumulative(kernels, spec, first)
        with np.errstate(invalid="ignore"):
            loss_total += float(np.sum(np.where(np.isinf(upper), math.inf, upper - lower)))
        span_total += float(np.sum(totals - first))
        remaining -= size
    return loss_total / span_total


class LossEvaluator:
    """
    Memoized packet-integrated MSE for one sensor inside one simulation run

    Slot-aligned schedules revisit the same ages over and over, so F(tau) is
    cached and L(lo, hi) = F(hi) - F(lo). Not shared across threads.

    Args:
        system: LinearSystem of the sensor
        cache_size: Maximum number of cached ages
    """

    def __init__(self, system: LinearSystem, cache_size: int = 1 << 16):
        self.system = system
        self.spec, self.kernels = analyze_system(system)
        self._cached = functools.lru_cache(maxsize=cache_size)(self._evaluate)

    def _evaluate(self, tau):
        values, scales = _cumulative(self.kernels, self.spec, [tau])
        return float(values[0]), float(scales[0])

    def __call__(self, tau_lo: float, tau_hi: float) -> float:
        if tau_lo > tau_hi or tau_lo < 0:
            raise InvalidInterval(f"invalid AoI interval [{tau_lo}, {tau_hi})")
        if tau_lo == tau_hi:
            return 0.0
        upper, upper_scale = self._cached(tau_hi)
        lower, lower_scale = self._cached(tau_lo)
        return _difference(upper, lower, max(upper_scale, lower_scale))
