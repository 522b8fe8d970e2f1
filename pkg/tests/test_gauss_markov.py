import math

import numpy as np
import pytest

from src.delta_models import ConstantDelta, UniformDelta
from src.exceptions import (
    ConfigError, DegenerateGeometricSum, InvalidInterval, NonDiagonalizable, Resonance,
)
from src.gauss_markov import (
    LinearSystem, LossEvaluator, analyze_system, compute_kernels, instantaneous_mse,
    lower_bound_data, mse_lower_bound_constant, mse_lower_bound_general, mse_upper_bound,
    packet_integrated_mse, spectral_decompose,
)


def _relative(residual, scale):
    return float(np.max(np.abs(residual))) / max(1.0, scale)


class TestLinearSystem:
    def test_rejects_asymmetric_diffusion(self):
        with pytest.raises(ConfigError):
            LinearSystem([[-1.0, 0.0], [0.0, -1.0]], [[1.0, 0.5], [0.0, 1.0]])

    def test_rejects_indefinite_diffusion(self):
        with pytest.raises(ConfigError):
            LinearSystem([[-1.0, 0.0], [0.0, -1.0]], [[1.0, 0.0], [0.0, -1.0]])

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ConfigError):
            LinearSystem([[-1.0, 0.0], [0.0, -1.0]], [[1.0]])

    def test_matrices_are_read_only(self, scalar_system):
        with pytest.raises(ValueError):
            scalar_system.drift[0, 0] = 1.0

    def test_negated_keeps_noise(self, stable_systems):
        mirrored = stable_systems[1].negated()
        np.testing.assert_array_equal(mirrored.drift, -stable_systems[1].drift)
        np.testing.assert_array_equal(mirrored.diffusion, stable_systems[1].diffusion)


class TestSpectralDecompose:
    def test_diagonal_drift(self, stable_systems):
        spec = spectral_decompose(stable_systems[1])
        np.testing.assert_allclose(spec.eigvals, [-0.02, -0.03])
        np.testing.assert_allclose(np.abs(spec.eigvecs), np.eye(2))

    def test_jordan_block_is_rejected(self):
        with pytest.raises(NonDiagonalizable):
            spectral_decompose(LinearSystem([[0.0, 1.0], [0.0, 0.0]], np.eye(2)))

    def test_resonant_pair_is_rejected(self):
        with pytest.raises(Resonance):
            spectral_decompose(LinearSystem([[1.0, 0.0], [0.0, -1.0]], np.eye(2)))

    def test_eigenvalue_order_is_descending(self, random_systems):
        for system in random_systems:
            eigvals = spectral_decompose(system).eigvals
            keys = [(-v.real, -v.imag) for v in eigvals]
            assert keys == sorted(keys)

    def test_reconstruction(self, random_systems):
        for system in random_systems:
            spec = spectral_decompose(system)
            rebuilt = spec.eigvecs @ np.diag(spec.eigvals) @ spec.inv_eigvecs
            assert np.max(np.abs(rebuilt - system.drift)) <= 1e-8 * np.linalg.norm(system.drift)


class TestKernels:
    def test_scalar_kernels(self, scalar_system):
        _, kernels = analyze_system(scalar_system)
        assert kernels.upsilon[0, 0].real == pytest.approx(-1.0)
        assert kernels.phi[0, 0].real == pytest.approx(1.0)
        assert kernels.b[0, 0].real == pytest.approx(-1.0)

    def test_lyapunov_identities_on_random_systems(self, random_systems):
        for system in random_systems:
            spec, kernels = analyze_system(system)
            a = system.drift
            upsilon, phi = kernels.upsilon, kernels.phi
            scale_u = np.linalg.norm(a) * np.linalg.norm(upsilon) + np.linalg.norm(system.diffusion)
            scale_p = np.linalg.norm(a) * np.linalg.norm(phi) + np.linalg.norm(upsilon)
            assert _relative(a @ upsilon + upsilon @ a.T - system.diffusion, scale_u) < 1e-8
            assert _relative(a @ phi + phi @ a.T - upsilon, scale_p) < 1e-8

    def test_kernels_are_hermitian(self, random_systems):
        for system in random_systems:
            _, kernels = analyze_system(system)
            assert np.max(np.abs(kernels.upsilon - kernels.upsilon.conj().T)) <= 1e-10 * max(1.0, np.linalg.norm(kernels.upsilon))
            assert np.max(np.abs(kernels.phi - kernels.phi.conj().T)) <= 1e-10 * max(1.0, np.linalg.norm(kernels.phi))

    def test_compute_kernels_matches_analyze(self, stable_systems):
        spec = spectral_decompose(stable_systems[0])
        kernels = compute_kernels(spec, stable_systems[0])
        np.testing.assert_allclose(kernels.upsilon, analyze_system(stable_systems[0])[1].upsilon)


class TestPacketIntegratedMse:
    def test_scalar_closed_form(self, scalar_system):
        spec, kernels = analyze_system(scalar_system)
        assert packet_integrated_mse(kernels, spec, 0.0, 1.0) == pytest.approx(math.exp(-1), rel=1e-12)

    def test_empty_interval_is_zero(self, stable_systems):
        spec, kernels = analyze_system(stable_systems[0])
        assert packet_integrated_mse(kernels, spec, 3.5, 3.5) == 0.0

    def test_invalid_interval(self, scalar_system):
        spec, kernels = analyze_system(scalar_system)
        with pytest.raises(InvalidInterval):
            packet_integrated_mse(kernels, spec, 2.0, 1.0)
        with pytest.raises(InvalidInterval):
            packet_integrated_mse(kernels, spec, -1.0, 1.0)

    def test_additivity(self, random_systems):
        rng = np.random.default_rng(3)
        for system in random_systems[:30]:
            spec, kernels = analyze_system(system)
            a, b, c = np.sort(rng.uniform(0, 10, 3))
            whole = packet_integrated_mse(kernels, spec, a, c)
            parts = packet_integrated_mse(kernels, spec, a, b) + packet_integrated_mse(kernels, spec, b, c)
            assert whole == pytest.approx(parts, rel=1e-9)

    def test_non_negative(self, random_systems):
        for system in random_systems[:30]:
            spec, kernels = analyze_system(system)
            assert packet_integrated_mse(kernels, spec, 0.0, 0.1) >= 0.0

    def test_unstable_overflow_is_infinite(self):
        system = LinearSystem([[5.0]], [[1.0]])
        spec, kernels = analyze_system(system)
        assert packet_integrated_mse(kernels, spec, 0.0, 500.0) == math.inf


class TestInstantaneousMse:
    def test_scalar_value(self, scalar_system):
        spec, kernels = analyze_system(scalar_system)
        assert instantaneous_mse(kernels, spec, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-12)

    def test_zero_age(self, stable_systems):
        spec, kernels = analyze_system(stable_systems[0])
        assert instantaneous_mse(kernels, spec, 0.0) == 0.0

    def test_is_derivative_of_packet_integrated_mse(self, stable_systems):
        spec, kernels = analyze_system(stable_systems[0])
        h = 1e-4
        slope = (packet_integrated_mse(kernels, spec, 0.0, 2.0 + h) - packet_integrated_mse(kernels, spec, 0.0, 2.0 - h)) / (2 * h)
        assert instantaneous_mse(kernels, spec, 2.0) == pytest.approx(slope, rel=1e-6)

    def test_nondecreasing_in_age(self, stable_systems, unstable_systems, random_systems):
        ages = np.linspace(0.0, 5.0, 51)
        for system in list(stable_systems) + list(unstable_systems) + random_systems:
            spec, kernels = analyze_system(system)
            values = np.array([instantaneous_mse(kernels, spec, tau) for tau in ages])
            slack = 1e-9 * max(1.0, abs(kernels.trace_upsilon), float(values[-1]))
            assert np.all(np.diff(values) >= -slack)
            assert values[-1] > values[1]


class TestUpperBound:
    def test_second_study_system(self, stable_systems):
        spec, kernels = analyze_system(stable_systems[1])
        assert mse_upper_bound(kernels, spec) == pytest.approx(27.5, abs=1e-8)

    def test_scalar(self, scalar_system):
        spec, kernels = analyze_system(scalar_system)
        assert mse_upper_bound(kernels, spec) == pytest.approx(1.0)

    def test_unstable_is_infinite(self, unstable_systems):
        for system in unstable_systems:
            spec, kernels = analyze_system(system)
            assert mse_upper_bound(kernels, spec) == math.inf


class TestLowerBound:
    def test_scalar_value(self, scalar_system):
        spec, kernels = analyze_system(scalar_system)
        assert mse_lower_bound_constant(kernels, spec, 1.0, 0.05) == pytest.approx(0.774943, abs=1e-5)

    def test_zero_epsilon_is_one_packet_interval(self, stable_systems, unstable_systems):
        for system in stable_systems + unstable_systems:
            spec, kernels = analyze_system(system)
            expected = packet_integrated_mse(kernels, spec, 1.0, 2.0)
            assert mse_lower_bound_constant(kernels, spec, 1.0, 0.0) == pytest.approx(expected, rel=1e-12)

    def test_zero_epsilon_bound_data(self, stable_systems):
        spec, kernels = analyze_system(stable_systems[0])
        bound = lower_bound_data(kernels, spec, 1.0, 0.0)
        np.testing.assert_allclose(bound.c, np.ones((3, 3)))
        np.testing.assert_array_equal(bound.psi, kernels.phi)

    def test_below_upper_bound(self, stable_systems):
        for system in stable_systems:
            spec, kernels = analyze_system(system)
            assert mse_lower_bound_constant(kernels, spec, 1.0, 0.05) < mse_upper_bound(kernels, spec)

    def test_increases_with_epsilon(self, stable_systems):
        spec, kernels = analyze_system(stable_systems[1])
        values = [mse_lower_bound_constant(kernels, spec, 1.0, eps) for eps in (0.0, 0.05, 0.2, 0.5)]
        assert values == sorted(values)

    def test_degenerate_geometric_sum(self):
        spec, kernels = analyze_system(LinearSystem([[2.0]], [[1.0]]))
        with pytest.raises(DegenerateGeometricSum):
            mse_lower_bound_constant(kernels, spec, 1.0, 0.05)

    def test_general_matches_constant(self, scalar_system):
        spec, kernels = analyze_system(scalar_system)
        estimate = mse_lower_bound_general(kernels, spec, ConstantDelta(1.0), 0.05, 200_000, seed=1)
        assert estimate == pytest.approx(mse_lower_bound_constant(kernels, spec, 1.0, 0.05), rel=0.02)

    def test_general_is_deterministic(self, stable_systems):
        spec, kernels = analyze_system(stable_systems[1])
        model = UniformDelta(0.5, 1.5)
        first = mse_lower_bound_general(kernels, spec, model, 0.05, 10_000, seed=4)
        second = mse_lower_bound_general(kernels, spec, model, 0.05, 10_000, seed=4)
        assert first == second


class TestLossEvaluator:
    def test_matches_closed_form(self, stable_systems):
        evaluator = LossEvaluator(stable_systems[0])
        expected = packet_integrated_mse(evaluator.kernels, evaluator.spec, 1.0, 7.0)
        assert evaluator(1.0, 7.0) == pytest.approx(expected, rel=1e-13)
        assert evaluator(1.0, 7.0) == evaluator(1.0, 7.0)

    def test_rejects_inverted_interval(self, scalar_system):
        with pytest.raises(InvalidInterval):
            LossEvaluator(scalar_system)(2.0, 1.0)
