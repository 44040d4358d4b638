"""Tests for the Fisher-information bound, POVMs, optimality and remixing."""

import math

import numpy as np
import pytest

from canonical.frames import canonical_decompose, smooth_frame_curve
from canonical.quasi_classical import quasiclassical_optimal_povm
from channels.builtins import damping, dephasing, depolarizing, depolarizing_canonical, random_shift
from channels.family import extend_identity, unitary_family
from channels.states import QuantumState
from fisher import povm as presets
from fisher.bounds import classical_fisher, fisher_terms, kraus_bound, sld_fisher
from fisher.distance import grid_derivative, statistical_distance_eigencoords
from fisher.optimality import optimality_check
from fisher.povm import Povm, load_effects, random_rank_one
from fisher.remix import remix_penalty
from linalg.core import PAULI_Z
from utils.errors import DimensionError, DivergentFisherTermError, ValidationError


def depolarizing_star(p):
    return 6.0 / (p * (9.0 - 6.0 * p))


def dephasing_star(theta):
    return 4.0 / math.expm1(4.0 * theta)


def random_anti_hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (g - g.conj().T)


class TestPovm:
    def test_presets_complete(self):
        for povm in (presets.z_basis(), presets.x_basis(), presets.bell_basis(), presets.singlet_triplet()):
            np.testing.assert_allclose(povm.effects.sum(axis=0), np.eye(povm.dim), atol=1e-12)
        assert presets.photon_number(5).labels[3] == "n=3"
        assert presets.position(4).labels[0] == "x=0"

    def test_rejects_incomplete(self):
        with pytest.raises(ValidationError):
            Povm.from_effects([np.diag([1.0, 0.0])])

    def test_rejects_negative_effect(self):
        with pytest.raises(ValidationError):
            Povm.from_effects([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])])

    def test_random_rank_one(self, rng):
        povm = random_rank_one(3, 5, rng)
        assert povm.n_outcomes == 5
        np.testing.assert_allclose(povm.effects.sum(axis=0), np.eye(3), atol=1e-10)

    def test_load_effects(self, tmp_path):
        path = tmp_path / "z.npy"
        np.save(path, presets.z_basis().effects)
        assert load_effects(path).n_outcomes == 2
        np.save(tmp_path / "bad.npy", np.eye(2))
        with pytest.raises(DimensionError):
            load_effects(tmp_path / "bad.npy")


class TestKrausBound:
    def test_depolarizing_canonical_family(self):
        assert kraus_bound(depolarizing_canonical(), 0.5, QuantumState.basis(2, 0)) == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.8])
    def test_depolarizing_frame(self, p):
        frame = canonical_decompose(depolarizing(), p, QuantumState.basis(2, 0))
        assert kraus_bound(frame, p, frame.input_state) == pytest.approx(depolarizing_star(p), rel=1e-9)

    def test_raw_textbook_set_overestimates(self):
        p = 0.4
        psi = QuantumState.basis(2, 0)
        raw = kraus_bound(depolarizing(), p, psi)
        assert raw > depolarizing_star(p) + 1e-3

    def test_constant_channel(self):
        family = unitary_family(np.zeros((2, 2)), theta_domain=(-1.0, 1.0))
        assert kraus_bound(family, 0.3, QuantumState.plus()) == 0.0

    def test_damping_frame(self):
        theta = math.log(2.0)
        frame = canonical_decompose(damping(n_max=2), theta, QuantumState.basis(3, 1))
        assert kraus_bound(frame, theta, frame.input_state) == pytest.approx(1.0, abs=1e-9)

    def test_random_shift_frame(self):
        family = random_shift()
        frame = canonical_decompose(family, 1.0, QuantumState.basis(family.dim, 0))
        assert kraus_bound(frame, 1.0, frame.input_state) == pytest.approx(1.0, abs=1e-9)

    def test_frame_theta_mismatch(self):
        frame = canonical_decompose(dephasing(), 0.5, QuantumState.plus())
        with pytest.raises(ValidationError):
            kraus_bound(frame, 0.6, QuantumState.plus())

    def test_phase_rotation_witness(self):
        psi = QuantumState.basis(2, 0)
        plain = unitary_family(0.5 * PAULI_Z, theta_domain=(-3.0, 3.0))
        rephased = unitary_family(0.5 * PAULI_Z, phase_rate=0.5, theta_domain=(-3.0, 3.0))
        assert kraus_bound(plain, 0.7, psi) == pytest.approx(1.0, abs=1e-12)
        assert kraus_bound(rephased, 0.7, psi) == pytest.approx(0.0, abs=1e-12)

    def test_linear_in_input_state(self, rng):
        family = depolarizing()
        states = [QuantumState.normalized(rng.normal(size=2) + 1j * rng.normal(size=2)) for _ in range(3)]
        weights = np.array([0.2, 0.5, 0.3])
        mixed = QuantumState.mixture(weights, states)
        expected = sum(w * kraus_bound(family, 0.35, s) for w, s in zip(weights, states))
        assert kraus_bound(family, 0.35, mixed) == pytest.approx(expected, abs=1e-12)


class TestClassicalFisher:
    def test_depolarizing_z_basis(self):
        value = classical_fisher(presets.z_basis(), depolarizing(), 0.5, QuantumState.basis(2, 0))
        assert value == pytest.approx(2.0, abs=1e-12)

    def test_trivial_povm(self):
        assert classical_fisher(presets.trivial(2), depolarizing(), 0.5, QuantumState.basis(2, 0)) == 0.0

    def test_dephasing_x_basis(self):
        value = classical_fisher(presets.x_basis(), dephasing(), 0.5, QuantumState.plus())
        assert value == pytest.approx(dephasing_star(0.5), rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            classical_fisher(presets.bell_basis(), depolarizing(), 0.5, QuantumState.basis(2, 0))

    def test_divergent_term_names_outcome(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        drho = np.diag([-0.5, 0.5]).astype(complex)
        with pytest.raises(DivergentFisherTermError) as info:
            fisher_terms(presets.z_basis(), rho, drho)
        assert info.value.outcome == "1"
        assert info.value.exit_code == 4

    def test_structural_zero_contributes_nothing(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        terms = fisher_terms(presets.z_basis(), rho, np.zeros((2, 2), dtype=complex))
        np.testing.assert_array_equal(terms, [0.0, 0.0])

    def test_eigenprojectors_achieve_the_bound(self):
        cases = [
            (depolarizing(), 0.3, QuantumState.basis(2, 0)),
            (dephasing(), 0.8, QuantumState.plus()),
            (damping(n_max=3), 0.6, QuantumState.basis(4, 2)),
            (extend_identity(depolarizing()), 0.4, QuantumState.bell(0)),
        ]
        for family, theta, psi in cases:
            frame = canonical_decompose(family, theta, psi)
            povm = quasiclassical_optimal_povm(frame)
            achieved = classical_fisher(povm, family, theta, psi)
            assert achieved == pytest.approx(kraus_bound(frame, theta, psi), abs=1e-8)


class TestSldFisher:
    def test_depolarizing(self):
        assert sld_fisher(depolarizing(), 0.5, QuantumState.basis(2, 0)) == pytest.approx(2.0, abs=1e-10)

    def test_constant_channel(self):
        family = unitary_family(np.zeros((2, 2)), theta_domain=(-1.0, 1.0))
        assert sld_fisher(family, 0.2, QuantumState.plus()) == 0.0

    def test_damping(self):
        assert sld_fisher(damping(n_max=2), math.log(2.0), QuantumState.basis(3, 1)) == pytest.approx(1.0, abs=1e-10)

    def test_pure_state_rotation(self):
        # 4 * variance of the generator for a unitary family
        family = unitary_family(0.5 * PAULI_Z, theta_domain=(-3.0, 3.0))
        assert sld_fisher(family, 0.4, QuantumState.plus()) == pytest.approx(1.0, abs=1e-10)


class TestOptimality:
    def test_dephasing_x_basis(self):
        theta = 0.5
        frame = canonical_decompose(dephasing(), theta, QuantumState.plus())
        report = optimality_check(presets.x_basis(), frame, QuantumState.plus())
        assert report.satisfied
        assert report.lambdas[0] == pytest.approx(-1.0 / (math.exp(2 * theta) + 1.0), abs=1e-9)
        assert report.lambdas[1] == pytest.approx(1.0 / (math.exp(2 * theta) - 1.0), abs=1e-9)

    def test_damping_photon_number(self):
        theta, n = 0.7, 2
        psi = QuantumState.basis(4, n)
        frame = canonical_decompose(damping(n_max=3), theta, psi)
        report = optimality_check(presets.photon_number(4), frame, psi)
        assert report.satisfied
        for m in range(n + 1):
            expected = (n * math.exp(-theta) - m) / (2.0 * (1.0 - math.exp(-theta)))
            assert report.lambdas[m] == pytest.approx(expected, abs=1e-8)
        assert report.residuals[3] == 0.0

    def test_depolarizing_z_basis(self):
        p = 0.3
        psi = QuantumState.basis(2, 0)
        report = optimality_check(presets.z_basis(), canonical_decompose(depolarizing(), p, psi), psi)
        assert report.satisfied
        assert report.lambdas[0] == pytest.approx(-1.0 / (3.0 - 2.0 * p), abs=1e-8)
        assert report.lambdas[1] == pytest.approx(1.0 / (2.0 * p), abs=1e-8)

    def test_wrong_basis(self):
        psi = QuantumState.basis(2, 0)
        report = optimality_check(presets.x_basis(), canonical_decompose(depolarizing(), 0.3, psi), psi)
        assert not report.satisfied
        assert report.max_residual > 1e-2

    def test_bell_basis_for_entangled_depolarizing(self):
        p = 0.4
        psi = QuantumState.bell(0)
        report = optimality_check(presets.bell_basis(), canonical_decompose(extend_identity(depolarizing()), p, psi), psi)
        assert report.satisfied
        assert report.lambdas[0] == pytest.approx(-1.0 / (2.0 * (1.0 - p)), abs=1e-8)
        np.testing.assert_allclose(report.lambdas[1:], 1.0 / (2.0 * p), atol=1e-8)

    def test_random_shift_position(self):
        family = random_shift()
        theta = 1.5
        psi = QuantumState.basis(family.dim, 0)
        report = optimality_check(presets.position(family.dim), canonical_decompose(family, theta, psi), psi)
        assert report.satisfied
        for x in range(4):
            assert report.lambdas[x] == pytest.approx(x / (2.0 * theta) - 0.5, abs=1e-8)

    def test_requires_pure_input(self):
        frame = canonical_decompose(dephasing(), 0.5, QuantumState.plus())
        with pytest.raises(ValidationError):
            optimality_check(presets.x_basis(), frame, QuantumState.mixed(np.eye(2) / 2))


class TestDistance:
    def test_grid_derivative_of_polynomial(self):
        x = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(grid_derivative(x, x ** 3), 3 * x ** 2, atol=1e-10)
        np.testing.assert_allclose(grid_derivative(x[:4], 2.0 * x[:4] + 1j), np.full(4, 2.0), atol=1e-12)

    def test_dephasing_curve(self):
        grid = np.linspace(0.2, 1.5, 101)
        frames = smooth_frame_curve(dephasing(), grid, QuantumState.plus())
        curve = statistical_distance_eigencoords(frames)
        np.testing.assert_allclose(curve.eigencoord_values, dephasing_star(grid), rtol=1e-6)
        np.testing.assert_allclose(curve.bound_values, curve.eigencoord_values, rtol=1e-6)

    def test_too_few_points(self):
        frames = smooth_frame_curve(dephasing(), [0.2, 0.4], QuantumState.plus())
        with pytest.raises(ValidationError):
            statistical_distance_eigencoords(frames)


class TestRemix:
    def test_zero_generator(self):
        frame = canonical_decompose(dephasing(), 0.5, QuantumState.plus())
        result = remix_penalty(frame, np.zeros((2, 2)), 0.5, QuantumState.plus(), presets.x_basis())
        assert result.remixed == pytest.approx(kraus_bound(frame, 0.5, frame.input_state), abs=1e-14)
        assert result.predicted == pytest.approx(result.remixed, abs=1e-14)

    def test_real_rotation_generator(self):
        r = 0.3
        frame = canonical_decompose(dephasing(), 0.5, QuantumState.plus())
        result = remix_penalty(frame, np.array([[0.0, r], [-r, 0.0]]), 0.5, QuantumState.plus(), presets.x_basis())
        base = kraus_bound(frame, 0.5, frame.input_state)
        assert result.remixed - base == pytest.approx(4 * r * r, abs=1e-10)
        assert result.remixed == pytest.approx(result.predicted, abs=1e-8)

    def test_random_generators_never_help(self, rng):
        p = 0.3
        psi = QuantumState.basis(2, 0)
        frame = canonical_decompose(depolarizing(), p, psi)
        base = kraus_bound(frame, p, psi)
        for _ in range(20):
            result = remix_penalty(frame, random_anti_hermitian(rng, 4), p, psi, presets.z_basis())
            assert result.remixed >= base - 1e-10
            assert result.remixed == pytest.approx(result.predicted, abs=1e-8)

    def test_rejects_hermitian_generator(self):
        frame = canonical_decompose(dephasing(), 0.5, QuantumState.plus())
        with pytest.raises(ValidationError):
            remix_penalty(frame, np.eye(2), 0.5, QuantumState.plus(), presets.x_basis())

    def test_rejects_non_optimal_povm(self):
        frame = canonical_decompose(dephasing(), 0.5, QuantumState.plus())
        with pytest.raises(ValidationError):
            remix_penalty(frame, np.zeros((2, 2)), 0.5, QuantumState.plus(), presets.z_basis())
