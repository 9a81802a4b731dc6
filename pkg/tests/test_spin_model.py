"""Dense backend tests: Hamiltonian, cluster state, Gibbs, Trotter, sampling."""

import math

import numpy as np
import pytest
import scipy.linalg

from sptgame import spin_model as sm
from sptgame.pauli import (
    GX,
    GY,
    GZ,
    NONTRIVIAL,
    ORDERED_PAIRS,
    cluster_stabilizer,
    from_sites,
    identity,
    string_order,
    symmetry_rep,
    twist_phase,
    twisted_string_order,
)
from sptgame.spin_model import (
    GuardError,
    ModelParams,
    apply_pauli,
    dense_hamiltonian,
    expectation,
    gibbs_density,
    graph_basis_diagonal,
    ground_state,
    hamiltonian_terms,
    imaginary_time_evolve,
    maximally_mixed,
    prepare_cluster_state,
    sample_pauli_outcomes,
)


def dephased_cluster(n: int, eps: float) -> np.ndarray:
    """Independent Z dephasing with probability eps on each cluster qubit."""
    psi = prepare_cluster_state(n)
    rho = np.zeros((1 << n, 1 << n), dtype=complex)
    for flips in range(1 << n):
        weight = eps ** flips.bit_count() * (1 - eps) ** (n - flips.bit_count())
        phi = psi.copy()
        for j in range(1, n + 1):
            if (flips >> (j - 1)) & 1:
                phi = apply_pauli(from_sites(n, {j: "Z"}), phi)
        rho += weight * np.outer(phi, phi.conj())
    return rho


class TestHamiltonian:
    def test_stabilizer_ground_energy(self):
        params = ModelParams(4, 0.0, 0.0, delta=2.0)
        energies = np.linalg.eigvalsh(dense_hamiltonian(params))
        assert abs(energies[0] + 4.0) < 1e-12

    def test_term_count_3n(self):
        assert len(hamiltonian_terms(ModelParams(8, 0.3, 0.7))) == 24

    def test_commutes_with_symmetries(self):
        for params in [ModelParams(6, 0.7, 0.0), ModelParams(6, 0.4, 1.1),
                       ModelParams(8, 0.0, 0.9)]:
            h = dense_hamiltonian(params)
            for g in NONTRIVIAL:
                u = symmetry_rep(g, params.n).to_matrix()
                assert np.linalg.norm(h @ u - u @ h) < 1e-12

    def test_odd_size_rejected(self):
        with pytest.raises(ValueError):
            ModelParams(5)

    def test_matches_term_sum(self):
        params = ModelParams(4, 0.5, 0.25)
        ref = sum(c * op.to_matrix() for c, op in hamiltonian_terms(params) if c)
        np.testing.assert_allclose(dense_hamiltonian(params), ref.real, atol=1e-12)


class TestClusterState:
    def test_stabilizer_eigenstate(self):
        n = 8
        psi = prepare_cluster_state(n)
        for j in range(1, n + 1):
            assert abs(expectation(psi, cluster_stabilizer(j, n)) - 1.0) < 1e-12

    def test_z_expectation_vanishes(self):
        n = 8
        psi = prepare_cluster_state(n)
        for j in range(1, n + 1):
            assert abs(expectation(psi, from_sites(n, {j: "Z"}))) < 1e-12

    def test_unique_ground_state_of_cluster_hamiltonian(self):
        n = 8
        params = ModelParams(n, 0.0, 0.0, delta=2.0)
        res = ground_state(params)
        assert not res.degenerate
        assert abs(res.energy + params.delta * n / 2) < 1e-10
        overlap = abs(np.vdot(res.state, prepare_cluster_state(n)))
        assert overlap > 1 - 1e-10

    def test_string_order_unity(self):
        n = 8
        psi = prepare_cluster_state(n)
        for g in NONTRIVIAL:
            for p, q in [(1, 2), (1, 3), (2, 4)]:
                assert abs(expectation(psi, string_order(g, p, q, n)) - 1.0) < 1e-12

    def test_twisted_string_order_gives_twist_phase(self):
        n = 8
        psi = prepare_cluster_state(n)
        for g, h in ORDERED_PAIRS:
            val = expectation(psi, twisted_string_order(g, h, 1, 3, n))
            assert abs(val - twist_phase(g, h)) < 1e-12


class TestExpectation:
    def test_maximally_mixed_vanishes(self):
        n = 4
        rho = maximally_mixed(n)
        assert abs(expectation(rho, from_sites(n, {1: "X", 3: "Z"}))) < 1e-14
        assert abs(expectation(rho, identity(n)) - 1.0) < 1e-14

    def test_rejects_non_hermitian(self):
        n = 2
        xz = from_sites(n, {1: "X"}) * from_sites(n, {1: "Z"})
        with pytest.raises(ValueError):
            expectation(prepare_cluster_state(n), xz)

    def test_density_and_vector_agree(self):
        n = 4
        psi = prepare_cluster_state(n)
        rho = np.outer(psi, psi.conj())
        for op in [from_sites(n, {1: "X", 2: "Z"}), symmetry_rep(GZ, n),
                   -from_sites(n, {2: "Y", 3: "Y"})]:
            assert abs(expectation(psi, op) - expectation(rho, op)) < 1e-12


class TestGibbs:
    def test_high_temperature_limit(self):
        n = 4
        rho = gibbs_density(ModelParams(n, 0.0, 0.0), temperature=1e6)
        assert np.linalg.norm(rho - maximally_mixed(n)) < 1e-4

    def test_cluster_symmetry_expectation_tanh(self):
        n = 8
        temperature = 2.0
        rho = gibbs_density(ModelParams(n, 0.0, 0.0, delta=2.0), temperature)
        expected = math.tanh(1.0 / temperature) ** n
        assert abs(expectation(rho, symmetry_rep(GZ, n)) - expected) < 1e-10

    def test_weak_symmetry(self):
        rho = gibbs_density(ModelParams(6, 0.5, 0.3), temperature=0.7)
        for g in NONTRIVIAL:
            u = symmetry_rep(g, 6).to_matrix().real
            assert np.linalg.norm(rho @ u - u @ rho) < 1e-9

    def test_dephased_cluster_equivalence(self):
        # thermal cluster state == independently Z-dephased cluster state,
        # with eps = (1 + e^{beta * delta})^{-1}; Z_j flips exactly K_j
        n = 6
        delta = 2.0
        temperature = 0.8
        beta = 1.0 / temperature
        rho_thermal = gibbs_density(ModelParams(n, 0.0, 0.0, delta=delta), temperature)
        eps = 1.0 / (1.0 + math.exp(beta * delta))
        rho_dephased = dephased_cluster(n, eps)
        gap = scipy.linalg.eigvalsh(rho_thermal - rho_dephased)
        trace_distance = 0.5 * np.abs(gap).sum()
        assert trace_distance < 1e-10

    def test_guards(self):
        with pytest.raises(GuardError):
            gibbs_density(ModelParams(14), 1.0)
        with pytest.raises(ValueError):
            gibbs_density(ModelParams(4), -1.0)


class TestGroundState:
    def test_trivial_phase_kills_string_order(self):
        n = 8
        res = ground_state(ModelParams(n, 10.0, 0.0))
        assert not res.degenerate
        for g in NONTRIVIAL:
            assert abs(expectation(res.state, string_order(g, 1, 3, n))) < 0.05

    def test_symmetry_broken_phase_degenerate(self):
        res = ground_state(ModelParams(8, 0.0, 10.0))
        assert res.degenerate

    def test_sparse_path_matches_dense(self):
        params = ModelParams(12, 0.5, 0.2)
        res = ground_state(params)
        # dense reference on the same Hamiltonian
        energies = np.linalg.eigvalsh(dense_hamiltonian(params))
        assert abs(res.energy - energies[0]) < 1e-8


class TestImaginaryTime:
    def test_zero_time_identity(self):
        psi = prepare_cluster_state(4)
        out, logw = imaginary_time_evolve(psi, ModelParams(4), 0.0)
        np.testing.assert_allclose(out, psi)
        assert logw == 0.0

    def test_long_time_projects_to_ground_state(self):
        n = 8
        params = ModelParams(n, 0.0, 0.0)
        rng = np.random.default_rng(0)
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi /= np.linalg.norm(psi)
        out, _ = imaginary_time_evolve(psi, params, 50.0)
        overlap = abs(np.vdot(out, prepare_cluster_state(n)))
        assert overlap > 1 - 1e-8

    def test_against_exact_exponential(self):
        n = 8
        params = ModelParams(n, 0.5, 0.0)
        tau = 1.25  # beta/2 at T = 0.4
        rng = np.random.default_rng(1)
        bits = rng.integers(0, 2, size=n)
        psi = np.zeros(1 << n, dtype=complex)
        psi[int(sum(b << i for i, b in enumerate(bits)))] = 1.0
        out, logw = imaginary_time_evolve(psi, params, tau)
        exact = scipy.linalg.expm(-tau * dense_hamiltonian(params)) @ psi
        norm = np.linalg.norm(exact)
        fidelity = abs(np.vdot(out, exact / norm)) ** 2
        assert fidelity > 1 - 1e-6
        ref = 2 * math.log(norm)
        assert abs(logw - ref) < 1e-3 * abs(ref)  # Trotter-limited weight accuracy

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            imaginary_time_evolve(prepare_cluster_state(4), ModelParams(4), -0.1)


class TestSampling:
    def test_cluster_context_parity(self):
        # measurement triple for input 0 multiplies to the identity:
        # outcome product is always +1 on any state
        n = 6
        psi = prepare_cluster_state(n)
        rng = np.random.default_rng(42)
        context = [
            from_sites(n, {1: "X"}),
            from_sites(n, {2: "X"}),
            from_sites(n, {1: "X", 2: "X"}),
        ]
        for _ in range(200):
            outcomes, _ = sample_pauli_outcomes(psi, context, rng)
            assert outcomes[0] * outcomes[1] * outcomes[2] == 1

    def test_deterministic_eigenstate(self):
        n = 4
        psi = prepare_cluster_state(n)
        rng = np.random.default_rng(0)
        for _ in range(20):
            outcomes, post = sample_pauli_outcomes(psi, [cluster_stabilizer(2, n)], rng)
            assert outcomes == [1]
            assert abs(abs(np.vdot(post, psi)) - 1.0) < 1e-12

    def test_marginal_matches_expectation(self):
        n = 4
        params = ModelParams(n, 0.8, 0.0)
        res = ground_state(params)
        op = from_sites(n, {1: "X"})
        exact = expectation(res.state, op)
        rng = np.random.default_rng(7)
        shots = 100_000
        total = 0
        for _ in range(shots):
            outcomes, _ = sample_pauli_outcomes(res.state, [op], rng)
            total += outcomes[0]
        sigma = math.sqrt((1 - exact**2) / shots) + 1e-12
        assert abs(total / shots - exact) < 3 * sigma

    def test_joint_frequencies_match_projector_probabilities(self):
        n = 4
        res = ground_state(ModelParams(n, 0.6, 0.3))
        ops = [from_sites(n, {1: "X"}), from_sites(n, {2: "X"})]
        mats = [op.to_matrix() for op in ops]
        dim = 1 << n
        rng = np.random.default_rng(3)
        shots = 100_000
        counts = {}
        for _ in range(shots):
            outcomes, _ = sample_pauli_outcomes(res.state, ops, rng)
            key = tuple(outcomes)
            counts[key] = counts.get(key, 0) + 1
        for s1 in (1, -1):
            for s2 in (1, -1):
                proj = ((np.eye(dim) + s1 * mats[0]) / 2) @ ((np.eye(dim) + s2 * mats[1]) / 2)
                p = np.real(np.vdot(res.state, proj @ res.state))
                freq = counts.get((s1, s2), 0) / shots
                sigma = math.sqrt(max(p * (1 - p), 1e-12) / shots)
                assert abs(freq - p) < 4 * sigma

    def test_order_independence(self):
        n = 4
        psi = prepare_cluster_state(n)
        ops = [cluster_stabilizer(1, n), from_sites(n, {1: "X", 2: "X", 3: "X", 4: "X"})]
        rng1 = np.random.default_rng(5)
        rng2 = np.random.default_rng(5)
        # identical streams, reversed contexts: joint laws agree, so the
        # outcome multiset statistics must match over many rounds
        tally1 = np.zeros(2)
        tally2 = np.zeros(2)
        for _ in range(2000):
            o1, _ = sample_pauli_outcomes(psi, ops, rng1)
            o2, _ = sample_pauli_outcomes(psi, ops[::-1], rng2)
            tally1 += o1
            tally2 += o2[::-1]
        np.testing.assert_allclose(tally1 / 2000, tally2 / 2000, atol=0.1)

    def test_noncommuting_rejected(self):
        n = 2
        with pytest.raises(ValueError):
            sample_pauli_outcomes(
                prepare_cluster_state(n),
                [from_sites(n, {1: "X"}), from_sites(n, {1: "Z"})],
                np.random.default_rng(0),
            )


class TestGraphDiagonal:
    def test_pure_cluster_is_delta(self):
        c = graph_basis_diagonal(prepare_cluster_state(6))
        assert abs(c[0] - 1.0) < 1e-12
        assert np.abs(c[1:]).max() < 1e-12

    def test_maximally_mixed_uniform(self):
        n = 6
        c = graph_basis_diagonal(maximally_mixed(n))
        np.testing.assert_allclose(c, np.full(1 << n, 2.0**-n), atol=1e-12)

    def test_thermal_cluster_binomial_weights(self):
        n = 6
        delta = 2.0
        temperature = 0.9
        beta = 1.0 / temperature
        rho = gibbs_density(ModelParams(n, 0.0, 0.0, delta=delta), temperature)
        c = graph_basis_diagonal(rho)
        eps = 1.0 / (1.0 + math.exp(beta * delta))
        r = np.arange(1 << n)
        weights = np.bitwise_count(r)
        expected = eps**weights * (1 - eps) ** (n - weights)
        np.testing.assert_allclose(c, expected, atol=1e-10)

    def test_eigenvalue_signs(self):
        # K_j on |G_r> has eigenvalue (-1)^{r_j}: flip one stabilizer of the
        # cluster state with a single Z and watch the diagonal move
        n = 4
        psi = apply_pauli(from_sites(n, {3: "Z"}), prepare_cluster_state(n))
        c = graph_basis_diagonal(psi)
        assert abs(c[1 << 2] - 1.0) < 1e-12
