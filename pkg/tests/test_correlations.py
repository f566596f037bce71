import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colldeph.correlations import (
    Verdict,
    classify_discord_by_rank,
    concurrence_bell_diagonal,
    concurrence_wootters,
    diagnostics,
    max_commutator,
    negativity,
    operator_schmidt,
    psd_sqrt,
    schmidt_rank,
    zero_discord_commutator_test,
)
from colldeph.fano import correlation_rank
from colldeph.qcore import pauli_dot, projector, random_density, random_pure_state, random_qubit_state, random_unitary
from colldeph.tetrahedron import bell_probabilities, state_from_coords

from conftest import random_unit

SINGLET = projector(np.array([0, 1, -1, 0]) / np.sqrt(2))


def test_concurrence_of_pure_states(rng):
    for _ in range(20):
        psi = random_pure_state(2, rng)
        a, b, c, d = psi
        assert concurrence_wootters(projector(psi)) == pytest.approx(2 * abs(a * d - b * c), abs=1e-10)


def test_concurrence_of_werner_states():
    for p in (0.0, 0.2, 1 / 3, 0.5, 1.0):
        w = p * SINGLET + (1 - p) * np.eye(4) / 4
        assert concurrence_wootters(w) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-12)


def test_bell_diagonal_formula_agrees(rng):
    for _ in range(50):
        d = rng.uniform(-1, 1, 3)
        p = bell_probabilities(d)
        if np.any(p < 0):
            continue
        assert concurrence_bell_diagonal(p) == pytest.approx(concurrence_wootters(state_from_coords(d)), abs=1e-10)


def test_bell_diagonal_formula_validates():
    with pytest.raises(ValueError):
        concurrence_bell_diagonal([0.5, 0.5, 0.5, -0.5])
    with pytest.raises(ValueError):
        concurrence_bell_diagonal([0.5, 0.5])


def test_psd_sqrt(rng):
    rho = random_density(2, rng)
    r = psd_sqrt(rho)
    np.testing.assert_allclose(r @ r, rho, atol=1e-13)


def test_schmidt_rank():
    assert schmidt_rank(np.array([1, 0, 0, 0])) == 1
    assert schmidt_rank(np.array([0, 1, -1, 0]) / np.sqrt(2)) == 2
    with pytest.raises(ValueError):
        schmidt_rank(np.array([1, 1, 0, 0]))


def test_negativity_values():
    assert negativity(SINGLET, [0]) == pytest.approx(0.5)
    for p in (0.2, 0.6):
        w = p * SINGLET + (1 - p) * np.eye(4) / 4
        assert negativity(w, [1]) == pytest.approx(max(0.0, (3 * p - 1) / 4), abs=1e-14)
    with pytest.raises(ValueError):
        negativity(SINGLET, [0, 1])


def test_negativity_three_qubits(rng):
    rho = np.kron(SINGLET, random_qubit_state(rng))
    assert negativity(rho, [2]) < 1e-12
    assert negativity(rho, [0]) == pytest.approx(0.5)


def test_operator_schmidt_reconstructs(rng):
    rho = random_density(2, rng)
    c, s_ops, f_ops = operator_schmidt(rho)
    rebuilt = sum(ck * np.kron(sk, fk) for ck, sk, fk in zip(c, s_ops, f_ops))
    np.testing.assert_allclose(rebuilt, rho, atol=1e-14)
    np.testing.assert_allclose(np.count_nonzero(c > 1e-8), correlation_rank(rho))
    for op in (*s_ops, *f_ops):
        np.testing.assert_allclose(op, op.conj().T, atol=1e-15)


def classical_quantum(rng, k=2):
    u = random_unitary(2, rng)
    probs = rng.dirichlet(np.ones(k))
    rho = np.zeros((4, 4), dtype=complex)
    for i in range(k):
        e = u[:, i % 2]
        rho += probs[i] * np.kron(projector(e), random_qubit_state(rng))
    return rho


def test_commutator_test_on_classical_quantum_states(rng):
    for _ in range(20):
        rho = classical_quantum(rng)
        assert zero_discord_commutator_test(rho, "A")
        assert correlation_rank(rho) <= 2


def test_commutator_test_flags_entangled_and_discordant(rng):
    assert not zero_discord_commutator_test(SINGLET)
    # |0><0| (x) |0><0| + |+><+| (x) |1><1| has discord on A
    plus = projector(np.array([1, 1]) / np.sqrt(2))
    rho = 0.5 * (np.kron(np.diag([1, 0]), np.diag([1, 0])) + np.kron(plus, np.diag([0, 1])))
    assert not zero_discord_commutator_test(rho, "A")
    assert zero_discord_commutator_test(rho, "B")
    assert max_commutator(rho, "A") > 0.1


def test_classification_thresholds(rng):
    assert classify_discord_by_rank(SINGLET).verdict is Verdict.STRONGLY_CORRELATED
    assert classify_discord_by_rank(classical_quantum(rng)).verdict is Verdict.COMPATIBLE_WITH_ZERO_DISCORD


def test_diagnostics_keys():
    rep = diagnostics(SINGLET)
    assert set(rep) == {"concurrence", "rank", "verdict", "maxCommutator"}
    assert rep["rank"] == 4
    assert rep["concurrence"] == pytest.approx(1.0)


def test_two_qubit_required(rng):
    with pytest.raises(ValueError):
        concurrence_wootters(random_density(3, rng))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_concurrence_bounds_and_local_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(2, rng)
    c = concurrence_wootters(rho)
    assert 0 <= c <= 1 + 1e-12
    u = np.kron(random_unitary(2, rng), random_unitary(2, rng))
    assert concurrence_wootters(u @ rho @ u.conj().T) == pytest.approx(c, abs=1e-9)
    # PPT criterion is exact for two qubits
    assert (c > 1e-8) == (negativity(rho, [0]) > 1e-9) or min(c, negativity(rho, [0])) < 1e-7


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_product_states_have_zero_entanglement(seed):
    rng = np.random.default_rng(seed)
    n = random_unit(rng)
    rho = np.kron(random_qubit_state(rng), 0.5 * (np.eye(2) + 0.5 * pauli_dot(n)))
    assert concurrence_wootters(rho) < 1e-7
    assert negativity(rho, [1]) < 1e-12
    assert zero_discord_commutator_test(rho)
