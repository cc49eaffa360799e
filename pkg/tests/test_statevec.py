import math

import numpy as np
import pytest

from engine import statevec as sv
from exceptions import (
    NonUnitaryError,
    NormalizationError,
    QubitIndexError,
    QubitLimitError,
    ZeroProbabilityError,
)

SQ = 1 / math.sqrt(2)


def amps(state):
    return state.amplitudes


# === КОНСТРУКТОРЫ ===

def test_init_plus_uniform():
    assert np.allclose(amps(sv.init_plus(1)), [SQ, SQ])
    assert np.allclose(amps(sv.init_plus(2)), [0.5] * 4)


def test_init_plus_size_limit():
    with pytest.raises(QubitLimitError):
        sv.init_plus(sv.PURE_QUBIT_LIMIT + 1)
    with pytest.raises(ValueError):
        sv.init_plus(0)


def test_basis_state_left_label_is_high_bit():
    s = sv.basis_state("01")
    assert s.probability_of(1) == 1.0
    s = sv.basis_state("10")
    assert s.probability_of(2) == 1.0


def test_kron_first_argument_is_high():
    s = sv.kron_states(sv.basis_state("1"), sv.basis_state("0"))
    assert s.probability_of(0b10) == 1.0


def test_unnormalized_state_rejected():
    with pytest.raises(NormalizationError):
        sv.PureState(num_qubits=1, amplitudes=np.array([1.0, 1.0], dtype=complex))
    with pytest.raises(NormalizationError):
        sv.PureState.from_amplitudes([0.0, 0.0], normalize=True)


def test_constructors_raise_typed_errors():
    with pytest.raises(QubitLimitError):
        sv.PureState(num_qubits=sv.PURE_QUBIT_LIMIT + 1, amplitudes=np.ones(2, dtype=complex))
    with pytest.raises(QubitLimitError):
        sv.DensityState(num_qubits=sv.DENSITY_QUBIT_LIMIT + 1, matrix=np.eye(2, dtype=complex))
    with pytest.raises(NormalizationError):
        sv.DensityState(num_qubits=1, matrix=np.eye(2, dtype=complex))
    with pytest.raises(NormalizationError):
        sv.DensityState(num_qubits=1, matrix=np.array([[0.5, 1.0], [0.0, 0.5]], dtype=complex))


# === ОПЕРАЦИИ ===

def test_cz_on_plus_pair_gives_graph_state():
    s = sv.apply_cz(sv.init_plus(2), 0, 1)
    assert np.allclose(amps(s), [0.5, 0.5, 0.5, -0.5])


def test_cz_on_psi_plus():
    alpha, beta = 0.6, 0.8j
    psi = sv.single_qubit(alpha, beta)
    s = sv.apply_cz(sv.kron_states(psi, sv.init_plus(1)), 0, 1)
    assert np.allclose(amps(s), np.array([alpha, alpha, beta, -beta]) * SQ)


def test_cz_is_involution(rng):
    s = sv.PureState.from_amplitudes(rng.normal(size=8) + 1j * rng.normal(size=8), normalize=True)
    twice = sv.apply_cz(sv.apply_cz(s, 0, 2), 0, 2)
    assert np.allclose(amps(twice), amps(s), atol=1e-12)


def test_apply_1q_examples():
    assert np.allclose(amps(sv.apply_1q(sv.basis_state("0"), 0, sv.H)), [SQ, SQ])
    s = sv.PureState.from_amplitudes([1, 1, 0, 0], normalize=True)
    flipped = sv.apply_1q(s, 0, sv.Z)
    assert np.allclose(amps(flipped), [SQ, -SQ, 0, 0])
    same = sv.apply_1q(s, 1, sv.I2)
    assert np.allclose(amps(same), amps(s))


def test_apply_1q_rejects_bad_input():
    with pytest.raises(NonUnitaryError):
        sv.apply_1q(sv.init_plus(1), 0, np.array([[1, 1], [0, 1]]))
    with pytest.raises(QubitIndexError):
        sv.apply_1q(sv.init_plus(2), 2, sv.H)
    with pytest.raises(QubitIndexError):
        sv.apply_cz(sv.init_plus(2), 1, 1)


def test_cz_commutes_with_gate_on_third_qubit(rng):
    s = sv.PureState.from_amplitudes(rng.normal(size=8) + 1j * rng.normal(size=8), normalize=True)
    a = sv.apply_1q(sv.apply_cz(s, 0, 1), 2, sv.H @ sv.S)
    b = sv.apply_cz(sv.apply_1q(s, 2, sv.H @ sv.S), 0, 1)
    assert sv.states_equal_up_to_global_phase(a, b, tol=1e-12)


def test_norm_preserved_by_unitaries(rng):
    s = sv.init_plus(4)
    for _ in range(50):
        s = sv.apply_1q(s, int(rng.integers(4)), sv.uz(rng.uniform(0, 2 * math.pi)) @ sv.H)
        s = sv.apply_cz(s, 0, 3)
    assert abs(np.vdot(amps(s), amps(s)).real - 1.0) < 1e-12


def test_permute_qubits_swaps_labels():
    s = sv.permute_qubits(sv.basis_state("01"), [1, 0])
    assert s.probability_of(0b10) == 1.0


def test_apply_diagonal_returns_unnormalized_vector():
    vec = sv.apply_diagonal(sv.init_plus(2), (1, 0), [0, 1, 1, 0])
    assert np.allclose(vec, [0, 0.5, 0.5, 0])


# === ИЗМЕРЕНИЯ ===

@pytest.mark.parametrize("outcome", [0, 1])
def test_x_measurement_rotates_input(outcome):
    alpha, beta = 0.6, 0.8
    s = sv.apply_cz(sv.kron_states(sv.single_qubit(alpha, beta), sv.init_plus(1)), 0, 1)
    result = sv.measure_basis(s, 1, 0.0, rng=None, outcome=outcome)
    if outcome == 0:
        expected = [(alpha + beta) * SQ, (alpha - beta) * SQ]
    else:
        expected = [(alpha - beta) * SQ, (alpha + beta) * SQ]
    assert result.post_state.num_qubits == 1
    assert sv.states_equal_up_to_global_phase(result.post_state, sv.single_qubit(*expected))
    assert result.probability == pytest.approx(0.5)


def test_measure_removes_qubit_and_probabilities_sum(rng):
    s = sv.apply_cz(sv.init_plus(3), 0, 2)
    p0, p1 = sv.outcome_probabilities(s, 1, 0.3)
    assert p0 + p1 == pytest.approx(1.0, abs=1e-12)
    result = sv.measure_basis(s, 1, 0.3, rng)
    assert result.post_state.num_qubits == 2


def test_z_measurement_of_basis_state_is_certain(rng):
    result = sv.measure_basis(sv.basis_state("00"), 1, "Z", rng)
    assert result.label == 0 and result.probability == pytest.approx(1.0)
    assert np.allclose(amps(result.post_state), [1, 0])


def test_forced_zero_probability_branch_raises():
    with pytest.raises(ZeroProbabilityError):
        sv.measure_basis(sv.basis_state("00"), 0, "Z", rng=None, outcome=1)


def test_measurement_is_seed_reproducible():
    s = sv.init_plus(3)
    labels = []
    for _ in range(2):
        rng = np.random.default_rng(99)
        labels.append([sv.measure_basis(s, 0, "X" if i % 2 else 0.7, rng).label for i in range(3)] +
                      [sv.measure_basis(s, 2, "Y", rng).label])
    assert labels[0] == labels[1]


# === СРАВНЕНИЕ И СМЕСИ ===

def test_global_phase_comparison():
    plus = sv.init_plus(1)
    rotated = sv.PureState(num_qubits=1, amplitudes=amps(plus) * np.exp(1j * math.pi / 7))
    assert sv.states_equal_up_to_global_phase(plus, rotated)
    assert not sv.states_equal_up_to_global_phase(sv.basis_state("0"), sv.basis_state("1"))
    left = sv.PureState.from_amplitudes([0, 1, 1j, 0], normalize=True)
    right = sv.PureState.from_amplitudes([0, 1j, 1, 0], normalize=True)
    assert not sv.states_equal_up_to_global_phase(left, right, tol=1e-9)


def test_density_helpers():
    zero = sv.basis_state("0")
    assert sv.fidelity(sv.to_density(zero), zero) == pytest.approx(1.0)
    assert sv.fidelity(sv.maximally_mixed(1), sv.init_plus(1)) == pytest.approx(0.5)
    with pytest.raises(NormalizationError):
        sv.mix([(0.7, sv.to_density(zero)), (0.7, sv.to_density(zero))])


def test_detector_uncertainty_mixture_is_separable():
    left = sv.PureState.from_amplitudes([0, 1, 1j, 0], normalize=True)
    right = sv.PureState.from_amplitudes([0, 1j, 1, 0], normalize=True)
    mixed = sv.mix([(0.5, sv.to_density(left)), (0.5, sv.to_density(right))])
    assert sv.fidelity(mixed, left) == pytest.approx(0.5)
    assert sv.is_ppt(mixed, [0])
    assert sv.negativity(mixed, [0]) == pytest.approx(0.0, abs=1e-12)
    assert not sv.is_ppt(sv.to_density(left), [0])
    assert sv.negativity(sv.to_density(left), [0]) == pytest.approx(0.5)


def test_partial_trace_of_pure_and_density_agree(rng):
    s = sv.PureState.from_amplitudes(rng.normal(size=8) + 1j * rng.normal(size=8), normalize=True)
    a = sv.partial_trace(s, [0, 2])
    b = sv.partial_trace(sv.to_density(s), [0, 2])
    assert np.allclose(a.matrix, b.matrix, atol=1e-12)


def test_partial_trace_of_product_state():
    s = sv.kron_states(sv.basis_state("1"), sv.init_plus(1))
    reduced = sv.partial_trace(s, [1])
    assert np.allclose(reduced.matrix, [[0, 0], [0, 1]])


def test_schmidt_coefficients_of_bell_pair():
    bell = sv.PureState.from_amplitudes([0, 1, 1j, 0], normalize=True)
    assert np.allclose(sv.schmidt_coefficients(bell, [1]), [SQ, SQ])


def test_state_dump_format():
    s = sv.PureState.from_amplitudes([1, 1j], normalize=True)
    text = sv.dump_state(s)
    assert '"num_qubits": 1' in text
    loaded = sv.load_state(text)
    assert np.allclose(amps(loaded), amps(s))
