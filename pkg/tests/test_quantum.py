"""Test gate dilations and the post-selected state-vector simulation."""

import math
from fractions import Fraction

import numpy as np
import pytest

from app.core.config import settings
from app.core.errors import GateEmbeddingError, PostselectError, PostselectionUnderflowError, SeparabilityError
from app.schemas.circuit import Gate, GateKind
from app.schemas.quantum import StateVector
from app.services.circuit_service import CircuitCompiler, compile_blocks, not_gate, reset_gate
from app.services.config_space_service import (
    ConfigurationSpace,
    build_configuration_matrix,
    final_distribution,
    iterate_vectors,
)
from app.services.lowering_service import AND_TABLE, OR_TABLE, lower_to_universal
from app.services.quantum_service import (
    DECISION_OPERATOR,
    apply_gate,
    coin_unitary,
    decision_wire_amplitudes,
    embed_gate,
    embed_nonunitary,
    embedded_for,
    extract_u_tilde,
    gate_matrix,
    iteration_unitary,
    measure_pm,
    recompute_log2_survival,
    register_amplitudes,
    run_postselected_circuit,
)

TOLERANCE = 1e-10


@pytest.fixture(scope="module")
def d1_lowered(d1):
    return lower_to_universal(compile_blocks(d1, "a", 2, 1))


def test_fixed_dilations():
    """The coin and iteration unitaries reproduce their blocks with e = 2."""
    for embedded in (coin_unitary(), iteration_unitary()):
        assert embedded.e == 2.0
        assert embedded.unitarity_error() <= TOLERANCE
        assert embedded.block_error() <= TOLERANCE


@pytest.mark.parametrize("gate", [
    not_gate(0),
    reset_gate(0, 0),
    reset_gate(0, 1),
    Gate(kind=GateKind.DET, targets=(0, 1), table=AND_TABLE),
    Gate(kind=GateKind.DET, targets=(0, 1), table=OR_TABLE),
    Gate(kind=GateKind.DET, targets=(0, 1), table=(0, 0, 3, 3)),
])
def test_embed_gate(gate):
    embedded = embed_gate(gate_matrix(gate))
    assert embedded.n_aux == 2
    assert embedded.unitarity_error() <= TOLERANCE
    assert embedded.block_error() <= TOLERANCE


@pytest.mark.parametrize("gate, e_squared", [
    (not_gate(0), 2.0),
    (reset_gate(0, 0), 3.0),
    (Gate(kind=GateKind.DET, targets=(0, 1), table=AND_TABLE), 3.0),
])
def test_embed_gate_companion(gate, e_squared):
    """G′ is lower triangular with a unit diagonal ending in 0, even for total 0/1 gates."""
    embedded = embed_gate(gate_matrix(gate))
    k = embedded.block_rows
    companion = embedded.e * embedded.unitary[:k, k:2 * k].real
    expected_diagonal = [1.0] * (k - 1) + [0.0]
    assert np.allclose(np.diag(companion), expected_diagonal)
    assert np.allclose(companion, np.tril(companion))
    assert embedded.e_squared == pytest.approx(e_squared)


def test_embed_gate_rejects_bad_matrices():
    with pytest.raises(GateEmbeddingError):
        embed_gate(np.zeros((2, 2)))
    with pytest.raises(GateEmbeddingError):
        embed_gate(np.full((2, 2), 0.5))
    with pytest.raises(GateEmbeddingError):
        embed_gate(np.eye(3))


def test_embed_nonunitary():
    embedded = embed_nonunitary(DECISION_OPERATOR)
    assert embedded.block_error() <= TOLERANCE
    assert embedded.e == pytest.approx(np.linalg.norm(DECISION_OPERATOR, 2))
    with pytest.raises(GateEmbeddingError, match="singular"):
        embed_nonunitary(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_wide_det_gate_refused():
    gate = Gate(kind=GateKind.DET, targets=(0, 1, 2), table=tuple(range(8)))
    with pytest.raises(GateEmbeddingError):
        embedded_for(gate)


def test_coin_on_zero():
    """A post-selected coin leaves an even superposition and halves the survival."""
    state = apply_gate(StateVector.zero(2), coin_unitary(), targets=[0], aux=[1])
    assert state.probability(0b00) == pytest.approx(0.5)
    assert state.probability(0b10) == pytest.approx(0.5)
    assert state.log2_survival == pytest.approx(-1.0)


def test_apply_gate_requires_clean_aux():
    with pytest.raises(SeparabilityError):
        apply_gate(StateVector.from_amplitudes([0, 1, 0, 0]), coin_unitary(), targets=[0], aux=[1])


def test_reset_on_minus_state_underflows():
    """A reset on (|0> - |1>)/√2 keeps nothing after post-selection."""
    state = StateVector.from_amplitudes([1, 0, 0, 0, -1, 0, 0, 0])
    with pytest.raises(PostselectionUnderflowError, match="post-selection mass underflow"):
        apply_gate(state, embedded_for(reset_gate(0, 0)), targets=[0], aux=[1, 2])


def test_reset_on_plus_state_survives():
    """(|0> + |1>)/√2 resets to |0> with survival 2/e² = 2/3."""
    state = StateVector.from_amplitudes([1, 0, 0, 0, 1, 0, 0, 0])
    state = apply_gate(state, embedded_for(reset_gate(0, 0)), targets=[0], aux=[1, 2])
    assert state.probability(0) == pytest.approx(1.0)
    assert state.survival == pytest.approx(2 / 3)


def test_qubit_cap(d1_lowered, monkeypatch):
    monkeypatch.setattr(settings, "MAX_QUBITS", 10)
    with pytest.raises(PostselectError, match="simulation cap"):
        run_postselected_circuit(d1_lowered)


def test_register_amplitudes_follow_configuration_vectors(d1, d1_lowered):
    """At every block boundary the register amplitudes are proportional to v_i."""
    space = ConfigurationSpace(d1, "a", 1)
    matrix = build_configuration_matrix(d1, "a", 1)
    expected = [
        {space.encode(matrix.configurations[index]): float(value) for index, value in vector.support().items()}
        for vector in iterate_vectors(matrix, 2)
    ]
    observed = []
    run_postselected_circuit(d1_lowered, observer=lambda _, state: observed.append(
        register_amplitudes(state, d1_lowered)
    ))
    assert len(observed) == len(expected) == 3
    for amplitudes, vector in zip(observed, expected):
        total = sum(value.real for value in amplitudes.values())
        normalized = {key: value.real / total for key, value in amplitudes.items() if abs(value) > 1e-12}
        assert set(normalized) == set(vector)
        for key, value in vector.items():
            assert normalized[key] == pytest.approx(value, abs=1e-8)


def test_final_state_and_u_tilde(d1_lowered):
    """Decision amplitudes are ∝ (1/4, 3/4) and ũ ∝ (5/4, -1/4)."""
    state = run_postselected_circuit(d1_lowered)
    assert state.n_wires == 15
    first, second, outside = decision_wire_amplitudes(state)
    assert (second / first).real == pytest.approx(3.0, abs=1e-9)
    assert outside == pytest.approx(0.0, abs=1e-9)
    u_tilde = extract_u_tilde(state)
    assert u_tilde.ratio() == pytest.approx(-0.2, abs=1e-9)
    assert measure_pm(u_tilde)[0] == pytest.approx((1.25 - 0.25) ** 2 / (2 * (1.25 ** 2 + 0.25 ** 2)), abs=1e-9)


def test_survival_recomputed(d1_lowered):
    """Renormalized and unnormalized evolutions report the same survival."""
    state = run_postselected_circuit(d1_lowered)
    assert state.log2_survival < 0
    assert math.isfinite(state.log2_survival)
    assert recompute_log2_survival(d1_lowered) == pytest.approx(state.log2_survival, abs=1e-6)


@pytest.mark.slow
def test_coherent_run_on_corpus(corpus_entry):
    """Register amplitudes stay ∝ v_i and ũ ends ∝ (1/2 + A, 1/2 - A) on every corpus machine."""
    label, spec, word, T, space_bound = corpus_entry
    space = ConfigurationSpace(spec, word, space_bound)
    matrix = space.build_matrix()
    expected = [
        {space.encode(matrix.configurations[index]): float(value) for index, value in vector.support().items()}
        for vector in iterate_vectors(matrix, T)
    ]
    circuit = lower_to_universal(CircuitCompiler(space, T).compile_blocks())
    observed = []
    state = run_postselected_circuit(circuit, observer=lambda _, current: observed.append(
        register_amplitudes(current, circuit)
    ))

    assert len(observed) == T + 1, label
    for amplitudes, vector in zip(observed, expected):
        total = sum(value.real for value in amplitudes.values())
        normalized = {key: value.real / total for key, value in amplitudes.items() if abs(value) > 1e-12}
        assert set(normalized) == set(vector), label
        for key, value in vector.items():
            assert normalized[key] == pytest.approx(value, abs=1e-8), label

    acceptance = final_distribution(matrix, T)[0]
    expected_ratio = float((Fraction(1, 2) - acceptance) / (Fraction(1, 2) + acceptance))
    assert extract_u_tilde(state).ratio() == pytest.approx(expected_ratio, abs=1e-8), label
