"""Test circuit compilation and exact simulation."""

from fractions import Fraction

import pytest
from pydantic import ValidationError

from app.schemas.circuit import Gate, GateKind
from app.services.circuit_service import (
    CircuitCompiler,
    apply_gate_exact,
    compile_blocks,
    det_gate,
    format_circuit,
    register_marginals,
    simulate_prob_circuit_exact,
)
from app.services.config_space_service import ConfigurationSpace, build_configuration_matrix, iterate_vectors
from app.services.lowering_service import AND_TABLE, lower_to_universal
from app.services.machine_service import MachineService


def expected_marginals(spec, word, T, space_bound):
    """Exact v_0 … v_T keyed by encoded configuration."""
    space = ConfigurationSpace(spec, word, space_bound)
    matrix = build_configuration_matrix(spec, word, space_bound)
    return [
        {space.encode(matrix.configurations[index]): value for index, value in vector.support().items()}
        for vector in iterate_vectors(matrix, T)
    ]


def test_compile_d1_shape(d1):
    """Three control wires plus a five-bit register; five reachable parts per block."""
    circuit = compile_blocks(d1, "a", 2, 1)
    assert circuit.width == 8
    assert circuit.layout.register == [3, 4, 5, 6, 7]
    assert circuit.accept_bits == "10000"
    labels = [label for _, label in circuit.markers]
    assert labels.count("block 1") == 1 and labels.count("block 2") == 1
    assert sum(label.startswith("part ") for label in labels) == 10
    assert labels[-1] == "decision"
    assert len(circuit.gates) == 190
    assert len(circuit.block_checkpoints()) == 3


def test_det_gate_tabulation():
    assert det_gate((0, 1), lambda x: (x[0], x[0] & x[1])).table == AND_TABLE


def test_gate_validation():
    with pytest.raises(ValidationError):
        Gate(kind=GateKind.COIN, targets=(0, 1))
    with pytest.raises(ValidationError):
        Gate(kind=GateKind.DET, targets=(0,), table=(0,))
    with pytest.raises(ValidationError):
        Gate(kind=GateKind.RESET, targets=(0,), value=2)


def test_apply_gate_exact_coin_and_reset():
    coin = Gate(kind=GateKind.COIN, targets=(0,))
    distribution = apply_gate_exact({0b00: Fraction(1)}, coin, 2)
    assert distribution == {0b00: Fraction(1, 2), 0b10: Fraction(1, 2)}
    reset = Gate(kind=GateKind.RESET, targets=(1,), value=1)
    assert apply_gate_exact(distribution, reset, 2) == {0b01: Fraction(1, 2), 0b11: Fraction(1, 2)}


def test_simulate_d1_decision_wire(d1):
    """Wire 0 reads 1 with probability A = 3/4, before and after lowering."""
    circuit = compile_blocks(d1, "a", 2, 1)
    assert simulate_prob_circuit_exact(circuit).wire_probability(0) == Fraction(3, 4)
    lowered = lower_to_universal(circuit)
    distribution = simulate_prob_circuit_exact(lowered)
    assert distribution.wire_probability(0) == Fraction(3, 4)
    assert distribution.total == 1
    assert set(distribution.probabilities) == {"1" + "0" * (lowered.width - 1), "0" * lowered.width}


def test_simulate_initial_state_checked(d1):
    with pytest.raises(ValueError):
        simulate_prob_circuit_exact(compile_blocks(d1, "a", 2, 1), initial="01")


def test_circuit_fidelity_on_corpus(corpus):
    """K and K′ put mass A on wire 0 and carry v_i on the register at every block boundary."""
    for label, spec, word, T, space_bound in corpus:
        acceptance = MachineService.run_exhaustive(spec, word, T, space_cap=space_bound).p_acc
        expected = expected_marginals(spec, word, T, space_bound)
        circuit = CircuitCompiler(ConfigurationSpace(spec, word, space_bound), T).compile_blocks()
        for candidate in (circuit, lower_to_universal(circuit)):
            assert simulate_prob_circuit_exact(candidate).wire_probability(0) == acceptance, label
            assert register_marginals(candidate) == expected, label


def test_format_circuit(d1):
    circuit = compile_blocks(d1, "a", 2, 1).model_copy(update={"header": "machine=d1 input=a T=2 A=3/4"})
    lines = format_circuit(circuit).splitlines()
    assert lines[0] == "# machine=d1 input=a T=2 A=3/4"
    assert lines[1] == "width=8 gates=190"
    assert "# block 1" in lines
    assert "# decision" in lines
    assert "COIN 0" in lines
    assert "RESET 1 1" in lines
    assert "DET 1 2 table=0033" in lines


@pytest.mark.slow
def test_circuit_fidelity_two_cells(scribe_canonical):
    """A machine that sweeps two work cells keeps v_i on the register through K and K′."""
    expected = expected_marginals(scribe_canonical, "", 8, 2)
    circuit = compile_blocks(scribe_canonical, "", 8, 2)
    lowered = lower_to_universal(circuit)
    assert lowered.width == circuit.width + 5
    for candidate in (circuit, lowered):
        assert simulate_prob_circuit_exact(candidate).wire_probability(0) == Fraction(3, 4)
        assert register_marginals(candidate) == expected
