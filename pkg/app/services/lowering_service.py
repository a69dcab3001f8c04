"""Lowering of det gates to NOT, in-place AND/OR and resets."""

from typing import Dict, List, Sequence, Tuple

from app.schemas.circuit import Gate, GateKind, ProbCircuit, WireLayout
from app.services.circuit_service import not_gate, reset_gate
from app.utils.logging import log_pipeline_event

# four output wires plus one scratch wire
AUX_WIRES = 5

AND_TABLE = (0, 0, 2, 3)
OR_TABLE = (0, 1, 3, 3)


def and_gate(source: int, target: int) -> Gate:
    """(a, b) -> (a, a AND b)."""
    return Gate(kind=GateKind.DET, targets=(source, target), table=AND_TABLE, label="AND")


def or_gate(source: int, target: int) -> Gate:
    """(a, b) -> (a, a OR b)."""
    return Gate(kind=GateKind.DET, targets=(source, target), table=OR_TABLE, label="OR")


def _bit(index: int, position: int, arity: int) -> int:
    return (index >> (arity - 1 - position)) & 1


def _output_function(gate: Gate, position: int) -> List[int]:
    arity = gate.arity
    return [_bit(gate.table[index], position, arity) for index in range(2 ** arity)]


def _support(values: List[int], arity: int) -> List[int]:
    """Input positions the output actually depends on."""
    support = []
    for position in range(arity):
        flip = 1 << (arity - 1 - position)
        if any(values[index] != values[index ^ flip] for index in range(2 ** arity)):
            support.append(position)
    return support


def _minterm_gates(
    targets: Sequence[int],
    support: List[int],
    term: Tuple[int, ...],
    scratch: int,
    output: int,
) -> List[Gate]:
    gates = [not_gate(scratch)]
    for position, bit in zip(support, term):
        wire = targets[position]
        if bit:
            gates.append(and_gate(wire, scratch))
        else:
            gates.extend([not_gate(wire), and_gate(wire, scratch), not_gate(wire)])
    gates.append(or_gate(scratch, output))
    gates.append(reset_gate(scratch, 0))
    return gates


def lower_gate(gate: Gate, aux_start: int) -> List[Gate]:
    """Expansion of one gate; coin and reset gates pass through unchanged."""
    if gate.kind != GateKind.DET:
        return [gate]
    if gate.is_identity():
        return []
    if gate.arity == 1 and gate.table == (1, 0):
        return [not_gate(gate.targets[0])]
    if gate.arity == 2 and gate.table in (AND_TABLE, OR_TABLE):
        return [gate]

    arity = gate.arity
    outputs = [aux_start + position for position in range(arity)]
    scratch = aux_start + AUX_WIRES - 1
    changed = []
    gates: List[Gate] = []

    for position in range(arity):
        values = _output_function(gate, position)
        if all(values[index] == _bit(index, position, arity) for index in range(2 ** arity)):
            continue
        changed.append(position)
        if not any(values):
            continue
        if all(values):
            gates.append(not_gate(outputs[position]))
            continue
        support = _support(values, arity)
        ones = sorted({tuple(_bit(index, p, arity) for p in support) for index in range(2 ** arity) if values[index]})
        zeros = sorted({tuple(_bit(index, p, arity) for p in support) for index in range(2 ** arity) if not values[index]})
        negate = len(zeros) < len(ones)
        for term in zeros if negate else ones:
            gates.extend(_minterm_gates(gate.targets, support, term, scratch, outputs[position]))
        if negate:
            gates.append(not_gate(outputs[position]))

    for position in changed:
        wire = gate.targets[position]
        gates.extend([
            reset_gate(wire, 0),
            or_gate(outputs[position], wire),
            reset_gate(outputs[position], 0),
        ])
    return gates


def lower_to_universal(circuit: ProbCircuit) -> ProbCircuit:
    """K′: every det gate rewritten over NOT, AND, OR and reset using five auxiliary wires."""
    layout = WireLayout(register_width=circuit.layout.register_width, aux_count=circuit.layout.aux_count + AUX_WIRES)
    aux_start = circuit.width
    gates: List[Gate] = []
    positions: Dict[int, int] = {}
    for index, gate in enumerate(circuit.gates):
        positions[index] = len(gates)
        gates.extend(lower_gate(gate, aux_start))
    positions[len(circuit.gates)] = len(gates)

    lowered = ProbCircuit(
        width=circuit.width + AUX_WIRES,
        gates=gates,
        layout=layout,
        config_layout=circuit.config_layout,
        markers=[(positions[index], label) for index, label in circuit.markers],
        T=circuit.T,
        accept_bits=circuit.accept_bits,
        header=circuit.header,
    )
    log_pipeline_event("lower", width=lowered.width, gates=len(gates), source_gates=len(circuit.gates))
    return lowered
