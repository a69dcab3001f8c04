"""Compilation of canonical machines into probabilistic circuits, and exact simulation."""

from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.schemas.circuit import CircuitDistribution, Gate, GateKind, ProbCircuit, WireLayout
from app.schemas.config_space import Configuration
from app.services.config_space_service import ConfigurationSpace
from app.utils.logging import log_pipeline_event

HALF = Fraction(1, 2)

Bits = Tuple[int, ...]


def det_gate(targets: Sequence[int], function: Callable[[Bits], Bits], label: Optional[str] = None) -> Gate:
    """Tabulate ``function`` over every input of the targets (targets[0] is the MSB)."""
    arity = len(targets)
    table = []
    for index in range(2 ** arity):
        inputs = tuple((index >> (arity - 1 - position)) & 1 for position in range(arity))
        outputs = function(inputs)
        table.append(sum(bit << (arity - 1 - position) for position, bit in enumerate(outputs)))
    return Gate(kind=GateKind.DET, targets=tuple(targets), table=tuple(table), label=label)


def not_gate(wire: int) -> Gate:
    return Gate(kind=GateKind.DET, targets=(wire,), table=(1, 0), label="NOT")


def reset_gate(wire: int, value: int) -> Gate:
    return Gate(kind=GateKind.RESET, targets=(wire,), value=value, label="RESET")


def coin_gate(wire: int) -> Gate:
    return Gate(kind=GateKind.COIN, targets=(wire,), label="COIN")


class CircuitCompiler:
    """Builds K for one canonical machine, input and clock."""

    def __init__(self, space: ConfigurationSpace, T: int):
        self.space = space
        self.T = T
        self.layout = WireLayout(register_width=space.layout.length)

    def _bits(self, configuration: Configuration) -> List[int]:
        return [int(bit) for bit in self.space.encode(configuration)]

    def compile_part(self, configuration: Configuration) -> List[Gate]:
        """Gates moving the register from C_j to its heads/tails successor.

        Halting configurations get a part whose successors are C_j itself.
        """
        layout = self.layout
        r, bc, cc = layout.random, layout.block_control, layout.config_control
        current = self._bits(configuration)
        if self.space.spec.is_halting(configuration.state):
            heads = tails = current
        else:
            heads_configuration, tails_configuration = self.space.successors(configuration)
            heads, tails = self._bits(heads_configuration), self._bits(tails_configuration)

        gates = [det_gate((bc, cc), lambda x: (x[0], x[0]), "SET-CC")]
        for wire, bit in zip(layout.register, current):
            gates.append(det_gate(
                (bc, cc, wire),
                lambda x, bit=bit: (x[0], x[0] & x[1] & int(x[2] == bit), x[2]),
                f"EQ{bit}",
            ))
        for wire, before, after in zip(layout.register, current, heads):
            flip = before ^ after
            gates.append(det_gate(
                (r, cc, wire),
                lambda x, flip=flip: (x[0], x[1], x[2] ^ (x[1] & (1 - x[0]) & flip)),
                "SWITCH-HEADS",
            ))
        for wire, before, after in zip(layout.register, current, tails):
            flip = before ^ after
            gates.append(det_gate(
                (r, cc, wire),
                lambda x, flip=flip: (x[0], x[1], x[2] ^ (x[1] & x[0] & flip)),
                "SWITCH-TAILS",
            ))
        gates.append(det_gate((bc, cc), lambda x: (x[0] & (1 - x[1]), 0), "CLEAR"))
        return gates

    def compile_blocks(self) -> ProbCircuit:
        layout = self.layout
        configurations = self.space.enumerate_configurations()
        parts = self.space.reachable()
        gates: List[Gate] = []
        markers: List[Tuple[int, str]] = [(0, "prologue")]

        for wire, bit in zip(layout.register, self._bits(self.space.initial)):
            if bit:
                gates.append(not_gate(wire))

        compiled_parts = [(index, self.compile_part(configurations[index])) for index in parts]
        for block in range(1, self.T + 1):
            markers.append((len(gates), f"block {block}"))
            gates.append(coin_gate(layout.random))
            gates.append(reset_gate(layout.block_control, 1))
            for index, part in compiled_parts:
                markers.append((len(gates), f"part {index + 1}"))
                gates.extend(part)

        markers.append((len(gates), "decision"))
        gates.append(reset_gate(layout.random, 0))
        gates.append(reset_gate(layout.block_control, 1))
        gates.append(det_gate((layout.block_control, layout.config_control), lambda x: (x[0], x[0]), "SET-CC"))
        accept_bits = self.space.encode(self.space.accepting)
        for wire, bit in zip(layout.register, accept_bits):
            bit = int(bit)
            gates.append(det_gate(
                (layout.block_control, layout.config_control, wire),
                lambda x, bit=bit: (x[0], x[0] & x[1] & int(x[2] == bit), x[2]),
                f"EQ{bit}",
            ))
        gates.append(det_gate((layout.random, layout.config_control), lambda x: (x[1], x[1]), "DECIDE"))
        for wire in range(1, layout.width):
            gates.append(reset_gate(wire, 0))

        circuit = ProbCircuit(
            width=layout.width,
            gates=gates,
            layout=layout,
            config_layout=self.space.layout,
            markers=markers,
            T=self.T,
            accept_bits=accept_bits,
        )
        log_pipeline_event(
            "compile",
            machine=self.space.spec.name,
            input_word=self.space.word,
            T=self.T,
            width=circuit.width,
            gates=len(gates),
            parts=len(parts),
        )
        return circuit


def compile_blocks(spec, word: str, T: int, space_bound: int) -> ProbCircuit:
    return CircuitCompiler(ConfigurationSpace(spec, word, space_bound), T).compile_blocks()


def apply_gate_exact(distribution: Dict[int, Fraction], gate: Gate, width: int) -> Dict[int, Fraction]:
    """Push a sparse distribution over wire values (wire 0 is the MSB) through one gate."""
    shifts = [width - 1 - wire for wire in gate.targets]
    arity = len(shifts)
    result: Dict[int, Fraction] = {}

    def add(state: int, mass: Fraction):
        result[state] = result.get(state, Fraction(0)) + mass

    for state, mass in distribution.items():
        if gate.kind == GateKind.COIN:
            cleared = state & ~(1 << shifts[0])
            add(cleared, mass * HALF)
            add(cleared | (1 << shifts[0]), mass * HALF)
        elif gate.kind == GateKind.RESET:
            cleared = state & ~(1 << shifts[0])
            add(cleared | (gate.value << shifts[0]), mass)
        else:
            index = 0
            for shift in shifts:
                index = (index << 1) | ((state >> shift) & 1)
            output = gate.table[index]
            updated = state
            for position, shift in enumerate(shifts):
                bit = (output >> (arity - 1 - position)) & 1
                updated = (updated & ~(1 << shift)) | (bit << shift)
            add(updated, mass)
    return result


def _to_bitstring(state: int, width: int) -> str:
    return format(state, f"0{width}b")


def simulate_prob_circuit_exact(
    circuit: ProbCircuit,
    initial: Optional[str] = None,
    observer: Optional[Callable[[int, Dict[int, Fraction]], None]] = None,
) -> CircuitDistribution:
    """Exact distribution after running every gate from ``initial`` (all zeros by default).

    ``observer(checkpoint, distribution)`` is called at each block checkpoint.
    """
    width = circuit.width
    initial = initial if initial is not None else "0" * width
    if len(initial) != width or set(initial) - {"0", "1"}:
        raise ValueError(f"initial state must be a {width}-bit string")
    distribution: Dict[int, Fraction] = {int(initial, 2): Fraction(1)}
    checkpoints = {index: number for number, index in enumerate(circuit.block_checkpoints())}

    for index, gate in enumerate(circuit.gates):
        if observer is not None and index in checkpoints:
            observer(checkpoints[index], distribution)
        distribution = apply_gate_exact(distribution, gate, width)

    return CircuitDistribution(
        width=width,
        probabilities={_to_bitstring(state, width): mass for state, mass in sorted(distribution.items()) if mass},
    )


def register_marginals(circuit: ProbCircuit, initial: Optional[str] = None) -> List[Dict[str, Fraction]]:
    """Distribution over the register bits at every block checkpoint (v_0 … v_T)."""
    register = circuit.layout.register
    width = circuit.width
    snapshots: List[Dict[str, Fraction]] = []

    def observe(_, distribution):
        marginal: Dict[str, Fraction] = {}
        for state, mass in distribution.items():
            bits = _to_bitstring(state, width)
            key = "".join(bits[wire] for wire in register)
            marginal[key] = marginal.get(key, Fraction(0)) + mass
        snapshots.append({key: value for key, value in marginal.items() if value})

    simulate_prob_circuit_exact(circuit, initial, observer=observe)
    return snapshots


def format_circuit(circuit: ProbCircuit) -> str:
    """Line-oriented dump: header, markers as ``#`` comments, one gate per line."""
    lines = []
    if circuit.header:
        lines.append(f"# {circuit.header}")
    lines.append(f"width={circuit.width} gates={len(circuit.gates)}")
    markers: Dict[int, List[str]] = {}
    for index, label in circuit.markers:
        markers.setdefault(index, []).append(label)
    for index, gate in enumerate(circuit.gates):
        for label in markers.get(index, []):
            lines.append(f"# {label}")
        targets = " ".join(str(wire) for wire in gate.targets)
        if gate.kind == GateKind.COIN:
            lines.append(f"COIN {targets}")
        elif gate.kind == GateKind.RESET:
            lines.append(f"RESET {targets} {gate.value}")
        else:
            table = "".join(format(output, "x") for output in gate.table)
            lines.append(f"DET {targets} table={table}")
    for label in markers.get(len(circuit.gates), []):
        lines.append(f"# {label}")
    return "\n".join(lines) + "\n"
