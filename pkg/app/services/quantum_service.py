"""Post-selected state-vector simulation of compiled circuits.

Every classical gate G is dilated to a unitary U whose top-left block is G/e;
applying U and post-selecting the auxiliary wires on |0…0> therefore realizes
G up to the factor e. Survival is tracked in log2 form.
"""

import math
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import (
    GateEmbeddingError,
    PostselectError,
    PostselectionUnderflowError,
    SeparabilityError,
)
from app.schemas.circuit import Gate, GateKind, ProbCircuit
from app.schemas.quantum import EmbeddedGate, StateVector
from app.utils.logging import log_pipeline_event

# Logical-major: the first qubit is the logical wire, the appended auxiliary wire is the LSB.
COIN_MATRIX = 0.5 * np.array([
    [1, 1, 1, 1],
    [1, 1, -1, -1],
    [1, -1, 1, -1],
    [1, -1, -1, 1],
], dtype=float)

ITERATION_MATRIX = 0.5 * np.array([
    [1, math.sqrt(3), 0, 0],
    [math.sqrt(3), -1, 0, 0],
    [0, 0, 2, 0],
    [0, 0, 0, 2],
], dtype=float)

DECISION_OPERATOR = np.array([[0.5, 1.5], [0.5, -0.5]], dtype=float)

GATE_AUX_WIRES = 2
POSTSELECTION_WIRES = 2


def to_aux_major(matrix: np.ndarray, n_logical: int, n_aux: int) -> np.ndarray:
    """Reorder a logical-major unitary (aux wires least significant) into aux-major order."""
    k, a = 2 ** n_logical, 2 ** n_aux
    permutation = [logical * a + aux for aux in range(a) for logical in range(k)]
    return np.asarray(matrix)[np.ix_(permutation, permutation)]


def complete_unitary(top_rows: np.ndarray) -> np.ndarray:
    """Extend orthonormal rows to a unitary with Gram-Schmidt over the standard basis."""
    dimension = top_rows.shape[1]
    rows = [np.asarray(row, dtype=complex) for row in top_rows]
    for index in range(dimension):
        if len(rows) == dimension:
            break
        vector = np.zeros(dimension, dtype=complex)
        vector[index] = 1.0
        for _ in range(2):
            for row in rows:
                vector = vector - np.vdot(row, vector) * row
        norm = np.linalg.norm(vector)
        if norm > 1e-8:
            rows.append(vector / norm)
    return np.array(rows)


def _check_unitary(embedded: EmbeddedGate) -> EmbeddedGate:
    if embedded.unitarity_error() > settings.UNITARY_TOLERANCE:
        raise GateEmbeddingError(f"dilation of {embedded.label} is not unitary")
    if embedded.block_error() > settings.UNITARY_TOLERANCE:
        raise GateEmbeddingError(f"dilation of {embedded.label} does not reproduce its block")
    return embedded


def coin_unitary() -> EmbeddedGate:
    """U_0: the fair coin as a one-auxiliary dilation of [[1,1],[1,1]] with e = 2."""
    return _check_unitary(EmbeddedGate(
        label="COIN",
        source=np.array([[1.0, 1.0], [1.0, 1.0]]),
        unitary=to_aux_major(COIN_MATRIX, 1, 1).astype(complex),
        e=2.0,
        e_squared=4.0,
        n_logical=1,
        n_aux=1,
    ))


@lru_cache(maxsize=None)
def iteration_unitary() -> EmbeddedGate:
    """Dilation of diag(1, 2) with e = 2."""
    return _check_unitary(EmbeddedGate(
        label="ITERATE",
        source=np.diag([1.0, 2.0]),
        unitary=to_aux_major(ITERATION_MATRIX, 1, 1).astype(complex),
        e=2.0,
        e_squared=4.0,
        n_logical=1,
        n_aux=1,
    ))


def embed_gate(matrix: np.ndarray, label: str = "G") -> EmbeddedGate:
    """Dilate an integer k×k gate matrix (k = 2 or 4) into a unitary on two extra wires.

    Rows of G are first made orthogonal by a lower-triangular companion G′ with unit
    diagonal (last entry 0), then padded to a common norm e² by a diagonal G″:
    the top rows of U are [G | G′ | G″ | 0] / e.
    """
    source = np.asarray(matrix, dtype=float)
    k = source.shape[0]
    if source.ndim != 2 or source.shape != (k, k) or k not in (2, 4):
        raise GateEmbeddingError(f"{label}: expected a 2×2 or 4×4 matrix")
    if not np.all(np.isfinite(source)) or not np.array_equal(source, np.round(source)):
        raise GateEmbeddingError(f"{label}: entries must be integers")
    if not np.any(source):
        raise GateEmbeddingError(f"{label}: zero matrix cannot be embedded")

    gram = source @ source.T
    companion = np.zeros((k, k))
    for column in range(k - 1):
        companion[column, column] = 1.0
        for row in range(column + 1, k):
            overlap = gram[column, row] + companion[column, :column] @ companion[row, :column]
            companion[row, column] = -overlap

    norms = np.sum(source ** 2, axis=1) + np.sum(companion ** 2, axis=1)
    e_squared = float(np.max(norms))
    padding = np.diag(np.sqrt(e_squared - norms))
    e = math.sqrt(e_squared)
    top = np.hstack([source, companion, padding, np.zeros((k, k))]) / e

    return _check_unitary(EmbeddedGate(
        label=label,
        source=source,
        unitary=complete_unitary(top),
        e=e,
        e_squared=e_squared,
        n_logical=int(math.log2(k)),
        n_aux=GATE_AUX_WIRES,
    ))


def embed_nonunitary(matrix: np.ndarray, label: str = "M") -> EmbeddedGate:
    """Dilate a real invertible 2×2 operator with the smallest factor e (its spectral norm)."""
    source = np.asarray(matrix, dtype=float)
    if source.shape != (2, 2) or not np.all(np.isfinite(source)):
        raise GateEmbeddingError(f"{label}: expected a finite 2×2 matrix")
    if not np.any(source):
        raise GateEmbeddingError(f"{label}: zero matrix cannot be embedded")
    if np.linalg.matrix_rank(source) < 2:
        raise GateEmbeddingError(f"{label}: matrix is singular")

    e = float(np.linalg.norm(source, 2))
    if e > settings.E_SEARCH_BOUND:
        raise GateEmbeddingError(f"{label}: no normalization factor within {settings.E_SEARCH_BOUND}")
    if abs(e - 1.0) < settings.UNITARY_TOLERANCE:
        e = 1.0
    defect = e * e * np.eye(2) - source @ source.T
    values, vectors = np.linalg.eigh(defect)
    values = np.clip(values, 0.0, None)
    complement = vectors @ np.diag(np.sqrt(values)) @ vectors.T
    top = np.hstack([source, complement]) / e

    return _check_unitary(EmbeddedGate(
        label=label,
        source=source,
        unitary=complete_unitary(top),
        e=e,
        e_squared=e * e,
        n_logical=1,
        n_aux=1,
    ))


def gate_matrix(gate: Gate) -> np.ndarray:
    """0/1 matrix with G[out, in] = 1; columns indexed like ``gate.table``."""
    if gate.kind == GateKind.COIN:
        return np.ones((2, 2))
    k = 2 ** gate.arity
    matrix = np.zeros((k, k))
    if gate.kind == GateKind.RESET:
        matrix[gate.value, :] = 1.0
    else:
        for index, output in enumerate(gate.table):
            matrix[output, index] = 1.0
    return matrix


@lru_cache(maxsize=None)
def _embedded_for_signature(signature: Tuple) -> EmbeddedGate:
    kind, table, value = signature
    if kind == GateKind.COIN.value:
        return coin_unitary()
    arity = 1 if table is None else int(math.log2(len(table)))
    gate = Gate(kind=GateKind(kind), targets=tuple(range(arity)), table=table, value=value)
    return embed_gate(gate_matrix(gate), label=kind.upper())


def embedded_for(gate: Gate) -> EmbeddedGate:
    if gate.kind == GateKind.DET and gate.arity > 2:
        raise GateEmbeddingError("only lowered circuits (gates on at most two wires) can be simulated")
    return _embedded_for_signature(gate.signature)


def apply_gate(
    state: StateVector,
    gate: EmbeddedGate,
    targets: Sequence[int],
    aux: Optional[Sequence[int]] = None,
) -> StateVector:
    """Apply U on (aux, targets), keep the aux = |0…0> branch and renormalize."""
    n = state.n_wires
    if aux is None:
        aux = list(range(n - gate.n_aux, n))
    wires = list(aux) + list(targets)
    if len(targets) != gate.n_logical or len(aux) != gate.n_aux:
        raise ValueError(f"{gate.label} acts on {gate.n_logical} wires with {gate.n_aux} auxiliary wires")
    if len(set(wires)) != len(wires) or any(not 0 <= wire < n for wire in wires):
        raise ValueError("target and auxiliary wires must be distinct and in range")

    k = gate.block_rows
    moved = np.moveaxis(state.amplitudes.reshape([2] * n), wires, list(range(len(wires))))
    shape = moved.shape
    flat = moved.reshape(2 ** len(wires), -1)
    stray = float(np.sum(np.abs(flat[k:]) ** 2))
    if stray > settings.SEPARABILITY_TOLERANCE:
        raise SeparabilityError(f"auxiliary wires of {gate.label} are not in |0>")

    projected = (gate.unitary @ flat)[:k]
    retained = float(np.sum(np.abs(projected) ** 2))
    if retained < settings.UNDERFLOW_THRESHOLD:
        raise PostselectionUnderflowError(f"post-selection mass underflow after {gate.label} (retained {retained:.3g})")

    result = np.zeros_like(flat)
    result[:k] = projected / math.sqrt(retained)
    amplitudes = np.moveaxis(result.reshape(shape), list(range(len(wires))), wires).reshape(-1)
    return StateVector(
        n_wires=n,
        amplitudes=amplitudes,
        log2_survival=state.log2_survival + math.log2(retained),
    )


def adjoin_zero_wire(state: StateVector) -> StateVector:
    """Append a wire in |0> as the least significant bit."""
    return StateVector(
        n_wires=state.n_wires + 1,
        amplitudes=np.kron(state.amplitudes, np.array([1.0, 0.0])),
        log2_survival=state.log2_survival,
    )


def drop_zero_wire(state: StateVector) -> StateVector:
    """Remove a last wire that is in |0>."""
    pairs = state.amplitudes.reshape(-1, 2)
    if float(np.sum(np.abs(pairs[:, 1]) ** 2)) > settings.SEPARABILITY_TOLERANCE:
        raise SeparabilityError("last wire is not in |0>")
    return StateVector(n_wires=state.n_wires - 1, amplitudes=pairs[:, 0].copy(), log2_survival=state.log2_survival)


def apply_one_wire_operator(state: StateVector, gate: EmbeddedGate) -> StateVector:
    """Apply a one-auxiliary dilation to a one-wire state through a temporary auxiliary wire."""
    return drop_zero_wire(apply_gate(adjoin_zero_wire(state), gate, targets=[0], aux=[1]))


def run_postselected_circuit(
    circuit: ProbCircuit,
    observer: Optional[Callable[[int, StateVector], None]] = None,
) -> StateVector:
    """Coherent simulation of a lowered circuit from |0…0>.

    The two wires after the circuit's own are the post-selection auxiliaries;
    ``observer(checkpoint, state)`` is called at every block checkpoint.
    """
    q = circuit.width + POSTSELECTION_WIRES
    if q > settings.MAX_QUBITS:
        raise PostselectError(f"{q} wires exceed the simulation cap of {settings.MAX_QUBITS}")
    state = StateVector.zero(q)
    coin_aux = [q - 1]
    gate_aux = [q - 2, q - 1]
    checkpoints = {index: number for number, index in enumerate(circuit.block_checkpoints())}

    for index, gate in enumerate(circuit.gates):
        if observer is not None and index in checkpoints:
            observer(checkpoints[index], state)
        embedded = embedded_for(gate)
        aux = coin_aux if gate.kind == GateKind.COIN else gate_aux
        state = apply_gate(state, embedded, gate.targets, aux)

    log_pipeline_event(
        "quantum-run",
        wires=q,
        gates=len(circuit.gates),
        log2_survival=f"{state.log2_survival:.6f}",
    )
    return state


def recompute_log2_survival(circuit: ProbCircuit) -> float:
    """log2 of the squared norm left by applying every block G/e without renormalizing."""
    n = circuit.width
    amplitudes = np.zeros(2 ** n, dtype=complex)
    amplitudes[0] = 1.0
    log2_scale = 0.0
    for gate in circuit.gates:
        embedded = embedded_for(gate)
        targets = list(gate.targets)
        moved = np.moveaxis(amplitudes.reshape([2] * n), targets, list(range(len(targets))))
        shape = moved.shape
        flat = embedded.action @ moved.reshape(2 ** len(targets), -1)
        amplitudes = np.moveaxis(flat.reshape(shape), list(range(len(targets))), targets).reshape(-1)
        norm = float(np.linalg.norm(amplitudes))
        if norm == 0.0:
            raise PostselectionUnderflowError("unnormalized evolution vanished")
        amplitudes = amplitudes / norm
        log2_scale += 2 * math.log2(norm)
    return log2_scale


def register_amplitudes(state: StateVector, circuit: ProbCircuit) -> Dict[str, complex]:
    """Amplitudes summed over every wire outside the configuration register."""
    register = circuit.layout.register
    n = state.n_wires
    moved = np.moveaxis(state.amplitudes.reshape([2] * n), register, list(range(len(register))))
    summed = moved.reshape(2 ** len(register), -1).sum(axis=1)
    width = len(register)
    return {
        format(index, f"0{width}b"): complex(value)
        for index, value in enumerate(summed)
        if abs(value) > 1e-15
    }


def decision_wire_amplitudes(state: StateVector) -> Tuple[complex, complex, float]:
    """Amplitudes of |0…0> and |10…0> plus the mass found anywhere else."""
    n = state.n_wires
    first = complex(state.amplitudes[0])
    second = complex(state.amplitudes[1 << (n - 1)])
    outside = max(0.0, 1.0 - abs(first) ** 2 - abs(second) ** 2)
    return first, second, outside


@lru_cache(maxsize=None)
def decision_unitary() -> EmbeddedGate:
    return embed_nonunitary(DECISION_OPERATOR, label="DECISION")


def extract_u_tilde(state: StateVector) -> StateVector:
    """One-wire state ∝ (1/2 + A, 1/2 - A) from the final circuit state ∝ (1 - A, A)."""
    first, second, outside = decision_wire_amplitudes(state)
    if outside > settings.SEPARABILITY_TOLERANCE:
        raise SeparabilityError(f"mass {outside:.3g} outside the decision wire")
    decision = StateVector.from_amplitudes([first, second], log2_survival=state.log2_survival)
    return apply_one_wire_operator(decision, decision_unitary())


def measure_pm(state: StateVector) -> Tuple[float, float]:
    """(P+, P-) for a one-wire state measured in the ± basis."""
    if state.n_wires != 1:
        raise ValueError("± measurement expects a one-wire state")
    first, second = state.amplitudes
    plus = abs(first + second) ** 2 / 2
    minus = abs(first - second) ** 2 / 2
    total = plus + minus
    return float(plus / total), float(minus / total)


def measure_computational(state: StateVector) -> Tuple[float, float]:
    if state.n_wires != 1:
        raise ValueError("measurement expects a one-wire state")
    zero, one = (abs(value) ** 2 for value in state.amplitudes)
    return float(zero / (zero + one)), float(one / (zero + one))


def format_state(state: StateVector, threshold: float = 1e-15) -> str:
    digits = settings.FLOAT_DIGITS
    lines = [
        f"wires={state.n_wires}",
        f"survival={format(state.survival, f'.{digits}g')}",
        f"log2_survival={format(state.log2_survival, f'.{digits}g')}",
    ]
    for index, value in enumerate(state.amplitudes):
        if abs(value) > threshold:
            bits = format(index, f"0{state.n_wires}b")
            lines.append(f"{bits} {format(value.real, f'.{digits}g')} {format(value.imag, f'.{digits}g')}")
    return "\n".join(lines) + "\n"
