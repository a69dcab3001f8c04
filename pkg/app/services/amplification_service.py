"""Amplified decision procedure on the post-selected decision state."""

import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import (
    AmplificationBoundError,
    NotCanonicalError,
    PromiseViolationError,
    UndefinedDecisionError,
)
from app.schemas.decision import (
    AmplifierParams,
    BoundScan,
    BoundsReport,
    CoeqResult,
    DecisionTrace,
    PreparedDecision,
    RunRecord,
)
from app.schemas.machine import MachineSpec
from app.schemas.quantum import StateVector
from app.services.circuit_service import CircuitCompiler
from app.services.config_space_service import ConfigurationSpace, dyadic_numerator
from app.services.lowering_service import lower_to_universal
from app.services.machine_service import MachineService
from app.services.quantum_service import (
    apply_one_wire_operator,
    embed_nonunitary,
    extract_u_tilde,
    iteration_unitary,
    measure_computational,
    measure_pm,
    run_postselected_circuit,
)
from app.utils.formatting import format_fraction
from app.utils.logging import log_pipeline_event

HALF = Fraction(1, 2)
ERROR_BOUND = 0.3
RATIO_BOUND = 7 / 3
PER_RUN_BOUND = Fraction(25, 34)
COEQ_ACCEPT_BOUND = 0.8
TOLERANCE = 1e-9


def infer_space_bound(spec: MachineSpec, word: str, T: int) -> int:
    """One more than the largest work cell the machine visits within T steps."""
    distribution = MachineService.run_exhaustive(spec, word, T)
    return distribution.max_work_cell + 1


def prepare_decision(spec: MachineSpec, word: str, T: int, space_bound: Optional[int] = None) -> PreparedDecision:
    """Compile, lower and coherently run the circuit once; keep ũ."""
    space_bound = space_bound or infer_space_bound(spec, word, T)
    oracle = MachineService.run_exhaustive(spec, word, T, space_cap=space_bound)
    report = MachineService.check_canonical(spec, word, T)
    if not report.is_canonical:
        raise NotCanonicalError(f"machine not canonical at clock {T}: {report.violations[0].message}")

    space = ConfigurationSpace(spec, word, space_bound)
    circuit = lower_to_universal(CircuitCompiler(space, T).compile_blocks())
    state = run_postselected_circuit(circuit)
    u_tilde = extract_u_tilde(state)
    log_pipeline_event(
        "prepare-decision",
        machine=spec.name,
        input_word=word,
        T=T,
        A=format_fraction(oracle.p_acc),
        width=circuit.width,
    )
    return PreparedDecision(
        machine=spec.name,
        input_word=word,
        T=T,
        space_bound=space_bound,
        acceptance=oracle.p_acc,
        u_tilde=u_tilde,
        width=circuit.width,
        gates=len(circuit.gates),
    )


def iterate_u_p(u: StateVector, steps: int) -> StateVector:
    """Apply the post-selected diag(1, 2) iteration ``steps`` times."""
    gate = iteration_unitary()
    for _ in range(steps):
        u = apply_one_wire_operator(u, gate)
    return u


def _quadrant(u0: float, u1: float) -> str:
    if abs(u1) < 1e-15 or abs(u0) < 1e-15:
        return "axis"
    return "first" if (u0 > 0) == (u1 > 0) else "fourth"


def run_M_p(prepared: PreparedDecision, p: int) -> RunRecord:
    """One amplifier run: T - p iterations on ũ, then a ± measurement."""
    params = AmplifierParams(T=prepared.T, p=p)
    if params.p >= params.T:
        raise ValueError(f"p must lie in 0..{params.T - 1}")
    u = iterate_u_p(prepared.u_tilde, params.steps)
    p_plus, p_minus = measure_pm(u)
    u0, u1 = (float(value.real) for value in u.amplitudes)
    if abs(p_plus - p_minus) < 1e-12:
        outcome = None
    else:
        outcome = "+" if p_plus > p_minus else "-"
    return RunRecord(
        p=p,
        steps=params.steps,
        p_plus=p_plus,
        p_minus=p_minus,
        outcome=outcome,
        quadrant=_quadrant(u0, u1),
        log2_survival=u.log2_survival,
        u0=u0,
        u1=u1,
    )


def covering_p(acceptance: Fraction, T: int) -> Optional[int]:
    """The run whose iterated ratio lands in [1/4, 4], from A = A′/2^T."""
    numerator, degenerate = dyadic_numerator(acceptance, T)
    if degenerate:
        return None
    gap = abs(2 ** T - 2 * numerator)
    return gap.bit_length() - 2


def _sweep(prepared: PreparedDecision) -> List[RunRecord]:
    ps = list(range(prepared.T))
    if settings.SWEEP_WORKERS > 1:
        with ThreadPoolExecutor(max_workers=settings.SWEEP_WORKERS) as executor:
            return list(executor.map(lambda p: run_M_p(prepared, p), ps))
    return [run_M_p(prepared, p) for p in ps]


def _classify(counter: int, T: int) -> str:
    if counter == T:
        return "reject"
    if counter == -T:
        return "accept"
    return "nonpost"


def overall_decide(
    prepared: PreparedDecision,
    sample: Optional[int] = None,
    seed: Optional[int] = None,
) -> DecisionTrace:
    """Run M[0] … M[T-1] and post-select on unanimous outcomes.

    All ``+`` rejects, all ``-`` accepts, anything else is a nonpost outcome.

    Raises:
        UndefinedDecisionError: A = 1/2.
        AmplificationBoundError: the decision misses the 3/10 error bound or the 7/3 ratio.
    """
    acceptance = prepared.acceptance
    if acceptance == HALF:
        raise UndefinedDecisionError("undefined language decision: A = 1/2")

    records = _sweep(prepared)
    counter = sum(1 if record.outcome == "+" else -1 if record.outcome == "-" else 0 for record in records)
    p_allplus = math.prod(record.p_plus for record in records)
    p_allminus = math.prod(record.p_minus for record in records)
    p_acc = p_allminus / (p_allminus + p_allplus)
    p_rej = 1.0 - p_acc
    verdict = "accept" if p_acc > 0.5 else "reject"

    correct = "accept" if acceptance > HALF else "reject"
    error = p_rej if correct == "accept" else p_acc
    product_ratio = (p_allminus / p_allplus) if correct == "accept" else (p_allplus / p_allminus)
    if verdict != correct or error > ERROR_BOUND + TOLERANCE:
        raise AmplificationBoundError(
            f"decision error {error:.6g} exceeds {ERROR_BOUND} (A={format_fraction(acceptance)})"
        )
    if product_ratio < RATIO_BOUND - TOLERANCE:
        raise AmplificationBoundError(f"product ratio {product_ratio:.6g} below 7/3")

    sample_counts = {}
    if sample:
        rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
        sample_counts = {"accept": 0, "reject": 0, "nonpost": 0}
        plus = np.array([record.p_plus for record in records])
        for _ in range(sample):
            draws = rng.random(len(records)) < plus
            sweep_counter = int(np.sum(np.where(draws, 1, -1)))
            sample_counts[_classify(sweep_counter, prepared.T)] += 1

    trace = DecisionTrace(
        acceptance=acceptance,
        T=prepared.T,
        records=records,
        counter=counter,
        outcome=_classify(counter, prepared.T),
        p_allplus=p_allplus,
        p_allminus=p_allminus,
        p_acc=p_acc,
        p_rej=p_rej,
        verdict=verdict,
        product_ratio=product_ratio,
        covering_p=covering_p(acceptance, prepared.T),
        sample_counts=sample_counts,
    )
    log_pipeline_event(
        "decide",
        machine=prepared.machine,
        input_word=prepared.input_word,
        A=format_fraction(acceptance),
        verdict=verdict,
        p_acc=f"{p_acc:.6f}",
    )
    return trace


def _correct_side_probability(ratio: Fraction) -> Fraction:
    """Probability of the correct ± outcome for |u1|/u0 = ratio."""
    return (1 + ratio) ** 2 / (2 * (1 + ratio ** 2))


def verify_y_bounds(max_T: int = 6) -> BoundsReport:
    """Check the 25/34 bound numerically and by an exact scan over every dyadic A.

    For each clock T ≤ max_T and every A′ ≠ 2^(T-1), the covering run p gives
    |u1|/u0 in [1/4, 4], so its correct outcome has probability at least 25/34.
    """
    scale = 2 / math.sqrt(17)
    y = scale * np.array([0.5, 2.0])
    y_prime = scale * np.array([0.5, -2.0])
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    minus = np.array([1.0, -1.0]) / math.sqrt(2)
    y_plus = float(np.dot(y, plus) ** 2)
    y_prime_minus = float(np.dot(y_prime, minus) ** 2)

    scans = []
    for T in range(1, max_T + 1):
        failures = []
        minimum = Fraction(1)
        checked = 0
        for numerator in range(2 ** T + 1):
            if numerator == 2 ** (T - 1):
                continue
            checked += 1
            acceptance = Fraction(numerator, 2 ** T)
            p = covering_p(acceptance, T)
            steps = T - p
            u0 = HALF + acceptance
            u1 = 2 ** steps * (HALF - acceptance)
            correct = _correct_side_probability(abs(u1) / u0)
            minimum = min(minimum, correct)
            if not 0 <= p < T or correct < PER_RUN_BOUND:
                failures.append(numerator)
        scans.append(BoundScan(T=T, checked=checked, failures=failures, min_correct=minimum))

    bound = Fraction(25, 34)
    return BoundsReport(
        y_plus=y_plus,
        y_prime_minus=y_prime_minus,
        bound=bound,
        exceeds_seven_tenths=bound > Fraction(7, 10),
        scans=scans,
    )


def coeq_operator(T: int) -> np.ndarray:
    """Sends (1/2 + A, 1/2 - A) to (2A - 1, 2^-T)."""
    tail = 2.0 ** -T
    return np.array([[0.0, -2.0], [tail, tail]])


def coeq_recognize(prepared: PreparedDecision) -> CoeqResult:
    """Accept (measure |0>) iff A ≠ 1/2, under the promise A = 1/2 or |A - 1/2| ≥ 2^-T."""
    acceptance, T = prepared.acceptance, prepared.T
    if acceptance != HALF and abs(acceptance - HALF) < Fraction(1, 2 ** T):
        raise PromiseViolationError(
            f"A={format_fraction(acceptance)} lies strictly inside (1/2 - 2^-{T}, 1/2 + 2^-{T})"
        )
    gate = embed_nonunitary(coeq_operator(T), label="COEQ")
    u = apply_one_wire_operator(prepared.u_tilde, gate)
    p_acc, p_rej = measure_computational(u)

    if acceptance == HALF and p_acc > 1e-12:
        raise AmplificationBoundError(f"A = 1/2 accepted with probability {p_acc:.3g}")
    if acceptance != HALF and p_acc < COEQ_ACCEPT_BOUND - TOLERANCE:
        raise AmplificationBoundError(f"acceptance {p_acc:.6g} below 4/5")
    return CoeqResult(
        acceptance=acceptance,
        T=T,
        p_acc=p_acc,
        p_rej=p_rej,
        verdict="accept" if p_acc > 0.5 else "reject",
    )
