"""Coherent simulation and amplified decision commands."""

from fractions import Fraction

from app.cli.commands.circuit import build_circuit
from app.cli.deps import load_machine
from app.cli.router import CommandRouter, arg
from app.schemas.decision import PreparedDecision, RunRecord
from app.schemas.run_config import CommandResult, RunConfig
from app.services.amplification_service import (
    coeq_recognize,
    overall_decide,
    prepare_decision,
    run_M_p,
    verify_y_bounds,
)
from app.services.quantum_service import decision_wire_amplitudes, extract_u_tilde, format_state, run_postselected_circuit
from app.utils.formatting import format_inline, format_report

router = CommandRouter()

MACHINE = arg("machine", metavar="MACHINE", help="machine description file")
INPUT = arg("input_word", metavar="INPUT", help="input word (may be empty)")
CLOCK = arg("--T", dest="T", type=int, required=True, help="clock")
SPACE = arg("--space", dest="space_bound", type=int, help="work cells (inferred from the oracle when omitted)")

HALF = Fraction(1, 2)


def _prepare(config: RunConfig) -> PreparedDecision:
    spec = load_machine(config.machine)
    return prepare_decision(spec, config.input_word, config.T, config.space_bound)


def _record_pairs(record: RunRecord) -> list:
    return [
        ("p", record.p),
        ("steps", record.steps),
        ("P_plus", record.p_plus),
        ("P_minus", record.p_minus),
        ("outcome", record.outcome or "none"),
        ("quadrant", record.quadrant),
    ]


@router.command(
    "quantum-run",
    help="Run the lowered circuit as a post-selected quantum circuit",
    arguments=[
        MACHINE,
        INPUT,
        CLOCK,
        SPACE,
        arg("--dump-state", dest="dump_state", action="store_true", default=None, help="append the final state"),
    ],
)
def quantum_run(config: RunConfig) -> CommandResult:
    circuit, acceptance, _ = build_circuit(config, lowered=True)
    state = run_postselected_circuit(circuit)
    first, second, outside = decision_wire_amplitudes(state)
    u_tilde = extract_u_tilde(state)
    weight = abs(first) + abs(second)
    report = format_report([
        ("A", acceptance),
        ("wires", state.n_wires),
        ("gates", len(circuit.gates)),
        ("log2_survival", state.log2_survival),
        ("amplitude_wire0", abs(second) / weight),
        ("outside_mass", outside),
        ("u_ratio", u_tilde.ratio()),
        ("expected_ratio", float((HALF - acceptance) / (HALF + acceptance))),
    ])
    if config.dump_state:
        report = report + "\n" + format_state(state).rstrip("\n")
    return CommandResult(report=report)


@router.command(
    "amplify",
    help="One amplifier run M[p]",
    arguments=[MACHINE, INPUT, CLOCK, arg("--p", dest="p", type=int, required=True), SPACE],
)
def amplify(config: RunConfig) -> CommandResult:
    prepared = _prepare(config)
    record = run_M_p(prepared, config.p)
    report = format_report([("A", prepared.acceptance), ("T", prepared.T)] + _record_pairs(record))
    return CommandResult(report=report)


@router.command(
    "decide",
    help="Sweep M[0..T-1] and post-select on unanimous outcomes",
    arguments=[
        MACHINE,
        INPUT,
        CLOCK,
        SPACE,
        arg("--sample", type=int, help="draw this many seeded sweeps"),
        arg("--seed", type=int, help="seed for --sample"),
    ],
)
def decide(config: RunConfig) -> CommandResult:
    prepared = _prepare(config)
    trace = overall_decide(prepared, sample=config.sample, seed=config.seed)
    lines = [format_inline([
        ("A", trace.acceptance),
        ("T", trace.T),
        ("C", trace.counter),
        ("P_allplus", trace.p_allplus),
        ("P_allminus", trace.p_allminus),
        ("p_acc", trace.p_acc),
        ("verdict", trace.verdict),
    ])]
    lines.extend(format_inline(_record_pairs(record)) for record in trace.records)
    lines.append(format_inline([
        ("outcome", trace.outcome),
        ("covering_p", "none" if trace.covering_p is None else trace.covering_p),
        ("product_ratio", trace.product_ratio),
    ]))
    if trace.sample_counts:
        lines.append(format_inline([(f"sampled_{key}", value) for key, value in trace.sample_counts.items()]))
    return CommandResult(report="\n".join(lines))


@router.command(
    "verify-bounds",
    help="Check the per-run 25/34 bound numerically and over every dyadic acceptance",
    arguments=[arg("--max-T", dest="max_T", type=int, default=6)],
)
def verify_bounds(config: RunConfig) -> CommandResult:
    bounds = verify_y_bounds(config.max_T)
    lines = format_report([
        ("y_plus", bounds.y_plus),
        ("y_prime_minus", bounds.y_prime_minus),
        ("bound", bounds.bound),
        ("exceeds_seven_tenths", bounds.exceeds_seven_tenths),
    ]).splitlines()
    lines.extend(
        format_inline([
            ("T", scan.T),
            ("checked", scan.checked),
            ("failures", len(scan.failures)),
            ("min_correct", scan.min_correct),
        ])
        for scan in bounds.scans
    )
    lines.append(format_report([("holds", bounds.holds)]))
    return CommandResult(report="\n".join(lines), exit_code=0 if bounds.holds else 1)


@router.command(
    "coeq",
    help="One-sided recognizer for acceptance different from 1/2",
    arguments=[MACHINE, INPUT, CLOCK, SPACE],
)
def coeq(config: RunConfig) -> CommandResult:
    result = coeq_recognize(_prepare(config))
    report = format_report([
        ("A", result.acceptance),
        ("T", result.T),
        ("p_acc", result.p_acc),
        ("p_rej", result.p_rej),
        ("verdict", result.verdict),
    ])
    return CommandResult(report=report)
