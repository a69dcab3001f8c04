"""Configuration space and probabilistic circuit commands."""

from fractions import Fraction

from app.cli.deps import load_machine, resolve_space_bound, write_output
from app.cli.router import CommandRouter, arg
from app.schemas.circuit import ProbCircuit
from app.schemas.machine import MachineSpec
from app.schemas.run_config import CommandResult, RunConfig
from app.services.circuit_service import CircuitCompiler, format_circuit, simulate_prob_circuit_exact
from app.services.config_space_service import (
    ConfigurationSpace,
    build_configuration_matrix,
    format_configurations,
    format_matrix,
)
from app.services.lowering_service import lower_to_universal
from app.services.machine_service import MachineService
from app.utils.formatting import format_fraction, format_report

router = CommandRouter()

MACHINE = arg("machine", metavar="MACHINE", help="machine description file")
INPUT = arg("input_word", metavar="INPUT", help="input word (may be empty)")
CLOCK = arg("--T", dest="T", type=int, required=True, help="clock")
SPACE = arg("--space", dest="space_bound", type=int, help="work cells (inferred from the oracle when omitted)")
OUTPUT = arg("-o", "--output", help="write the dump here")


def oracle_acceptance(spec: MachineSpec, config: RunConfig, space_bound: int) -> Fraction:
    return MachineService.run_exhaustive(spec, config.input_word, config.T, space_cap=space_bound).p_acc


def build_circuit(config: RunConfig, lowered: bool) -> tuple:
    """(circuit with a provenance header, A, space bound)."""
    spec = load_machine(config.machine)
    space_bound = resolve_space_bound(config, spec)
    acceptance = oracle_acceptance(spec, config, space_bound)
    circuit: ProbCircuit = CircuitCompiler(ConfigurationSpace(spec, config.input_word, space_bound), config.T).compile_blocks()
    if lowered:
        circuit = lower_to_universal(circuit)
    header = f"machine={spec.name} input={config.input_word} T={config.T} A={format_fraction(acceptance)}"
    return circuit.model_copy(update={"header": header}), acceptance, space_bound


def _circuit_dump(config: RunConfig, lowered: bool) -> CommandResult:
    circuit, acceptance, space_bound = build_circuit(config, lowered)
    summary = format_report([
        ("A", acceptance),
        ("width", circuit.width),
        ("gates", len(circuit.gates)),
        ("space", space_bound),
    ])
    return write_output(format_circuit(circuit), config.output, summary)


@router.command(
    "compile",
    help="Compile a canonical PTM into a probabilistic circuit",
    arguments=[MACHINE, INPUT, CLOCK, SPACE, OUTPUT],
)
def compile_circuit(config: RunConfig) -> CommandResult:
    return _circuit_dump(config, lowered=False)


@router.command(
    "lower",
    help="Compile and lower to COIN, NOT, AND, OR and RESET gates",
    arguments=[MACHINE, INPUT, CLOCK, SPACE, OUTPUT],
)
def lower_circuit(config: RunConfig) -> CommandResult:
    return _circuit_dump(config, lowered=True)


@router.command(
    "simulate",
    help="Exact simulation of the compiled circuit",
    arguments=[
        MACHINE,
        INPUT,
        CLOCK,
        SPACE,
        arg("--unlowered", action="store_true", default=None, help="simulate before lowering"),
    ],
)
def simulate(config: RunConfig) -> CommandResult:
    circuit, acceptance, _ = build_circuit(config, lowered=not config.unlowered)
    distribution = simulate_prob_circuit_exact(circuit)
    decision = distribution.wire_probability(0)
    report = format_report([
        ("A", acceptance),
        ("p_wire0", decision),
        ("agrees", decision == acceptance),
        ("width", circuit.width),
        ("gates", len(circuit.gates)),
        ("lowered", not config.unlowered),
    ])
    return CommandResult(report=report, exit_code=0 if decision == acceptance else 1)


@router.command(
    "dump",
    help="Dump the configuration matrix or the configuration list",
    arguments=[
        arg("target", choices=["matrix", "configs"]),
        MACHINE,
        INPUT,
        arg("--space", dest="space_bound", type=int, required=True, help="work cells"),
        OUTPUT,
    ],
)
def dump(config: RunConfig) -> CommandResult:
    spec = load_machine(config.machine)
    matrix = build_configuration_matrix(spec, config.input_word, config.space_bound)
    text = format_matrix(matrix) if config.target == "matrix" else format_configurations(matrix)
    return write_output(text, config.output, format_report([("N", matrix.dimension)]))
