"""Machine commands: validation, the exact oracle and canonical form."""

from app.cli.deps import load_machine, write_output
from app.cli.router import CommandRouter, arg
from app.schemas.run_config import CommandResult, RunConfig
from app.services.canonicalize_service import canonicalize
from app.services.machine_file_service import format_machine_file
from app.services.machine_service import MachineService
from app.utils.formatting import format_fraction, format_report

router = CommandRouter()

MACHINE = arg("machine", metavar="MACHINE", help="machine description file")
INPUT = arg("input_word", metavar="INPUT", help="input word (may be empty)")


@router.command(
    "validate",
    help="Check a machine file for well-formedness",
    arguments=[
        MACHINE,
        arg("--compile", action="store_true", default=None, help="apply the compilation restrictions"),
    ],
)
def validate(config: RunConfig) -> CommandResult:
    spec = load_machine(config.machine)
    findings = MachineService.validate_well_formed(spec, for_compilation=True if config.compile else None)
    lines = format_report([
        ("machine", spec.name),
        ("kind", spec.kind.value),
        ("states", len(spec.states)),
        ("well_formed", not findings),
    ]).splitlines()
    lines.extend(f"finding={finding.tag}: {finding.message}" for finding in findings)
    return CommandResult(report="\n".join(lines), exit_code=1 if findings else 0)


@router.command(
    "oracle",
    help="Exact outcome distribution over every computation path",
    arguments=[
        MACHINE,
        INPUT,
        arg("--budget", type=int, required=True, help="step budget"),
        arg("--strategy", choices=["propagate", "dfs"], default="propagate"),
    ],
)
def oracle(config: RunConfig) -> CommandResult:
    spec = load_machine(config.machine)
    distribution = MachineService.run_exhaustive(spec, config.input_word, config.budget, strategy=config.strategy)
    pairs = [
        ("p_acc", distribution.p_acc),
        ("p_rej", distribution.p_rej),
        ("p_npost", distribution.p_npost),
        ("p_nonhalt", distribution.p_nonhalt),
        ("max_work_cell", distribution.max_work_cell),
    ]
    if distribution.p_nonhalt == 0 and distribution.halting_mass > 0:
        accept, reject = MachineService.postselect_normalize(distribution)
        pairs += [("postselected_acc", accept), ("postselected_rej", reject)]
    lines = format_report(pairs).splitlines()
    lines.extend(f"halt@{step}={format_fraction(mass)}" for step, mass in distribution.halting_time.items())
    return CommandResult(report="\n".join(lines))


@router.command(
    "check",
    help="Check the canonical form at clock T",
    arguments=[MACHINE, INPUT, arg("--T", dest="T", type=int, required=True, help="clock")],
)
def check(config: RunConfig) -> CommandResult:
    spec = load_machine(config.machine)
    report = MachineService.check_canonical(spec, config.input_word, config.T)
    lines = [f"canonical={'true' if report.is_canonical else 'false'}"]
    lines.extend(f"violation={finding.tag}: {finding.message}" for finding in report.violations)
    return CommandResult(report="\n".join(lines), exit_code=0 if report.is_canonical else 1)


@router.command(
    "canonicalize",
    help="Rewrite a PTM into canonical form halting at exactly T",
    arguments=[
        MACHINE,
        arg("--T", dest="T", type=int, required=True, help="clock"),
        arg("--space", dest="space_bound", type=int, required=True, help="work cells of the original machine"),
        arg("--probe", dest="probes", action="append", help="probe input (repeatable)"),
        arg("-o", "--output", help="write the machine file here"),
    ],
)
def canonicalize_machine(config: RunConfig) -> CommandResult:
    spec = load_machine(config.machine)
    canonical = canonicalize(spec, config.T, config.space_bound, probe_inputs=config.probes)
    summary = format_report([("machine", canonical.name), ("states", len(canonical.states)), ("T", config.T)])
    return write_output(format_machine_file(canonical), config.output, summary)
