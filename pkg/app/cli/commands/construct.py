"""Machine-to-machine constructions."""

from app.cli.deps import load_machine, write_output
from app.cli.router import CommandRouter, arg
from app.core.config import settings
from app.schemas.run_config import CONSTRUCTIONS, CommandResult, RunConfig
from app.services.construction_service import (
    combine_ntms_zero_error,
    postptm_to_ntm,
    postselect_to_restart,
    postselect_to_unbounded,
    restart_semantics_exact,
)
from app.services.machine_file_service import format_machine_file
from app.services.machine_service import MachineService
from app.utils.formatting import format_report

router = CommandRouter()


@router.command(
    "construct",
    help="Build a derived machine from a post-selecting one",
    arguments=[
        arg("construction", choices=list(CONSTRUCTIONS)),
        arg("machine", metavar="MACHINE"),
        arg("machine2", metavar="MACHINE2", nargs="?"),
        arg("--input", dest="input_word", help="input for the restart semantics"),
        arg("--corpus", action="append", help="promise-check input (repeatable)"),
        arg("--budget", type=int, help="step budget for episodes and promise checks"),
        arg("-o", "--output", help="write the machine file here"),
    ],
)
def construct(config: RunConfig) -> CommandResult:
    spec = load_machine(config.machine)
    budget = config.budget or settings.DEFAULT_STEP_BUDGET

    if config.construction == "unbounded":
        built = postselect_to_unbounded(spec)
        summary = format_report([("machine", built.name), ("states", len(built.states))])
        return write_output(format_machine_file(built), config.output, summary)

    if config.construction == "restart":
        machine = postselect_to_restart(spec, budget)
        semantics = restart_semantics_exact(machine, config.input_word)
        original = MachineService.run_exhaustive(spec, config.input_word, budget)
        postselected, _ = MachineService.postselect_normalize(original)
        report = format_report([
            ("machine", machine.base.name),
            ("limit_acc", semantics.limit_acc),
            ("limit_rej", semantics.limit_rej),
            ("postselected_acc", postselected),
            ("agrees", semantics.limit_acc == postselected),
            ("halting_per_episode", semantics.halting_per_episode),
            ("expected_episode_length", semantics.expected_episode_length),
            ("expected_steps", semantics.expected_steps),
        ])
        if config.output:
            return write_output(format_machine_file(machine.base), config.output, report)
        return CommandResult(report=report)

    if config.construction == "combine":
        second = load_machine(config.machine2)
        built = combine_ntms_zero_error(spec, second, corpus=config.corpus, step_budget=budget)
    else:
        built = postptm_to_ntm(spec)
    summary = format_report([("machine", built.name), ("states", len(built.states))])
    return write_output(format_machine_file(built), config.output, summary)
