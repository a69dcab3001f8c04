"""Shared helpers for command handlers."""

from pathlib import Path
from typing import Optional

from app.core.errors import PostselectError
from app.schemas.machine import MachineSpec
from app.schemas.run_config import CommandResult, RunConfig
from app.services import machine_file_service
from app.services.amplification_service import infer_space_bound


def load_machine(path: str) -> MachineSpec:
    """Parse a machine file, turning a missing file into a domain error."""
    try:
        return machine_file_service.load_machine(path)
    except OSError as error:
        raise PostselectError(f"cannot read machine file {path}: {error.strerror}")


def resolve_space_bound(config: RunConfig, spec: MachineSpec) -> int:
    if config.space_bound is not None:
        return config.space_bound
    return infer_space_bound(spec, config.input_word, config.T)


def write_output(text: str, output: Optional[str], summary: str) -> CommandResult:
    """Write ``text`` to ``output`` when given (reporting ``summary``), else report ``text``."""
    if output is None:
        return CommandResult(report=text.rstrip("\n"))
    Path(output).write_text(text)
    return CommandResult(report=f"{summary}\noutput={output}")
