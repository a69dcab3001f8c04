"""Command line entry point."""

import argparse
import sys
import time
from typing import List, Optional

from pydantic import ValidationError

from app.cli.commands import circuit, construct, machine, quantum
from app.cli.router import CommandRegistry
from app.core.config import settings
from app.core.errors import PostselectError
from app.schemas.run_config import CommandResult, RunConfig
from app.utils.logging import log_command, log_error, setup_logging

registry = CommandRegistry()
registry.include_router(machine.router)
registry.include_router(circuit.router)
registry.include_router(quantum.router)
registry.include_router(construct.router)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=settings.PROJECT_NAME, description=settings.DESCRIPTION)
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    registry.add_subparsers(parser)
    return parser


def _validation_message(error: ValidationError) -> str:
    return "; ".join(str(item["msg"]).removeprefix("Value error, ") for item in error.errors())


def execute(config: RunConfig) -> CommandResult:
    """Dispatch a validated configuration to its command handler."""
    return registry.handler(config.command)(config)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns 0 on success, 1 on domain errors and 2 on usage errors."""
    setup_logging()
    started = time.perf_counter()
    parser = build_parser()

    try:
        namespace = parser.parse_args(argv)
    except SystemExit as exit_request:
        return exit_request.code if isinstance(exit_request.code, int) else 2

    values = {key: value for key, value in vars(namespace).items() if value is not None}
    command = values.get("command", "")
    try:
        config = RunConfig(**values)
    except ValidationError as error:
        message = _validation_message(error)
        log_error("Invalid arguments", message)
        print(f"{parser.prog} {command}: error: {message}", file=sys.stderr)
        return 2

    try:
        result = execute(config)
    except PostselectError as error:
        log_error(error.message, type(error).__name__, machine=config.machine, input_word=config.input_word)
        print(f"error: {error.message}", file=sys.stderr)
        exit_code = 1
    else:
        print(result.report)
        exit_code = result.exit_code

    log_command(command, exit_code, (time.perf_counter() - started) * 1000)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
