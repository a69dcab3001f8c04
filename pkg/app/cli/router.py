"""Command registration for the command line front end."""

from typing import Any, Callable, Dict, List, Optional, Tuple

from app.schemas.run_config import CommandResult, RunConfig

Handler = Callable[[RunConfig], CommandResult]


class Argument:
    """Positional or optional argument forwarded to ``add_argument``."""

    def __init__(self, *flags: str, **options: Any):
        self.flags = flags
        self.options = options


def arg(*flags: str, **options: Any) -> Argument:
    return Argument(*flags, **options)


class Command:
    def __init__(self, name: str, handler: Handler, help: str, arguments: List[Argument]):
        self.name = name
        self.handler = handler
        self.help = help
        self.arguments = arguments


class CommandRouter:
    """Collects commands declared with the ``command`` decorator."""

    def __init__(self):
        self.commands: List[Command] = []

    def command(self, name: str, help: str = "", arguments: Optional[List[Argument]] = None):
        def decorator(handler: Handler) -> Handler:
            self.commands.append(Command(name, handler, help, list(arguments or [])))
            return handler

        return decorator


class CommandRegistry:
    """Every included command, keyed by name, plus the argparse wiring."""

    def __init__(self):
        self.commands: Dict[str, Command] = {}

    def include_router(self, router: CommandRouter):
        for command in router.commands:
            if command.name in self.commands:
                raise ValueError(f"command {command.name!r} registered twice")
            self.commands[command.name] = command

    def add_subparsers(self, parser) -> None:
        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
        subparsers.required = True
        for command in self.commands.values():
            subparser = subparsers.add_parser(command.name, help=command.help, description=command.help)
            for argument in command.arguments:
                subparser.add_argument(*argument.flags, **argument.options)

    def handler(self, name: str) -> Handler:
        return self.commands[name].handler

    def names(self) -> Tuple[str, ...]:
        return tuple(self.commands)
