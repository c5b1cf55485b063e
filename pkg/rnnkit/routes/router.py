"""A small subcommand router over argparse."""
import argparse
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from rnnkit.exceptions import ArgumentError

Handler = Callable[[argparse.Namespace], int]


class UsageError(ArgumentError):
    """The command line itself is malformed."""

    kind = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def arg(*flags, **options) -> Tuple[tuple, dict]:
    """Collect add_argument parameters for a route."""
    return flags, options


@dataclass
class Route:
    name: str
    help: str
    handler: Handler
    arguments: List[Tuple[tuple, dict]] = field(default_factory=list)


class CommandRouter:
    """Register subcommands with a decorator and build one parser from them."""

    def __init__(self, prog: str, description: str = ""):
        self.prog = prog
        self.description = description
        self.routes: Dict[str, Route] = {}
        self.shared: List[Tuple[tuple, dict]] = []

    def command(self, name: str, help: str, arguments: Sequence[Tuple[tuple, dict]] = ()):
        def register(handler: Handler) -> Handler:
            self.routes[name] = Route(name, help, handler, list(arguments))
            return handler

        return register

    def build_parser(self) -> argparse.ArgumentParser:
        parser = _Parser(prog=self.prog, description=self.description)
        for flags, options in self.shared:
            parser.add_argument(*flags, **options)
        sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
        sub.required = True
        for route in self.routes.values():
            child = sub.add_parser(route.name, help=route.help, description=route.help)
            for flags, options in self.shared:
                child.add_argument(*flags, **{**options, "default": argparse.SUPPRESS})
            for flags, options in route.arguments:
                child.add_argument(*flags, **options)
            child.set_defaults(handler=route.handler)
        return parser

    def parse(self, argv: Optional[Sequence[str]]) -> argparse.Namespace:
        return self.build_parser().parse_args(argv)
