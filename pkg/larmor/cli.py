"""Shared CLI utilities for larmor commands."""

import sys
from dataclasses import dataclass, field
from typing import Any, Callable

from larmor.errors import EXIT_USAGE, DomainError, LarmorError


class UsageError(LarmorError):
    """Unknown command or option, or an option missing its value."""

    exit_code = EXIT_USAGE


@dataclass
class Command:
    """A CLI subcommand."""
    name: str
    help: str


@dataclass
class Option:
    """A CLI option."""
    name: str
    help: str
    takes_value: bool = True
    dest: str | None = None
    convert: Callable[[str], Any] = str
    metavar: str = "VALUE"

    @property
    def key(self) -> str:
        return self.dest or self.name.replace("-", "_")


@dataclass
class CLI:
    """Simple CLI framework for consistent command structure."""
    name: str
    description: str
    commands: list[Command] = field(default_factory=list)
    options: list[Option] = field(default_factory=list)
    examples: list[str] = field(default_factory=list)
    aliases: dict[str, str] = field(default_factory=dict)

    def add_command(self, name: str, help: str) -> "CLI":
        """Add a subcommand to the CLI."""
        self.commands.append(Command(name, help))
        return self

    def add_option(
        self,
        name: str,
        help: str,
        takes_value: bool = True,
        dest: str | None = None,
        convert: Callable[[str], Any] = str,
        metavar: str = "VALUE",
    ) -> "CLI":
        """Add an option to the CLI."""
        self.options.append(Option(name, help, takes_value, dest, convert, metavar))
        return self

    def add_example(self, example: str) -> "CLI":
        """Add an example to the CLI."""
        self.examples.append(example)
        return self

    def print_usage(self) -> None:
        """Print usage information."""
        print(f"Usage: {self.name} <command> [options]", file=sys.stderr)
        print()
        print(self.description)
        print()
        print("Commands:")
        for cmd in self.commands:
            print(f"  {cmd.name:<18}{cmd.help}")
        print()
        if self.options:
            print("Options:")
            for opt in self.options:
                flag = f"--{opt.name} {opt.metavar}" if opt.takes_value else f"--{opt.name}"
                print(f"  {flag:<26}{opt.help}")
            print()
        if self.examples:
            print("Examples:")
            for ex in self.examples:
                print(f"  {self.name} {ex}")

    def parse_args(self, argv: list[str]) -> tuple[str, dict[str, Any]]:
        """Parse command line arguments.

        Returns:
            Tuple of (command name, options dict keyed by option dest)

        Raises:
            UsageError: unknown command/option or missing option value
            DomainError: an option value that does not convert, naming the option
        """
        if not argv:
            raise UsageError("no command given")

        command = self.aliases.get(argv[0], argv[0])
        if command not in {cmd.name for cmd in self.commands}:
            raise UsageError(f"Unknown command: {argv[0]}")

        opts: dict[str, Any] = {}
        args = argv[1:]
        i = 0
        while i < len(args):
            arg = args[i]
            if not arg.startswith("--"):
                raise UsageError(f"Unexpected argument: {arg}")
            opt_name = arg[2:]
            opt = next((o for o in self.options if o.name == opt_name), None)
            if opt is None:
                raise UsageError(f"Unknown option: {arg}")
            if opt.takes_value:
                if i + 1 >= len(args):
                    raise UsageError(f"Option --{opt_name} requires a value")
                raw = args[i + 1]
                try:
                    opts[opt.key] = opt.convert(raw)
                except ValueError as e:
                    raise DomainError(opt_name, f"cannot parse {raw!r}") from e
                i += 2
            else:
                opts[opt.key] = True
                i += 1

        return command, opts
