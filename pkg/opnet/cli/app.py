"""command line application"""
import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence, TextIO, Type

import attr

from opnet.cli.commands import (
    EvalCommand,
    ProcessOpCommand,
    ReverseCommand,
    SampleCommand,
    SignalCommand,
    ValidateCommand,
)
from opnet.cli.commands.command import CliCommand
from opnet.config import OpnetSettings, inject_settings
from opnet.errors import DEFAULT_EXIT_CODES, exception_handler_factory, exit_code_for

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def default_commands() -> List[CliCommand]:
    return [
        ValidateCommand(),
        EvalCommand(),
        ProcessOpCommand(),
        ReverseCommand(),
        SignalCommand(),
        SampleCommand(),
    ]


@attr.s
class OpnetCli:
    """OpnetCli"""

    settings: OpnetSettings = attr.ib(default=attr.Factory(OpnetSettings))
    commands: List[CliCommand] = attr.ib(default=attr.Factory(default_commands))
    exceptions: Dict[Type[Exception], int] = attr.ib(
        default=attr.Factory(lambda: DEFAULT_EXIT_CODES)
    )
    parser: argparse.ArgumentParser = attr.ib(init=False)

    def get_command(self, name: str) -> Optional[CliCommand]:
        """look up a registered command"""
        for command in self.commands:
            if command.name == name:
                return command
        return None

    def configure_logging(self, verbosity: int):
        """root log level from the settings, raised by -v flags"""
        level = logging.getLevelName(self.settings.log_level.upper())
        if verbosity == 1:
            level = min(level, logging.INFO)
        elif verbosity > 1:
            level = logging.DEBUG
        logging.basicConfig(format=LOG_FORMAT)
        logging.getLogger().setLevel(level)

    def run(
        self, argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None
    ) -> int:
        """parse arguments and run a command, returning the exit code"""
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0)
        self.configure_logging(args.verbose)

        tol = getattr(args, "tol", None)
        settings = self.settings
        if tol is not None:
            settings = settings.copy(update={"null_tolerance": tol})
        inject_settings(settings)
        logger.debug("running %s", args.command_name)
        try:
            return args.command.run(args, out if out is not None else sys.stdout)
        except Exception as exc:
            handler = exception_handler_factory(exit_code_for(exc, self.exceptions))
            return handler(exc)
        finally:
            inject_settings(self.settings)

    def __attrs_post_init__(self):
        """post-init hook"""
        inject_settings(self.settings)

        self.parser = argparse.ArgumentParser(
            prog="opnet", description="operations and networks without predefined time"
        )
        self.parser.add_argument(
            "-v", "--verbose", action="count", default=0, help="more logging (-vv for debug)"
        )
        subparsers = self.parser.add_subparsers(dest="command_name", metavar="command")
        subparsers.required = True
        # register commands
        for command in self.commands:
            command.register(subparsers)


def run_cli(argv: Optional[Sequence[str]] = None) -> None:
    """console script entry point"""
    sys.exit(OpnetCli().run(argv))
