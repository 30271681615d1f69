"""base cli command"""
import abc
import argparse
from typing import TextIO

import attr


@attr.s
class CliCommand(abc.ABC):
    """orchestration for cli commands"""

    name: str = ""
    help: str = ""

    def register(self, subparsers) -> None:
        """register command with the application parser"""
        parser = subparsers.add_parser(self.name, help=self.help, description=self.help)
        parser.add_argument("path", help="network or process operator document")
        self.add_arguments(parser)
        parser.set_defaults(command=self)

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """command specific arguments"""
        ...

    @abc.abstractmethod
    def run(self, args: argparse.Namespace, out: TextIO) -> int:
        """execute the command, returning the exit code"""
        ...
