"""opnet.cli.commands"""
from .command import CliCommand
from .evaluate import EvalCommand
from .process import ProcessOpCommand
from .reverse import ReverseCommand
from .sample import SampleCommand
from .signal import SignalCommand
from .validate import ValidateCommand

__all__ = (
    "CliCommand",
    "EvalCommand",
    "ProcessOpCommand",
    "ReverseCommand",
    "SampleCommand",
    "SignalCommand",
    "ValidateCommand",
)
