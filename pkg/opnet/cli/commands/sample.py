"""sample command"""
import argparse
from typing import TextIO

import attr

from opnet.core.network import sample_outcomes
from opnet.models.decompose import network_from_document, read_document
from opnet.models.schemas import NetworkDocument

from .command import CliCommand


@attr.s
class SampleCommand(CliCommand):
    """reproducible outcome samples"""

    name = "sample"
    help = "draw outcome tuples from the network distribution"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """seed and count"""
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--count", type=int, default=1)

    def run(self, args: argparse.Namespace, out: TextIO) -> int:
        """one tab separated tuple per line"""
        net = network_from_document(read_document(args.path, NetworkDocument))
        for outcome in sample_outcomes(net, args.seed, args.count):
            out.write("\t".join(outcome) + "\n")
        return 0
