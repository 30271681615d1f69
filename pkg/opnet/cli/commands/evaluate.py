"""eval command"""
import argparse
import json
import logging
from typing import TextIO

import attr

from opnet.core.network import evaluate_network
from opnet.models.decompose import network_from_document, read_document
from opnet.models.operations import OutcomeDistribution
from opnet.models.schemas import NetworkDocument

from .command import CliCommand

logger = logging.getLogger(__name__)


def format_distribution(dist: OutcomeDistribution, as_json: bool = False) -> str:
    """outcome tuples in lexicographic order with 12 decimal probabilities"""
    if as_json:
        entries = [
            {"outcome": list(key), "p": float(f"{p:.12g}")} for key, p in dist.items()
        ]
        doc = {"names": list(dist.names), "probabilities": entries}
        return json.dumps(doc, indent=2) + "\n"
    lines = ["\t".join([*dist.names, "p"])]
    lines += ["\t".join([*key, f"{p:.12g}"]) for key, p in dist.items()]
    return "\n".join(lines) + "\n"


@attr.s
class EvalCommand(CliCommand):
    """joint outcome distribution of a closed network"""

    name = "eval"
    help = "evaluate the joint outcome distribution of a closed network"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """output format and null tolerance"""
        fmt = parser.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="print json")
        fmt.add_argument("--table", action="store_true", help="print a table (default)")
        parser.add_argument(
            "--tol", type=float, default=None, help="zero-denominator tolerance"
        )

    def run(self, args: argparse.Namespace, out: TextIO) -> int:
        """print the distribution"""
        net = network_from_document(read_document(args.path, NetworkDocument))
        dist = evaluate_network(net)
        logger.info("evaluated %d outcome tuples", len(dist))
        out.write(format_distribution(dist, as_json=args.json))
        return 0
