"""process-op command"""
import argparse
import logging
from pathlib import Path
from typing import TextIO

import attr

from opnet.core.network import (
    evaluate_network,
    probabilities_from_process,
    process_operator_for,
)
from opnet.errors import InvariantError, LayoutError
from opnet.models.decompose import (
    dump_document,
    network_from_document,
    process_to_document,
    read_document,
)
from opnet.models.schemas import NetworkDocument

from .command import CliCommand

logger = logging.getLogger(__name__)

# agreement required between the process operator route and direct evaluation
CROSS_CHECK_TOLERANCE = 1e-9


@attr.s
class ProcessOpCommand(CliCommand):
    """process operator of selected nodes"""

    name = "process-op"
    help = "extract the process operator of the selected nodes"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """selection and output file"""
        parser.add_argument(
            "--select", nargs="+", default=None, help="node ids (default: document selections)"
        )
        parser.add_argument("--out", default=None, help="output file (default: stdout)")

    def run(self, args: argparse.Namespace, out: TextIO) -> int:
        """write W, cross-checked against the network distribution"""
        doc = read_document(args.path, NetworkDocument)
        selected = args.select if args.select is not None else doc.selections
        if not selected:
            raise LayoutError("no nodes selected")
        net = network_from_document(doc)
        w = process_operator_for(net, selected)

        names = sorted(set(selected))
        via_w = probabilities_from_process(w, [net.nodes[n] for n in names], names)
        direct = evaluate_network(net)
        marginal = direct.marginal([direct.names.index(n) for n in names])
        deviation = via_w.max_abs_difference(marginal)
        if deviation > CROSS_CHECK_TOLERANCE:
            raise InvariantError(
                f"process operator probabilities deviate by {deviation:.3e} from the network"
            )
        logger.info("process operator on %d ports, cross-check %.3e", len(w.layout), deviation)

        text = dump_document(process_to_document(w)) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            out.write(text)
        return 0
