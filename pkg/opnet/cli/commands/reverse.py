"""reverse command"""
import argparse
import logging
from pathlib import Path
from typing import TextIO

import attr

from opnet.core.symmetry import reverse_circuit
from opnet.models.decompose import (
    chain_document,
    chain_from_document,
    dump_document,
    read_document,
)
from opnet.models.schemas import NetworkDocument
from opnet.models.symmetry import SymmetryTransform

from .command import CliCommand

logger = logging.getLogger(__name__)


@attr.s
class ReverseCommand(CliCommand):
    """time-reversed chain document"""

    name = "reverse"
    help = "write the time-reversed circuit of a chain document"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """output file"""
        parser.add_argument("--out", default=None, help="output file (default: stdout)")

    def run(self, args: argparse.Namespace, out: TextIO) -> int:
        """reverse every operation, using the wire S of each cut"""
        doc = read_document(args.path, NetworkDocument)
        chain = chain_from_document(doc)
        prep, *middles, meas = chain.operations
        transforms = [SymmetryTransform.time_reversal(s, dim=s.shape[0]) for s in chain.cuts]
        r_prep, r_middles, r_meas = reverse_circuit(prep, middles, meas, transforms)
        reversed_doc = chain_document(doc, chain, [r_prep, *r_middles, r_meas])
        logger.info("reversed a chain of %d operations", len(chain.operations))

        text = dump_document(reversed_doc) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            out.write(text)
        return 0
