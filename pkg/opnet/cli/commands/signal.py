"""signal command"""
import argparse
import logging
from typing import TextIO

import attr

from opnet.core.causal import signaling_strength
from opnet.models.decompose import (
    families_from_document,
    process_from_document,
    read_document,
)
from opnet.models.schemas import FamiliesDocument, ProcessOperatorDocument

from .command import CliCommand

logger = logging.getLogger(__name__)


@attr.s
class SignalCommand(CliCommand):
    """directional signaling strengths of a process operator"""

    name = "signal"
    help = "signaling strength between the parties of a process operator"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """families document"""
        parser.add_argument("--families", required=True, help="operation families document")

    def run(self, args: argparse.Namespace, out: TextIO) -> int:
        """print one line per ordered party pair"""
        w = process_from_document(read_document(args.path, ProcessOperatorDocument))
        parties, families = families_from_document(
            read_document(args.families, FamiliesDocument), w.layout
        )
        report = signaling_strength(w, parties, families)
        logger.info("signaling strengths of %d parties", len(parties))
        out.write("sender\treceiver\tstrength\n")
        for (sender, receiver), strength in report.directions.items():
            out.write(f"{sender}\t{receiver}\t{strength:.6g}\n")
        for combo in report.skipped:
            out.write(f"skipped incompatible combination {', '.join(combo)}\n")
        return 0
