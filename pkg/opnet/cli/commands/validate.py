"""validate command"""
import argparse
import logging
from typing import TextIO

import attr

from opnet.core.cj import make_wire
from opnet.core.sequential import validate_operation
from opnet.errors import InvariantError, OpnetError
from opnet.models.decompose import node_operation, read_document, wire_symmetries
from opnet.models.operations import SequentialOperation
from opnet.models.schemas import NetworkDocument

from .command import CliCommand

logger = logging.getLogger(__name__)


@attr.s
class ValidateCommand(CliCommand):
    """check every node and wire of a network document"""

    name = "validate"
    help = "check a network document against the operation and wire invariants"

    def run(self, args: argparse.Namespace, out: TextIO) -> int:
        """print one report line per node and wire"""
        doc = read_document(args.path, NetworkDocument)
        failed = []
        for spec in doc.nodes:
            op = node_operation(spec, doc)
            if isinstance(op, SequentialOperation):
                report = validate_operation(op)
                residual = report.normalization_residual
            else:
                report = op.check()
                residual = report.trace_residual
            status = "ok" if report.valid else "; ".join(report.failures)
            out.write(f"node {spec.id}: residual {residual:.3e} {status}\n")
            if not report.valid:
                failed.append(spec.id)

        dims = {system.id: system.dim for system in doc.systems}
        symmetries = wire_symmetries(doc)
        for wire in doc.wires:
            name = f"{wire.a[0]}.{wire.a[1]}-{wire.b[0]}.{wire.b[1]}"
            if dims[wire.a[1]] != dims[wire.b[1]]:
                out.write(f"wire {name}: end dimensions differ\n")
                failed.append(name)
                continue
            try:
                make_wire(dims[wire.b[1]], symmetries[tuple(wire.b)], (wire.a, wire.b))
            except OpnetError as e:
                out.write(f"wire {name}: {e}\n")
                failed.append(name)
            else:
                out.write(f"wire {name}: ok\n")

        if failed:
            raise InvariantError(f"invariant failures in {', '.join(failed)}")
        logger.info("%s is valid", args.path)
        return 0
