"""Document serialization."""
import json
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Type, TypeVar, Union

import attr
import numpy as np
from pydantic import BaseModel, ValidationError

from opnet.core import linalg
from opnet.core.cj import cp_to_boundary
from opnet.errors import ChainError, DocumentError
from opnet.models.boundary import BoundaryOperation
from opnet.models.causal import Party
from opnet.models.layout import IndexLayout
from opnet.models.network import Network, ProcessOperator, port_name
from opnet.models.operations import KrausSet, SequentialOperation
from opnet.models.schemas import (
    FamiliesDocument,
    Matrix,
    NetworkDocument,
    NodeKind,
    NodeSpec,
    OutcomeSpec,
    ProcessOperatorDocument,
    SystemSpec,
    WireSpec,
)

logger = logging.getLogger(__name__)

DocumentT = TypeVar("DocumentT", bound=BaseModel)


def matrix_from_doc(rows: Matrix) -> np.ndarray:
    """complex matrix from rows of [re, im] pairs"""
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)


def matrix_to_doc(m: np.ndarray) -> Matrix:
    """rows of [re, im] pairs"""
    return [[(float(z.real), float(z.imag)) for z in row] for row in np.asarray(m)]


def parse_document(data: Union[dict, str], model: Type[DocumentT]) -> DocumentT:
    """validate a decoded (or json text) document"""
    try:
        if isinstance(data, str):
            return model.parse_raw(data)
        return model.parse_obj(data)
    except (ValidationError, ValueError) as e:
        raise DocumentError(f"invalid {model.__name__}: {e}")


def read_document(path: Union[str, Path], model: Type[DocumentT]) -> DocumentT:
    """load and validate a json document"""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise DocumentError(f"cannot read {path}: {e}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"{path} is not valid json: {e}")
    return parse_document(data, model)


def dump_document(doc: BaseModel) -> str:
    return doc.json(indent=2)


def _dims(doc: NetworkDocument) -> Dict[str, int]:
    return {system.id: system.dim for system in doc.systems}


def _layout(ids: List[str], dims: Dict[str, int]) -> IndexLayout:
    return IndexLayout(tuple((sid, dims[sid]) for sid in ids))


def _checked(m: np.ndarray, shape: Tuple[int, int], what: str) -> np.ndarray:
    if m.shape != shape:
        raise DocumentError(f"{what} has shape {m.shape}, expected {shape}")
    return m


def sequential_from_node(spec: NodeSpec, dims: Dict[str, int]) -> SequentialOperation:
    """sequential operation of a sequential node"""
    source, target = _layout(spec.inputs, dims), _layout(spec.outputs, dims)
    shape = (target.size, source.size)
    outcomes = []
    for outcome in spec.outcomes:
        ops = [
            _checked(matrix_from_doc(k), shape, f"kraus operator of {spec.id}/{outcome.label}")
            for k in outcome.kraus or []
        ]
        outcomes.append((outcome.label, KrausSet.from_operators(ops)))
    return SequentialOperation(source, target, outcomes)


def boundary_from_outcomes(
    outcomes: List[OutcomeSpec], layout: IndexLayout, name: str
) -> BoundaryOperation:
    shape = (layout.size, layout.size)
    operators = [
        (o.label, _checked(matrix_from_doc(o.operator), shape, f"operator of {name}/{o.label}"))
        for o in outcomes
    ]
    return BoundaryOperation(layout, operators)


def _wire_s(wire: WireSpec, dim: int) -> np.ndarray:
    if wire.s == "identity":
        return np.eye(dim, dtype=np.complex128)
    return _checked(matrix_from_doc(wire.s), (dim, dim), f"S of wire {wire.a}-{wire.b}")


def wire_symmetries(doc: NetworkDocument) -> Dict[Tuple[str, str], np.ndarray]:
    """S of every wire keyed by its second end"""
    dims = _dims(doc)
    return {tuple(wire.b): _wire_s(wire, dims[wire.b[1]]) for wire in doc.wires}


def node_operation(
    spec: NodeSpec, doc: NetworkDocument
) -> Union[SequentialOperation, BoundaryOperation]:
    """domain operation of a node as written in the document"""
    if spec.kind == NodeKind.sequential:
        return sequential_from_node(spec, _dims(doc))
    return boundary_from_outcomes(spec.outcomes, _layout(spec.ports, _dims(doc)), spec.id)


def network_from_document(doc: NetworkDocument) -> Network:
    """
    Network of a document.

    Sequential nodes become boundary operations on (inputs, outputs), with the S
    of the wires at their output ports.
    """
    dims = _dims(doc)
    symmetries = wire_symmetries(doc)
    net = Network()
    for spec in doc.nodes:
        op = node_operation(spec, doc)
        if isinstance(op, SequentialOperation):
            s_b = linalg.kron_all(
                symmetries.get((spec.id, port), np.eye(dims[port])) for port in spec.outputs
            )
            op = cp_to_boundary(op, s_b, output_ids=spec.outputs)
        net.add_node(spec.id, op)
    for wire in doc.wires:
        net.connect(tuple(wire.a), tuple(wire.b), s=symmetries[tuple(wire.b)])
    logger.info("loaded network of %d nodes and %d wires", len(net.nodes), len(net.wires))
    return net


@attr.s(frozen=True, eq=False)
class Chain:
    """a document read as a preparation-to-measurement chain"""

    node_ids: Tuple[str, ...] = attr.ib(converter=tuple)
    operations: Tuple[SequentialOperation, ...] = attr.ib(converter=tuple)
    cuts: Tuple[np.ndarray, ...] = attr.ib(converter=tuple)


def chain_from_document(doc: NetworkDocument) -> Chain:
    """
    The chain encoded by a document of sequential nodes.

    The outputs of each node must be wired, in order, to the inputs of the next
    one; the S of a cut is the product of the S of its wires.
    """
    nodes = {spec.id: spec for spec in doc.nodes}
    if any(spec.kind != NodeKind.sequential for spec in doc.nodes):
        raise ChainError("a chain consists of sequential nodes only")
    by_output = {tuple(wire.b): wire for wire in doc.wires}
    if len(by_output) != len(doc.wires):
        raise ChainError("ports carry several wires")
    symmetries = wire_symmetries(doc)

    starts = [spec.id for spec in doc.nodes if not spec.inputs]
    if len(starts) != 1:
        raise ChainError(f"a chain has exactly one preparation, found {len(starts)}")
    order, cuts = [starts[0]], []
    while nodes[order[-1]].outputs:
        spec = nodes[order[-1]]
        wires = [by_output.get((spec.id, port)) for port in spec.outputs]
        if any(w is None for w in wires):
            raise ChainError(f"outputs of node {spec.id!r} are not all wired")
        successors = {w.a[0] for w in wires}
        if len(successors) != 1:
            raise ChainError(f"outputs of node {spec.id!r} feed several nodes")
        nxt = successors.pop()
        if nxt in order:
            raise ChainError("document contains a cycle")
        if [w.a[1] for w in wires] != nodes[nxt].inputs:
            raise ChainError(f"inputs of node {nxt!r} do not match the outputs of {spec.id!r}")
        cuts.append(linalg.kron_all(symmetries[tuple(w.b)] for w in wires))
        order.append(nxt)
    if len(order) != len(nodes) or len(doc.wires) != sum(len(nodes[n].inputs) for n in order):
        raise ChainError("document is not a single chain")

    dims = _dims(doc)
    operations = [sequential_from_node(nodes[node], dims) for node in order]
    return Chain(order, operations, cuts)


def _sequential_node(node_id: str, op: SequentialOperation) -> NodeSpec:
    return NodeSpec(
        id=node_id,
        kind=NodeKind.sequential,
        inputs=[str(sid) for sid in op.input_layout.ids],
        outputs=[str(sid) for sid in op.output_layout.ids],
        outcomes=[
            OutcomeSpec(label=label, kraus=[matrix_to_doc(k) for k in kraus])
            for label, kraus in op.outcomes
        ],
    )


def chain_document(
    doc: NetworkDocument, chain: Chain, operations: List[SequentialOperation]
) -> NetworkDocument:
    """
    Document of the reversed chain.

    ``operations`` are the reversed operations, last node first; every wire keeps
    its S with the ends exchanged.
    """
    node_ids = list(chain.node_ids)[::-1]
    nodes = [_sequential_node(node, op) for node, op in zip(node_ids, operations)]
    wires = [WireSpec(a=wire.b, b=wire.a, s=wire.s) for wire in doc.wires]
    return NetworkDocument(version=doc.version, systems=doc.systems, nodes=nodes, wires=wires)


def process_to_document(w: ProcessOperator) -> ProcessOperatorDocument:
    return ProcessOperatorDocument(
        layout=[SystemSpec(id=port_name(pid), dim=dim) for pid, dim in w.layout],
        w=matrix_to_doc(w.w),
    )


def process_from_document(doc: ProcessOperatorDocument) -> ProcessOperator:
    layout = IndexLayout(tuple((s.id, s.dim) for s in doc.layout))
    return ProcessOperator(layout, matrix_from_doc(doc.w))


def families_from_document(
    doc: FamiliesDocument, layout: IndexLayout
) -> Tuple[List[Party], Dict[str, Dict[str, BoundaryOperation]]]:
    """parties and their operation families; port dimensions come from the layout"""
    parties, families = [], {}
    for party in doc.parties:
        ports = IndexLayout(tuple((port, layout.dim(port)) for port in party.ports))
        parties.append(Party(party.name, party.ports))
        families[party.name] = {
            member.label: boundary_from_outcomes(
                member.outcomes, ports, f"{party.name}/{member.label}"
            )
            for member in party.family
        }
    return parties, families
