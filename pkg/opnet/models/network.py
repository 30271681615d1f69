"""Networks of boundary operations joined by wires"""
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

import attr
import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.errors import InvalidStateError, LayoutError
from opnet.models.boundary import BoundaryOperation, WireState
from opnet.models.layout import IndexLayout, SystemId, as_square

NodeId = str
Port = Tuple[NodeId, SystemId]
WireKey = Tuple[str, str]


def port_name(port: Hashable) -> str:
    """printable id of a port, "node.system" for network ports"""
    if isinstance(port, tuple) and len(port) == 2:
        return f"{port[0]}.{port[1]}"
    return str(port)


@attr.s(eq=False)
class Network:
    """
    Boundary operations at nodes, wires joining their ports.

    A port is a (node id, system id) pair. Every port carries at most one wire;
    a network without unwired ports is closed.
    """

    nodes: Dict[NodeId, BoundaryOperation] = attr.ib(factory=dict)
    wires: List[WireState] = attr.ib(factory=list)

    def __attrs_post_init__(self):
        wires, self.wires = self.wires, []
        for wire in wires:
            self.add_wire(wire)

    def add_node(self, node_id: NodeId, op: BoundaryOperation) -> "Network":
        if node_id in self.nodes:
            raise LayoutError(f"node {node_id!r} already exists")
        self.nodes[node_id] = op
        return self

    def port_dim(self, port: Port) -> int:
        node, sid = port
        if node not in self.nodes:
            raise LayoutError(f"unknown node {node!r}")
        return self.nodes[node].layout.dim(sid)

    @property
    def ports(self) -> List[Port]:
        """all ports, nodes in insertion order"""
        return [(node, sid) for node, op in self.nodes.items() for sid in op.layout.ids]

    def wire_at(self, port: Port) -> Optional[WireState]:
        for wire in self.wires:
            if port in wire.ends:
                return wire
        return None

    def add_wire(self, wire: WireState) -> WireState:
        """attach an existing wire state"""
        if wire.end_a == wire.end_b:
            raise LayoutError(f"wire joins port {wire.end_a!r} to itself")
        for port in wire.ends:
            if not (isinstance(port, tuple) and len(port) == 2):
                raise LayoutError(f"port must be a (node, system) pair, got {port!r}")
            if self.port_dim(port) != wire.dim:
                raise LayoutError(
                    f"port {port_name(port)} has dimension {self.port_dim(port)}, "
                    f"wire has {wire.dim}"
                )
            if self.wire_at(port) is not None:
                raise LayoutError(f"port {port_name(port)} already has a wire")
        self.wires.append(wire)
        return wire

    def connect(self, port_a: Port, port_b: Port, s=None) -> WireState:
        """join two ports by a wire with S acting on ``port_b``"""
        from opnet.core.cj import make_wire

        return self.add_wire(make_wire(self.port_dim(port_a), s, (port_a, port_b)))

    def remove_wire(self, key: WireKey) -> WireState:
        wire = self.wire_by_key(key)
        self.wires.remove(wire)
        return wire

    def wire_by_key(self, key: WireKey) -> WireState:
        key = tuple(key)
        for wire in self.wires:
            if wire.key == key:
                return wire
        raise LayoutError(f"no wire with key {key}")

    @property
    def wire_keys(self) -> List[WireKey]:
        return [wire.key for wire in self.wires]

    @property
    def open_ports(self) -> List[Port]:
        wired = {port for wire in self.wires for port in wire.ends}
        return [port for port in self.ports if port not in wired]

    @property
    def closed(self) -> bool:
        return not self.open_ports

    def with_nodes(self, updates: Mapping[NodeId, BoundaryOperation]) -> "Network":
        """copy with some node operations replaced; layouts must be kept"""
        nodes = dict(self.nodes)
        for node, op in updates.items():
            if node not in nodes:
                raise LayoutError(f"unknown node {node!r}")
            if op.layout != nodes[node].layout:
                raise LayoutError(f"replacement for node {node!r} has another layout")
            nodes[node] = op
        return Network(nodes, list(self.wires))

    def wires_between(self, a: NodeId, b: NodeId) -> List[WireState]:
        return [wire for wire in self.wires if {wire.end_a[0], wire.end_b[0]} == {a, b}]


@attr.s(frozen=True, eq=False)
class ProcessOperator:
    """positive operator W with unit trace on the ports of selected nodes"""

    layout: IndexLayout = attr.ib()
    w: np.ndarray = attr.ib(converter=as_square)

    def __attrs_post_init__(self):
        self.layout.check_matrix(self.w, "W")
        tol = config.settings.normalization_tolerance
        if not linalg.is_psd(self.w, tol):
            raise InvalidStateError("W is not positive semidefinite")
        residual = abs(linalg.real_trace(self.w) - 1.0)
        if residual > tol:
            raise InvalidStateError(f"Tr W differs from 1 by {residual:.3e}")

    @property
    def dim(self) -> int:
        return self.layout.size

    def reorder(self, order: Sequence[SystemId]) -> "ProcessOperator":
        return ProcessOperator(
            self.layout.reorder(order), linalg.permute_systems(self.w, self.layout, order)
        )

    def reduced(self, keep: Sequence[SystemId]) -> np.ndarray:
        """partial trace onto the kept systems, in layout order"""
        traced = [sid for sid in self.layout.ids if sid not in set(keep)]
        return linalg.partial_trace(self.w, self.layout, traced)

    def rename(self, mapping) -> "ProcessOperator":
        return ProcessOperator(self.layout.rename(mapping), self.w)


@attr.s(frozen=True)
class ContractionPlan:
    """wires in elimination order and the block side reached at each step"""

    steps: Tuple[WireKey, ...] = attr.ib(converter=tuple)
    sizes: Tuple[int, ...] = attr.ib(converter=tuple, default=())

    @property
    def peak_dimension(self) -> int:
        return max(self.sizes, default=1)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


def selected_ports(net: Network, selected: Iterable[NodeId]) -> List[Port]:
    """ports of the selected nodes, sorted by node then in layout order"""
    return [(node, sid) for node in sorted(selected) for sid in net.nodes[node].layout.ids]
