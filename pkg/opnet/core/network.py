"""Composition of boundary operations, network evaluation and process operators"""
import itertools
import logging
from typing import (
    Dict,
    Hashable,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.core.cj import cp_to_boundary, make_wire, symmetry_matrix
from opnet.core.contraction import Block, block_side, contract
from opnet.core.sequential import check_chain
from opnet.errors import IncompatibleNetworkError, LayoutError, OpenNetworkError
from opnet.models.boundary import BoundaryOperation, WireState
from opnet.models.layout import IndexLayout, SystemId
from opnet.models.network import (
    ContractionPlan,
    Network,
    NodeId,
    Port,
    ProcessOperator,
    WireKey,
    port_name,
    selected_ports,
)
from opnet.models.operations import Outcome, OutcomeDistribution, SequentialOperation

logger = logging.getLogger(__name__)

Link = Tuple[SystemId, SystemId, WireState]
Conditions = Mapping[NodeId, Union[str, Sequence[str]]]


def _join_labels(labels: Sequence[str]) -> str:
    return config.settings.outcome_separator.join(labels)


def operation_block(
    op: BoundaryOperation, ports: Sequence[Hashable], node: Hashable
) -> Block:
    """block carrying every outcome of a boundary operation"""
    return Block(
        ports, op.layout.dims, op.operators, tuple((label,) for label in op.labels), (node,)
    )


def wire_block(wire: WireState) -> Block:
    return Block(wire.ends, (wire.dim, wire.dim), wire.state)


def _finish(block: Block, labels: Sequence[str], layout: IndexLayout, *dims: int):
    """boundary operation from a contracted block, null when the denominator vanishes"""
    total = block.total_trace()
    if total < config.settings.null_threshold(*dims):
        logger.debug("composition is the null operation")
        return BoundaryOperation.null(layout, labels)
    factor = block.size / total
    operators = [linalg.hermitian_part(m) * factor for m in block.tensor]
    return BoundaryOperation(layout, list(zip(labels, operators)))


def connect_many(
    a: BoundaryOperation, b: BoundaryOperation, links: Sequence[Link]
) -> BoundaryOperation:
    """
    Composition of two boundary operations over one or more wires.

    Each link (port_a, port_b, wire) joins system port_a of a to the first end of
    the wire and system port_b of b to its second end. The result acts on the
    remaining systems of a followed by those of b; ids of b clashing with a get a
    trailing prime. A vanishing denominator yields the null operation.
    """
    if not links:
        raise LayoutError("at least one link is required")
    blocks = [operation_block(a, [("a", sid) for sid in a.layout.ids], "a")]
    for port_a, port_b, wire in links:
        if a.layout.dim(port_a) != wire.dim or b.layout.dim(port_b) != wire.dim:
            raise LayoutError(
                f"ports {port_a!r} and {port_b!r} do not match the wire dimension"
            )
        blocks.append(Block((("a", port_a), ("b", port_b)), (wire.dim, wire.dim), wire.state))
    blocks.append(operation_block(b, [("b", sid) for sid in b.layout.ids], "b"))
    merged = contract(blocks)

    rest_a = a.layout.remove(port_a for port_a, _, _ in links)
    rest_b = b.layout.remove(port_b for _, port_b, _ in links)
    clash = set(rest_a.ids) & set(rest_b.ids)
    layout = rest_a + rest_b.rename(lambda sid: f"{sid}'" if sid in clash else sid)
    labels = [_join_labels(pair) for pair in merged.labels]
    return _finish(merged, labels, layout, a.dim, b.dim)


def connect(
    a: BoundaryOperation,
    b: BoundaryOperation,
    port_a: SystemId,
    port_b: SystemId,
    wire: WireState,
) -> BoundaryOperation:
    """composition over a single wire, see ``connect_many``"""
    return connect_many(a, b, [(port_a, port_b, wire)])


def close_ports(
    op: BoundaryOperation, port_x: SystemId, port_y: SystemId, wire: WireState
) -> BoundaryOperation:
    """contract a wire whose ends are both systems of one operation"""
    if op.layout.dim(port_x) != wire.dim or op.layout.dim(port_y) != wire.dim:
        raise LayoutError(f"ports {port_x!r} and {port_y!r} do not match the wire dimension")
    merged = contract(
        [
            operation_block(op, op.layout.ids, "op"),
            Block((port_x, port_y), (wire.dim, wire.dim), wire.state),
        ]
    )
    layout = op.layout.remove([port_x, port_y])
    return _finish(merged, [label for (label,) in merged.labels], layout, op.dim)


def _wire_ports(wire: WireState, held: Mapping[Port, int]):
    involved: List[int] = []
    for port in wire.ends:
        owner = held.get(port)
        if owner is not None and owner not in involved:
            involved.append(owner)
    return involved


def contraction_plan(net: Network, keep: Iterable[NodeId] = ()) -> ContractionPlan:
    """
    Greedy wire elimination order.

    At each step the wire whose elimination yields the smallest block side is
    taken, ties broken by the wire key. Wires between two ``keep`` nodes are not
    eliminated and the ports of those nodes stay open.
    """
    keep = set(keep)
    dims = {port: net.port_dim(port) for port in net.ports}
    held: Dict[Port, int] = {}
    ports_of: Dict[int, set] = {}
    ids = itertools.count()
    for node in sorted(net.nodes):
        if node in keep:
            continue
        block = next(ids)
        ports_of[block] = set()
        for sid in net.nodes[node].layout.ids:
            held[(node, sid)] = block
            ports_of[block].add((node, sid))

    def merged_ports(wire: WireState):
        involved = _wire_ports(wire, held)
        ports = set().union(*(ports_of[i] for i in involved))
        for port in wire.ends:
            if port in ports:
                ports.discard(port)
            else:
                ports.add(port)
        return involved, ports

    pending = [w for w in net.wires if not (w.end_a[0] in keep and w.end_b[0] in keep)]
    steps, sizes = [], []
    while pending:
        best = None
        for wire in pending:
            side = block_side([dims[p] for p in merged_ports(wire)[1]])
            if best is None or (side, wire.key) < best[:2]:
                best = (side, wire.key, wire)
        side, key, wire = best
        involved, ports = merged_ports(wire)
        block = next(ids)
        for i in involved:
            del ports_of[i]
        ports_of[block] = ports
        for port in ports:
            held[port] = block
        pending.remove(wire)
        steps.append(key)
        sizes.append(side)
    plan = ContractionPlan(steps, sizes)
    logger.debug("contraction plan of %d steps, peak side %d", len(plan), plan.peak_dimension)
    return plan


def _check_plan(net: Network, plan, keep: Iterable[NodeId] = ()) -> List[WireKey]:
    keep = set(keep)
    steps = [tuple(key) for key in plan]
    expected = [
        w.key for w in net.wires if not (w.end_a[0] in keep and w.end_b[0] in keep)
    ]
    if sorted(steps) != sorted(expected):
        raise LayoutError("plan must eliminate every wire exactly once")
    return steps


def _eliminate(net: Network, blocks: Dict[int, Block], steps: Sequence[WireKey]):
    """contract wires in plan order; every merged block is rescaled to Tr = side"""
    held = {port: i for i, block in blocks.items() for port in block.ports}
    ids = itertools.count(max(blocks, default=-1) + 1)
    for key in steps:
        wire = net.wire_by_key(key)
        involved = _wire_ports(wire, held)
        operands = [blocks.pop(i) for i in involved]
        merged = contract([*operands, wire_block(wire)])
        total = merged.total_trace()
        if total < config.settings.null_threshold(*(b.size for b in operands), wire.dim):
            raise IncompatibleNetworkError("network normalization vanishes (null event)")
        block = next(ids)
        blocks[block] = merged.scaled(merged.size / total)
        for port in merged.ports:
            held[port] = block
    return blocks


def evaluate_network(
    net: Network, plan: Optional[Union[ContractionPlan, Sequence[WireKey]]] = None
) -> OutcomeDistribution:
    """
    Joint outcome distribution of a closed network.

    Outcome tuples list the labels of the nodes sorted by node id.
    """
    if not net.nodes:
        raise LayoutError("network has no nodes")
    if net.open_ports:
        raise OpenNetworkError(
            f"network has open ports {[port_name(p) for p in net.open_ports]}"
        )
    steps = _check_plan(net, plan) if plan is not None else contraction_plan(net).steps
    blocks = {}
    for i, node in enumerate(sorted(net.nodes)):
        op = net.nodes[node]
        blocks[i] = operation_block(op, [(node, sid) for sid in op.layout.ids], node)
    blocks = _eliminate(net, blocks, steps)
    remaining = [blocks[i] for i in sorted(blocks)]
    final = contract(remaining) if len(remaining) > 1 else remaining[0]

    weights = np.real(final.tensor[:, 0, 0])
    total = float(np.sum(weights))
    if total < config.settings.null_tolerance:
        raise IncompatibleNetworkError("network normalization vanishes (null event)")
    names = tuple(sorted(net.nodes))
    positions = [final.nodes.index(name) for name in names]
    entries = {
        tuple(labels[k] for k in positions): max(p, 0.0) / total
        for labels, p in zip(final.labels, weights)
    }
    return OutcomeDistribution(entries, names)


def sample_outcomes(net: Network, seed: int, n: int) -> List[Outcome]:
    """n independent draws from the network distribution"""
    dist = evaluate_network(net)
    keys = list(dist)
    p = dist.probabilities()
    rng = np.random.default_rng(seed)
    return [keys[i] for i in rng.choice(len(keys), size=n, p=p / p.sum())]


def process_operator_for(
    net: Network, selected: Iterable[NodeId], conditions: Optional[Conditions] = None
) -> ProcessOperator:
    """
    Process operator W on the ports of the selected nodes.

    Every other node contributes its total operator, or the sum over the outcome
    labels given in ``conditions``. The layout lists the selected ports sorted by
    node id, each node in its own layout order.
    """
    selected = set(selected)
    unknown = selected - set(net.nodes)
    if not selected or unknown:
        raise LayoutError(
            f"selection must name nodes of the network, unknown: {sorted(unknown)}"
        )
    if net.open_ports:
        raise OpenNetworkError(
            f"network has open ports {[port_name(p) for p in net.open_ports]}"
        )
    conditions = dict(conditions or {})
    for node in conditions:
        if node not in net.nodes or node in selected:
            raise LayoutError(f"cannot condition on node {node!r}")

    blocks = {}
    for i, node in enumerate(sorted(set(net.nodes) - selected)):
        op = net.nodes[node]
        labels = conditions.get(node)
        if isinstance(labels, str):
            labels = [labels]
        operator = op.total() if labels is None else op.select(labels)
        blocks[i] = Block([(node, sid) for sid in op.layout.ids], op.layout.dims, operator)
    blocks = _eliminate(net, blocks, contraction_plan(net, keep=selected).steps)

    remaining = [blocks[i] for i in sorted(blocks)]
    remaining += [
        wire_block(w) for w in net.wires if w.end_a[0] in selected and w.end_b[0] in selected
    ]
    order = selected_ports(net, selected)
    layout = IndexLayout(tuple((port, net.port_dim(port)) for port in order))
    if not remaining:
        return ProcessOperator(layout, np.ones((1, 1)))
    final = contract(remaining) if len(remaining) > 1 else remaining[0]
    w = final.summed().permuted(order)[0]
    total = linalg.real_trace(w)
    if total < config.settings.null_threshold(layout.size):
        raise IncompatibleNetworkError("process operator normalization vanishes (null event)")
    return ProcessOperator(layout, linalg.hermitian_part(w) / total)


def _segments(layout: IndexLayout, ops: Sequence[BoundaryOperation]) -> List[List[SystemId]]:
    """consecutive systems of the layout matched to each operation"""
    segments, start = [], 0
    for k, op in enumerate(ops):
        ids = list(layout.ids[start:start + len(op.layout)])
        dims = tuple(layout.dim(sid) for sid in ids)
        if len(ids) != len(op.layout) or dims != op.layout.dims:
            raise LayoutError(f"operation {k} does not match the process operator layout")
        segments.append(ids)
        start += len(op.layout)
    if start != len(layout):
        raise LayoutError("operations do not cover every system of the process operator")
    return segments


def probabilities_from_process(
    w: ProcessOperator,
    ops: Sequence[BoundaryOperation],
    names: Optional[Sequence[str]] = None,
) -> OutcomeDistribution:
    """p = Tr[(M_i x N_j x ...) W] / Tr[(M-bar x N-bar x ...) W], operations in layout order"""
    names = tuple(names) if names is not None else tuple(f"op{k}" for k in range(len(ops)))
    segments = _segments(w.layout, ops)
    blocks = [Block(w.layout.ids, w.layout.dims, w.w)]
    blocks += [operation_block(op, seg, name) for op, seg, name in zip(ops, segments, names)]
    final = contract(blocks)
    weights = np.real(final.tensor[:, 0, 0])
    if weights.sum() < config.settings.null_threshold(w.dim):
        raise IncompatibleNetworkError(
            "operations and process operator are incompatible (null event)"
        )
    return OutcomeDistribution.from_array([op.labels for op in ops], weights, names)


def condition_process(
    w: ProcessOperator,
    op: BoundaryOperation,
    ports: Sequence[SystemId],
    outcomes: Optional[Union[str, Sequence[str]]] = None,
) -> ProcessOperator:
    """W' = Tr_X[W (L x I)] / Tr[W (L x I)] with L the operator of the observed outcomes"""
    ports = list(ports)
    if tuple(w.layout.dim(p) for p in ports) != op.layout.dims:
        raise LayoutError("ports do not match the operation layout")
    if isinstance(outcomes, str):
        outcomes = [outcomes]
    operator = op.total() if outcomes is None else op.select(outcomes)
    final = contract(
        [Block(w.layout.ids, w.layout.dims, w.w), Block(ports, op.layout.dims, operator)]
    )
    reduced = final.tensor[0]
    total = linalg.real_trace(reduced)
    if total < config.settings.null_threshold(w.dim):
        raise IncompatibleNetworkError("conditioning on a null event")
    return ProcessOperator(w.layout.remove(ports), linalg.hermitian_part(reduced) / total)


def _port_symmetries(layout: IndexLayout, s_per_port) -> List[np.ndarray]:
    if s_per_port is None:
        s_per_port = [None] * len(layout)
    s_per_port = list(s_per_port)
    if len(s_per_port) != len(layout):
        raise LayoutError(f"expected {len(layout)} symmetry operators, got {len(s_per_port)}")
    return [symmetry_matrix(s, dim) for s, dim in zip(s_per_port, layout.dims)]


def ring_operation_from_w(w: ProcessOperator, s_per_port=None) -> BoundaryOperation:
    """
    Single-outcome ring operation R = D S W^T S^dagger / Tr(S W^T S^dagger).

    S is the product of the port symmetries.
    """
    s = linalg.kron_all(_port_symmetries(w.layout, s_per_port))
    r = s @ w.w.T @ linalg.dagger(s)
    r = linalg.hermitian_part(r) * (w.dim / linalg.real_trace(r))
    return BoundaryOperation.single(w.layout, r, "R")


def close_with_ring(
    w: ProcessOperator,
    ops: Sequence[Tuple[NodeId, BoundaryOperation]],
    s_per_port=None,
    ring_id: NodeId = "ring",
) -> Network:
    """closed network of the operations wired onto the ring operation of W"""
    s = _port_symmetries(w.layout, s_per_port)
    segments = _segments(w.layout, [op for _, op in ops])
    ring = ring_operation_from_w(w, s).rename(port_name)
    net = Network()
    for node, op in ops:
        net.add_node(node, op)
    net.add_node(ring_id, ring)
    for (node, op), seg in zip(ops, segments):
        for sid, pid in zip(op.layout.ids, seg):
            net.connect((node, sid), (ring_id, port_name(pid)), s=s[w.layout.index(pid)])
    return net


def _slot_of(pid: Hashable) -> Tuple[NodeId, SystemId]:
    if isinstance(pid, tuple) and len(pid) == 2:
        return str(pid[0]), pid[1]
    return str(pid), pid


def realize_via_postselection(w: ProcessOperator, s_per_port=None) -> Network:
    """
    Acyclic network whose process operator on the slot nodes, conditioned on a
    post-selected measurement, is W.

    Ports of W become ports of unit-operator slot nodes; a port id (node, system)
    lands on slot node ``node``. A source node prepares the ring operator of W on a
    primed copy of every port. The ``postselect`` node measures each slot port
    together with its copy and keeps only the entangled outcome
    S|phi+><phi+|S^dagger.
    """
    s = _port_symmetries(w.layout, s_per_port)
    slots: Dict[NodeId, List[Tuple[SystemId, int]]] = {}
    for pid, dim in w.layout:
        node, sid = _slot_of(pid)
        slots.setdefault(node, []).append((sid, dim))
    net = Network()
    for node, systems in slots.items():
        net.add_node(node, BoundaryOperation.unit(IndexLayout(tuple(systems))))

    def copy_port(pid):
        return port_name(pid) + "'"

    net.add_node("source", ring_operation_from_w(w, s).rename(copy_port))
    systems, effects = [], []
    for k, (pid, d) in enumerate(w.layout):
        systems += [(f"{port_name(pid)}>", d), (f"{copy_port(pid)}>", d)]
        lift = np.kron(s[k], np.eye(d))
        effects.append(lift @ linalg.max_entangled(d) @ linalg.dagger(lift))
    layout = IndexLayout(tuple(systems))
    effect = linalg.kron_all(effects)
    effect *= layout.size / linalg.real_trace(effect)
    net.add_node("postselect", BoundaryOperation.single(layout, effect, "ok"))

    for k, pid in enumerate(w.layout.ids):
        net.connect(("postselect", f"{port_name(pid)}>"), _slot_of(pid), s=s[k])
        net.connect(
            ("postselect", f"{copy_port(pid)}>"), ("source", copy_port(pid)), s=s[k]
        )
    return net


def _resolve(net: Network, wire: Union[WireState, WireKey]) -> WireState:
    if isinstance(wire, WireState):
        return net.wire_by_key(wire.key)
    return net.wire_by_key(wire)


def merge_wires(
    net: Network, wire_x: Union[WireState, WireKey], wire_y: Union[WireState, WireKey]
) -> Network:
    """
    Network with two wires between the same pair of nodes replaced by one.

    The grouped ports carry the product dimension and the new wire has
    S = S_x x S_y.
    """
    x, y = _resolve(net, wire_x), _resolve(net, wire_y)
    first, second = x.end_a[0], x.end_b[0]
    if first == second or x.key == y.key:
        raise LayoutError("merging needs two distinct wires between two distinct nodes")
    if (y.end_a[0], y.end_b[0]) == (second, first):
        y_oriented = y.swapped()
    elif (y.end_a[0], y.end_b[0]) == (first, second):
        y_oriented = y
    else:
        raise LayoutError("wires do not join the same pair of nodes")

    port_a = f"{x.end_a[1]}+{y_oriented.end_a[1]}"
    port_b = f"{x.end_b[1]}+{y_oriented.end_b[1]}"
    nodes = dict(net.nodes)
    nodes[first] = nodes[first].group_ports([x.end_a[1], y_oriented.end_a[1]], port_a)
    nodes[second] = nodes[second].group_ports([x.end_b[1], y_oriented.end_b[1]], port_b)
    wires = [wire for wire in net.wires if wire.key not in (x.key, y.key)]
    merged = make_wire(
        x.dim * y.dim, np.kron(x.s, y_oriented.s), ((first, port_a), (second, port_b))
    )
    return Network(nodes, wires + [merged])


def _group_id(ids: Sequence[SystemId]) -> Optional[SystemId]:
    if not ids:
        return None
    if len(ids) == 1:
        return ids[0]
    return "+".join(str(sid) for sid in ids)


def network_from_circuit(
    prep: SequentialOperation,
    middles: Sequence[SequentialOperation],
    meas: SequentialOperation,
    s_per_cut=None,
    node_ids: Optional[Sequence[NodeId]] = None,
) -> Network:
    """
    Acyclic network of a sequential circuit.

    Node k holds the boundary operation of the k-th operation, ``op{k}`` by
    default. The wire of cut k joins the input port of node k+1 to the output
    port of node k, where its S acts; several systems crossing a cut are
    grouped into one port.
    """
    chain = check_chain(prep, middles, meas)
    ids = list(node_ids) if node_ids is not None else [f"op{k}" for k in range(len(chain))]
    if len(ids) != len(chain) or len(set(ids)) != len(ids):
        raise LayoutError("one distinct node id per operation is required")
    cuts = list(s_per_cut) if s_per_cut is not None else [None] * (len(chain) - 1)
    if len(cuts) != len(chain) - 1:
        raise LayoutError(f"expected {len(chain) - 1} cut symmetries, got {len(cuts)}")

    net = Network()
    ports = []
    for k, op in enumerate(chain):
        b = cp_to_boundary(op, cuts[k] if k < len(cuts) else None)
        n_in = len(op.input_layout)
        ins, outs = list(b.layout.ids[:n_in]), list(b.layout.ids[n_in:])
        in_port, out_port = _group_id(ins), _group_id(outs)
        if len(ins) > 1:
            b = b.group_ports(ins, in_port)
        if len(outs) > 1:
            b = b.group_ports(outs, out_port)
        net.add_node(ids[k], b)
        ports.append((in_port, out_port))
    for k, s in enumerate(cuts):
        net.connect((ids[k + 1], ports[k + 1][0]), (ids[k], ports[k][1]), s=s)
    return net
