import numpy as np
import pytest

from opnet.core import linalg
from opnet.core.cj import cp_to_boundary, make_wire
from opnet.core.network import (
    close_ports,
    close_with_ring,
    condition_process,
    connect,
    connect_many,
    contraction_plan,
    evaluate_network,
    merge_wires,
    network_from_circuit,
    probabilities_from_process,
    process_operator_for,
    realize_via_postselection,
    ring_operation_from_w,
    sample_outcomes,
)
from opnet.core.sequential import (
    circuit_probability_sequential,
    compose_parallel,
    compose_sequential,
)
from opnet.errors import (
    IncompatibleNetworkError,
    InvalidStateError,
    InvalidTransformError,
    LayoutError,
    OpenNetworkError,
)
from opnet.models.boundary import BoundaryOperation
from opnet.models.layout import IndexLayout
from opnet.models.network import Network, ProcessOperator
from opnet.models.operations import SequentialOperation
from tests.conftest import (
    random_circuit,
    random_density,
    random_instrument,
    random_measurement,
    random_preparation,
    random_process_operator,
    random_symmetric,
    random_symmetric_unitary,
    random_unitary,
)


def born_network(rho, meas: SequentialOperation) -> Network:
    net = Network()
    net.add_node("prep", cp_to_boundary(SequentialOperation.preparation({"0": rho})))
    net.add_node("meas", cp_to_boundary(meas))
    net.connect(("meas", "A"), ("prep", "A"))
    return net


def random_boundary(layout: IndexLayout, n: int, rng) -> BoundaryOperation:
    ops = [random_density(layout.size, rng) for _ in range(n)]
    return BoundaryOperation(layout, [(str(k), m) for k, m in enumerate(ops)]).normalized()


def test_connect_preparation_and_measurement(rng):
    rho = random_density(2, rng)
    meas = random_measurement(2, 2, rng)
    link = connect(
        cp_to_boundary(meas),
        cp_to_boundary(SequentialOperation.preparation({"0": rho})),
        "A",
        "A",
        make_wire(2, None, ("x", "y")),
    )
    assert link.layout.ids == ()
    assert link.labels == ("0|0", "1|0")
    for label, effect in meas.effects().items():
        p = np.real(link.outcome(f"{label}|0")[0, 0])
        assert p == pytest.approx(np.real(np.trace(rho @ effect)), abs=1e-12)


def test_connect_identity_channels_is_identity():
    one = cp_to_boundary(SequentialOperation.identity(2, "A", "B"))
    two = cp_to_boundary(SequentialOperation.identity(2, "C", "D"))
    chained = connect(one, two, "B", "C", make_wire(2, None, ("x", "y")))
    assert chained.layout.ids == ("A", "D")
    assert np.allclose(chained.outcome("0|0"), 4 * linalg.max_entangled(2))


def test_connect_matches_sequential_composition(rng):
    m = random_instrument(2, 2, 2, rng, "A", "B")
    n = random_instrument(2, 2, 2, rng, "B", "C")
    s = random_symmetric(2, rng)
    wire = make_wire(2, s, ("x", "y"))
    chained = connect(cp_to_boundary(n), cp_to_boundary(m, s), "B", "B", wire)
    assert chained.layout.ids == ("C", "A")
    composed = cp_to_boundary(compose_sequential(m, n)).reorder(["C", "A"])
    for label in chained.labels:
        i, j = label.split("|")
        assert np.allclose(chained.outcome(label), composed.outcome(f"{j}|{i}"), atol=1e-10)


def test_connect_orthogonal_is_null():
    meas = cp_to_boundary(SequentialOperation.measurement({"1": np.diag([0.0, 2.0])}))
    prep = cp_to_boundary(SequentialOperation.preparation({"0": np.diag([1.0, 0.0])}))
    link = connect(meas, prep, "A", "A", make_wire(2, None, ("x", "y")))
    assert link.is_null


def test_connect_many_primes_clashing_ids(rng):
    a = random_boundary(IndexLayout.of(("X", 2), ("Y", 2)), 1, rng)
    b = random_boundary(IndexLayout.of(("Y", 2), ("X", 2)), 1, rng)
    out = connect_many(a, b, [("Y", "Y", make_wire(2, None, ("p", "q")))])
    assert out.layout.ids == ("X", "X'")
    with pytest.raises(LayoutError):
        connect_many(a, b, [])


def test_close_ports_loop():
    op = cp_to_boundary(SequentialOperation.identity(2))
    closed = close_ports(op, "A", "B", make_wire(2, None, ("A", "B")))
    assert closed.layout.ids == ()
    assert closed.labels == ("0",)
    assert np.real(closed.outcome("0")[0, 0]) == pytest.approx(1.0)


def test_evaluate_born_network(rng):
    rho = random_density(3, rng)
    meas = random_measurement(3, 3, rng)
    dist = evaluate_network(born_network(rho, meas))
    assert dist.names == ("meas", "prep")
    for label, effect in meas.effects().items():
        assert abs(dist[(label, "0")] - np.real(np.trace(rho @ effect))) < 1e-12


def test_evaluate_matches_circuit(rng):
    for dims in ([2], [2, 3], [2, 2, 2]):
        prep, middles, meas = random_circuit(rng, dims)
        cuts = [random_symmetric(d, rng) for d in dims]
        net = network_from_circuit(prep, middles, meas, cuts)
        expected = circuit_probability_sequential(prep, middles, meas)
        assert evaluate_network(net).max_abs_difference(expected) < 1e-9


def test_evaluate_generalized_circuit(rng):
    prep, middles, meas = random_circuit(rng, [2, 2], standard=False)
    net = network_from_circuit(prep, middles, meas)
    expected = circuit_probability_sequential(prep, middles, meas)
    assert evaluate_network(net).max_abs_difference(expected) < 1e-9


def test_evaluate_incompatible():
    meas = SequentialOperation.measurement({"1": np.diag([0.0, 2.0])})
    with pytest.raises(IncompatibleNetworkError, match="null event"):
        evaluate_network(born_network(np.diag([1.0, 0.0]), meas))


def test_evaluate_requires_closed_network(rng):
    net = Network()
    net.add_node("prep", cp_to_boundary(random_preparation(2, 1, rng)))
    with pytest.raises(OpenNetworkError):
        evaluate_network(net)
    with pytest.raises(LayoutError):
        evaluate_network(Network())


def test_evaluate_loop():
    net = Network()
    net.add_node("loop", cp_to_boundary(SequentialOperation.identity(2)))
    net.connect(("loop", "A"), ("loop", "B"))
    assert evaluate_network(net)[("0",)] == pytest.approx(1.0)


def test_contraction_order_independence(rng):
    prep, middles, meas = random_circuit(rng, [2, 2, 3])
    net = network_from_circuit(prep, middles, meas)
    default = evaluate_network(net)
    backwards = evaluate_network(net, list(reversed(contraction_plan(net).steps)))
    assert default.max_abs_difference(backwards) < 1e-10
    with pytest.raises(LayoutError):
        evaluate_network(net, contraction_plan(net).steps[:1])


def test_plan_of_chain_goes_left_to_right(rng):
    prep, middles, meas = random_circuit(rng, [2, 2, 2])
    net = network_from_circuit(prep, middles, meas)
    plan = contraction_plan(net)
    pairs = [sorted({end[0] for end in net.wire_by_key(key).ends}) for key in plan]
    assert pairs == [["op0", "op1"], ["op1", "op2"], ["op2", "op3"]]
    assert plan.sizes == (2, 2, 1)


def test_plan_of_star_keeps_center_last():
    center = BoundaryOperation.unit(IndexLayout.of(("p", 2), ("q", 2), ("r", 2)))
    net = Network()
    net.add_node("z", center)
    for leaf, port in (("a", "p"), ("b", "q"), ("c", "r")):
        net.add_node(leaf, BoundaryOperation.unit(IndexLayout.single("x", 2)))
        net.connect((leaf, "x"), ("z", port))
    plan = contraction_plan(net)
    leaves = [min(end[0] for end in net.wire_by_key(key).ends) for key in plan]
    assert leaves == ["a", "b", "c"]
    assert plan.sizes == (4, 2, 1)
    assert evaluate_network(net)[("1", "1", "1", "1")] == pytest.approx(1.0)


def test_plan_of_ring_is_bounded():
    net = Network()
    nodes = ["n0", "n1", "n2", "n3", "n4"]
    for node in nodes:
        net.add_node(node, BoundaryOperation.unit(IndexLayout.of(("in", 2), ("out", 2))))
    for k, node in enumerate(nodes):
        net.connect((nodes[(k + 1) % len(nodes)], "in"), (node, "out"))
    plan = contraction_plan(net)
    assert plan.peak_dimension <= 4 * 4
    assert evaluate_network(net).probabilities() == pytest.approx([1.0])


def test_parallel_wires_and_merge(rng):
    a = random_boundary(IndexLayout.of(("x", 2), ("y", 2)), 2, rng)
    b = random_boundary(IndexLayout.of(("u", 2), ("v", 2)), 3, rng)
    net = Network({"a": a, "b": b})
    s = random_symmetric(2, rng)
    net.connect(("a", "x"), ("b", "u"), s=s)
    net.connect(("b", "v"), ("a", "y"))
    merged = merge_wires(net, net.wires[0], net.wires[1].key)
    assert len(merged.wires) == 1
    assert merged.nodes["a"].layout.ids == ("x+y",)
    assert evaluate_network(merged).max_abs_difference(evaluate_network(net)) < 1e-10


def test_network_port_rules(rng):
    net = Network({"a": BoundaryOperation.unit(IndexLayout.of(("x", 2), ("y", 3)))})
    net.add_node("b", BoundaryOperation.unit(IndexLayout.single("x", 2)))
    with pytest.raises(LayoutError):
        net.connect(("a", "y"), ("b", "x"))
    net.connect(("a", "x"), ("b", "x"))
    with pytest.raises(LayoutError):
        net.connect(("a", "x"), ("a", "y"))
    with pytest.raises(LayoutError):
        net.add_node("a", BoundaryOperation.unit(IndexLayout.single("x", 2)))
    assert net.open_ports == [("a", "y")]


def test_sample_outcomes_reproducible():
    meas = SequentialOperation.measurement({"0": np.diag([1.0, 0.0]), "1": np.diag([0.0, 1.0])})
    net = born_network(np.eye(2) / 2, meas)
    draws = sample_outcomes(net, seed=7, n=10000)
    assert draws == sample_outcomes(net, seed=7, n=10000)
    ones = sum(1 for outcome in draws if outcome[0] == "1")
    assert abs(ones - 5000) < 5 * 50
    certain = born_network(np.diag([1.0, 0.0]), meas)
    assert set(sample_outcomes(certain, seed=1, n=50)) == {("0", "0")}


def test_process_operator_of_born_network(rng):
    rho = random_density(2, rng)
    net = born_network(rho, random_measurement(2, 2, rng))
    w = process_operator_for(net, {"meas"})
    assert w.layout.ids == (("meas", "A"),)
    assert np.allclose(w.w, rho, atol=1e-12)


def test_process_operator_probabilities(rng):
    prep, middles, meas = random_circuit(rng, [2, 2])
    net = network_from_circuit(prep, middles, meas, [random_symmetric(2, rng), None])
    w = process_operator_for(net, {"op1", "op2"})
    assert [port[0] for port in w.layout.ids] == ["op1", "op1", "op2"]
    via_w = probabilities_from_process(w, [net.nodes["op1"], net.nodes["op2"]], ["op1", "op2"])
    direct = evaluate_network(net).marginal([1, 2])
    assert via_w.max_abs_difference(direct) < 1e-9


def test_process_operator_conditioning(rng):
    prep, middles, meas = random_circuit(rng, [2, 2])
    net = network_from_circuit(prep, middles, meas)
    conditioned = process_operator_for(net, {"op2"}, conditions={"op1": "1"})
    dist = probabilities_from_process(conditioned, [net.nodes["op2"]])
    joint = evaluate_network(net).marginal([1, 2])
    p_mid = joint.marginal([0])["1"]
    for label in meas.labels:
        assert dist[(label,)] == pytest.approx(joint[("1", label)] / p_mid, abs=1e-9)

    both = process_operator_for(net, {"op1", "op2"})
    ports = [port for port in both.layout.ids if port[0] == "op1"]
    via_condition = condition_process(both, net.nodes["op1"], ports, "1")
    assert np.allclose(via_condition.w, conditioned.w, atol=1e-9)


def test_process_operator_rejects_bad_selection(rng):
    net = born_network(np.eye(2) / 2, random_measurement(2, 2, rng))
    with pytest.raises(LayoutError):
        process_operator_for(net, set())
    with pytest.raises(LayoutError):
        process_operator_for(net, {"nobody"})
    with pytest.raises(LayoutError):
        process_operator_for(net, {"meas"}, conditions={"meas": "0"})


def test_process_operator_validation():
    with pytest.raises(InvalidStateError):
        ProcessOperator(IndexLayout.single("A", 2), np.diag([0.5, 0.6]))
    with pytest.raises(InvalidStateError):
        ProcessOperator(IndexLayout.single("A", 2), np.diag([1.5, -0.5]))


def test_probabilities_from_process_incompatible():
    w = ProcessOperator(IndexLayout.single("A", 2), np.diag([1.0, 0.0]))
    op = BoundaryOperation.single(IndexLayout.single("A", 2), np.diag([0.0, 2.0]))
    with pytest.raises(IncompatibleNetworkError):
        probabilities_from_process(w, [op])
    with pytest.raises(LayoutError):
        probabilities_from_process(w, [op, op])


def test_ring_operation_of_state():
    rho = np.array([[0.75, 0.25j], [-0.25j, 0.25]])
    w = ProcessOperator(IndexLayout.single("A", 2), rho)
    ring = ring_operation_from_w(w)
    assert ring.labels == ("R",)
    assert np.allclose(ring.outcome("R"), 2 * rho.T)
    trivial = ring_operation_from_w(ProcessOperator(IndexLayout.trivial(), np.ones((1, 1))))
    assert np.allclose(trivial.outcome("R"), np.ones((1, 1)))


def test_close_with_ring(rng):
    layout = IndexLayout.of(("A1", 2), ("B2", 2), ("C1", 2))
    w = random_process_operator(layout, rng)
    first = random_boundary(IndexLayout.of(("in", 2), ("out", 2)), 2, rng)
    second = random_boundary(IndexLayout.single("x", 2), 3, rng)
    s = [random_symmetric(2, rng), None, random_symmetric_unitary(2, rng)]
    net = close_with_ring(w, [("first", first), ("second", second)], s)
    expected = probabilities_from_process(w, [first, second], ["first", "second"])
    assert evaluate_network(net).marginal([0, 2]).max_abs_difference(expected) < 1e-9


def test_realize_via_postselection(rng):
    ports = [("alice", "A1"), ("alice", "B2"), ("bob", "C1"), ("bob", "D2")]
    layout = IndexLayout(tuple((port, 2) for port in ports))
    w = random_process_operator(layout, rng)
    s = [
        random_symmetric_unitary(2, rng),
        None,
        random_symmetric(2, rng),
        random_symmetric(2, rng, -1),
    ]
    net = realize_via_postselection(w, s)
    assert sorted(net.nodes) == ["alice", "bob", "postselect", "source"]
    assert net.nodes["postselect"].labels == ("ok",)
    assert net.closed
    realized = process_operator_for(net, {"alice", "bob"})
    assert realized.layout.ids == w.layout.ids
    assert np.allclose(realized.w, w.w, atol=1e-9)


def test_realize_maximally_mixed():
    layout = IndexLayout.of((("alice", "A1"), 2), (("alice", "B2"), 2))
    w = ProcessOperator(layout, np.eye(4) / 4)
    net = realize_via_postselection(w)
    assert sorted(net.nodes) == ["alice", "postselect", "source"]
    postselected = net.nodes["postselect"].layout.ids
    assert postselected == ("alice.A1>", "alice.A1'>", "alice.B2>", "alice.B2'>")
    assert np.allclose(process_operator_for(net, {"alice"}).w, np.eye(4) / 4)


def test_realize_rejects_non_symmetric_s():
    layout = IndexLayout.of((("alice", "A1"), 2), (("alice", "B2"), 2))
    w = ProcessOperator(layout, np.eye(4) / 4)
    s = [np.array([[1.0, 2.0], [0.0, 1.0]]), None]
    with pytest.raises(InvalidTransformError):
        realize_via_postselection(w, s)


def test_network_from_circuit_groups_parallel_systems(rng):
    prep = compose_parallel(random_preparation(2, 2, rng), random_preparation(2, 1, rng))
    channel = SequentialOperation.unitary(
        np.kron(random_unitary(2, rng), np.eye(2)),
        prep.output_layout,
        IndexLayout.of(("B", 2), ("C", 2)),
    )
    meas = random_measurement(4, 2, rng, system=IndexLayout.of(("B", 2), ("C", 2)))
    net = network_from_circuit(prep, [channel], meas)
    assert net.nodes["op0"].layout.ids == ("A+A'",)
    assert net.nodes["op1"].layout.ids == ("A+A'", "B+C")
    expected = circuit_probability_sequential(prep, [channel], meas)
    assert evaluate_network(net).max_abs_difference(expected) < 1e-9
