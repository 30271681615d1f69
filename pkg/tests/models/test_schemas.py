import numpy as np
import pytest

from opnet.core.causal import ALICE_BOB_PORTS, alice_bob_example
from opnet.core.network import evaluate_network
from opnet.core.symmetry import reverse_circuit
from opnet.errors import ChainError, DocumentError
from opnet.models.decompose import (
    chain_document,
    chain_from_document,
    dump_document,
    families_from_document,
    matrix_from_doc,
    matrix_to_doc,
    network_from_document,
    parse_document,
    process_from_document,
    process_to_document,
    read_document,
)
from opnet.models.layout import IndexLayout
from opnet.models.schemas import (
    FamiliesDocument,
    NetworkDocument,
    NodeKind,
    ProcessOperatorDocument,
)
from opnet.models.symmetry import SymmetryTransform
from tests.conftest import random_process_operator


def test_parse_born_document(load_test_data):
    doc = parse_document(load_test_data("born.json"), NetworkDocument)
    assert [node.id for node in doc.nodes] == ["prep", "meas"]
    assert doc.nodes[0].kind == NodeKind.sequential
    assert doc.selections == ["meas"]
    net = network_from_document(doc)
    assert set(net.nodes) == {"prep", "meas"}
    assert len(net.wires) == 1
    dist = evaluate_network(net)
    assert dist.names == ("meas", "prep")
    assert dist[("+", "0")] == pytest.approx(0.5, abs=1e-12)
    assert dist[("-", "0")] == pytest.approx(0.5, abs=1e-12)


def test_parse_json_text(load_test_data, data_path):
    with open(data_path("born.json")) as f:
        doc = parse_document(f.read(), NetworkDocument)
    assert doc == read_document(data_path("born.json"), NetworkDocument)


def test_sequential_output_must_be_wire_end_b(load_test_data):
    data = load_test_data("born.json")
    data["wires"] = [{"a": ["prep", "A"], "b": ["meas", "A"]}]
    with pytest.raises(DocumentError):
        parse_document(data, NetworkDocument)


def test_malformed_documents(load_test_data):
    with pytest.raises(DocumentError):
        parse_document(load_test_data("malformed.json"), NetworkDocument)

    data = load_test_data("born.json")
    data["nodes"][0]["outputs"] = ["Z"]
    with pytest.raises(DocumentError):
        parse_document(data, NetworkDocument)

    data = load_test_data("born.json")
    data["nodes"][1]["outcomes"][0]["operator"] = [[[1, 0]]]
    with pytest.raises(DocumentError):
        parse_document(data, NetworkDocument)

    data = load_test_data("born.json")
    data["nodes"][1]["kind"] = "boundary"
    with pytest.raises(DocumentError):
        parse_document(data, NetworkDocument)

    data = load_test_data("born.json")
    data["wires"][0]["s"] = [[[1, 0], [0, 0]]]
    with pytest.raises(DocumentError):
        parse_document(data, NetworkDocument)


def test_kraus_shape_checked(load_test_data):
    data = load_test_data("born.json")
    data["nodes"][0]["outcomes"][0]["kraus"] = [[[[1, 0]]]]
    doc = parse_document(data, NetworkDocument)
    with pytest.raises(DocumentError):
        network_from_document(doc)


def test_read_document_errors(tmp_path):
    with pytest.raises(DocumentError):
        read_document(tmp_path / "missing.json", NetworkDocument)
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(DocumentError):
        read_document(broken, NetworkDocument)


def test_matrix_encoding(rng):
    m = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    assert np.array_equal(matrix_from_doc(matrix_to_doc(m)), m)


def test_process_document(rng):
    w = random_process_operator(IndexLayout.of(("A1", 2), ("B2", 3)), rng)
    doc = parse_document(dump_document(process_to_document(w)), ProcessOperatorDocument)
    assert [s.id for s in doc.layout] == ["A1", "B2"]
    back = process_from_document(doc)
    assert back.layout == w.layout
    assert np.allclose(back.w, w.w)


def test_process_document_side_checked(load_test_data):
    data = load_test_data("alice_bob_w.json")
    data["layout"][0]["dim"] = 3
    with pytest.raises(DocumentError):
        parse_document(data, ProcessOperatorDocument)


def test_alice_bob_process_document(load_test_data):
    doc = parse_document(load_test_data("alice_bob_w.json"), ProcessOperatorDocument)
    w = process_from_document(doc)
    assert w.layout.ids == ALICE_BOB_PORTS
    assert np.allclose(w.w, alice_bob_example(np.diag([1.0, 0.0]), 2).w)


def test_families_document(load_test_data):
    w = process_from_document(
        parse_document(load_test_data("alice_bob_w.json"), ProcessOperatorDocument)
    )
    doc = parse_document(load_test_data("alice_bob_families.json"), FamiliesDocument)
    parties, families = families_from_document(doc, w.layout)
    assert [p.name for p in parties] == ["alice", "bob"]
    assert list(families["bob"]) == ["release0", "release1"]
    release = families["alice"]["release1"]
    assert release.layout.ids == ("A1", "B2")
    assert release.labels == ("0", "1")
    assert release.check()


def test_chain_from_document(load_test_data):
    chain = chain_from_document(parse_document(load_test_data("chain.json"), NetworkDocument))
    assert chain.node_ids == ("prep", "mid", "meas")
    assert np.allclose(chain.cuts[0], np.eye(2))
    assert np.allclose(chain.cuts[1], [[0, 1], [1, 0]])
    assert chain.operations[1].labels == ("0", "1")


def test_chain_from_document_rejects(load_test_data):
    with pytest.raises(ChainError):
        chain_from_document(parse_document(load_test_data("cyclic.json"), NetworkDocument))
    with pytest.raises(ChainError):
        chain_from_document(parse_document(load_test_data("alice_bob.json"), NetworkDocument))
    data = load_test_data("chain.json")
    data["wires"] = data["wires"][:1]
    with pytest.raises(ChainError):
        chain_from_document(parse_document(data, NetworkDocument))


def test_reversed_chain_document(load_test_data):
    doc = parse_document(load_test_data("chain.json"), NetworkDocument)
    chain = chain_from_document(doc)
    prep, mid, meas = chain.operations
    transforms = [SymmetryTransform.time_reversal(s, dim=2) for s in chain.cuts]
    r_prep, r_middles, r_meas = reverse_circuit(prep, [mid], meas, transforms)
    reversed_doc = chain_document(doc, chain, [r_prep, *r_middles, r_meas])

    assert [node.id for node in reversed_doc.nodes] == ["meas", "mid", "prep"]
    assert reversed_doc.nodes[0].outputs == ["B"]
    assert [tuple(wire.a) for wire in reversed_doc.wires] == [("prep", "A"), ("mid", "B")]
    assert chain_from_document(reversed_doc).node_ids == ("meas", "mid", "prep")

    forward = evaluate_network(network_from_document(doc))
    backward = evaluate_network(network_from_document(reversed_doc))
    assert backward.names == forward.names
    assert backward.max_abs_difference(forward) < 1e-9
    for _, p in forward.items():
        assert p == pytest.approx(0.25, abs=1e-12)
