"""Document pydantic models"""
from enum import Enum
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, PositiveInt, root_validator, validator

DOCUMENT_VERSION = "1.0"

# rows of [re, im] pairs
Matrix = List[List[Tuple[float, float]]]


def _square(m: Matrix, name: str) -> Matrix:
    if not m or any(len(row) != len(m) for row in m):
        raise ValueError(f"{name} must be a non-empty square matrix")
    return m


class NodeKind(str, Enum):
    """how the operation of a node is given"""

    sequential = "sequential"
    boundary = "boundary"


class SystemSpec(BaseModel):
    """system id and dimension"""

    id: str
    dim: PositiveInt


class OutcomeSpec(BaseModel):
    """one outcome: kraus operators (sequential) or a positive operator (boundary)"""

    label: str
    kraus: Optional[List[Matrix]] = None
    operator: Optional[Matrix] = None

    @root_validator(skip_on_failure=True)
    def validate_outcome(cls, values):
        """exactly one representation"""
        kraus, operator = values.get("kraus"), values.get("operator")
        if (kraus is None) == (operator is None):
            raise ValueError(f"outcome {values['label']!r} needs either kraus or operator")
        if operator is not None:
            _square(operator, f"operator of outcome {values['label']!r}")
        if kraus is not None and not kraus:
            raise ValueError(f"outcome {values['label']!r} has no kraus operators")
        return values


class NodeSpec(BaseModel):
    """a node of a network document"""

    id: str
    kind: NodeKind
    inputs: List[str] = []
    outputs: List[str] = []
    ports: List[str] = []
    outcomes: List[OutcomeSpec]

    @root_validator(skip_on_failure=True)
    def validate_kind(cls, values):
        """sequential nodes split inputs/outputs, boundary nodes list ports"""
        node = values["id"]
        if not values["outcomes"]:
            raise ValueError(f"node {node!r} has no outcomes")
        if values["kind"] == NodeKind.sequential:
            if values["ports"]:
                raise ValueError(f"sequential node {node!r} uses inputs/outputs, not ports")
            if any(o.kraus is None for o in values["outcomes"]):
                raise ValueError(f"sequential node {node!r} needs kraus operators")
        else:
            if values["inputs"] or values["outputs"]:
                raise ValueError(f"boundary node {node!r} uses ports, not inputs/outputs")
            if any(o.operator is None for o in values["outcomes"]):
                raise ValueError(f"boundary node {node!r} needs an operator per outcome")
        return values

    @property
    def all_ports(self) -> List[str]:
        if self.kind == NodeKind.sequential:
            return [*self.inputs, *self.outputs]
        return list(self.ports)


class WireSpec(BaseModel):
    """wire from port a to port b, S acting on b"""

    a: Tuple[str, str]
    b: Tuple[str, str]
    s: Union[Literal["identity"], Matrix] = "identity"

    @validator("s")
    def validate_s(cls, v):
        """square S"""
        if v != "identity":
            _square(v, "wire S")
        return v


class NetworkDocument(BaseModel):
    """network of operations and wires"""

    version: str = DOCUMENT_VERSION
    systems: List[SystemSpec]
    nodes: List[NodeSpec]
    wires: List[WireSpec] = []
    selections: Optional[List[str]] = None

    @root_validator(skip_on_failure=True)
    def validate_references(cls, values):
        """ids exist and are unique, sequential outputs are second wire ends"""
        systems = [s.id for s in values["systems"]]
        nodes = {n.id: n for n in values["nodes"]}
        if len(set(systems)) != len(systems):
            raise ValueError("system ids must be unique")
        if len(nodes) != len(values["nodes"]):
            raise ValueError("node ids must be unique")
        for node in nodes.values():
            for port in node.all_ports:
                if port not in systems:
                    raise ValueError(f"node {node.id!r} references unknown system {port!r}")
            if len(set(node.all_ports)) != len(node.all_ports):
                raise ValueError(f"node {node.id!r} lists a system twice")
        for wire in values["wires"]:
            for node_id, port in (wire.a, wire.b):
                if node_id not in nodes or port not in nodes[node_id].all_ports:
                    raise ValueError(f"wire references unknown port {node_id}.{port}")
            node_id, port = wire.a
            if nodes[node_id].kind == NodeKind.sequential and port in nodes[node_id].outputs:
                raise ValueError(
                    f"output port {node_id}.{port} of a sequential node must be wire end b"
                )
        for node_id in values.get("selections") or []:
            if node_id not in nodes:
                raise ValueError(f"selection references unknown node {node_id!r}")
        return values


class ProcessOperatorDocument(BaseModel):
    """process operator with its port layout"""

    version: str = DOCUMENT_VERSION
    layout: List[SystemSpec]
    w: Matrix

    @root_validator(skip_on_failure=True)
    def validate_w(cls, values):
        """W side equals the product of the port dimensions"""
        side = 1
        for system in values["layout"]:
            side *= system.dim
        if len(_square(values["w"], "W")) != side:
            raise ValueError(f"W must have side {side}")
        return values


class FamilyMemberSpec(BaseModel):
    """one boundary operation a party may choose"""

    label: str
    outcomes: List[OutcomeSpec]

    @validator("outcomes")
    def validate_operators(cls, v):
        """boundary operators only"""
        if not v or any(o.operator is None for o in v):
            raise ValueError("family members need an operator per outcome")
        return v


class PartySpec(BaseModel):
    """a party: its ports and its operation family"""

    name: str
    ports: List[str]
    family: List[FamilyMemberSpec]


class FamiliesDocument(BaseModel):
    """operation families of the parties of a process operator"""

    version: str = DOCUMENT_VERSION
    parties: List[PartySpec]
