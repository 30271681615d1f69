"""Causality and signaling diagnostics"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.core.cj import cp_to_boundary
from opnet.core.network import probabilities_from_process, process_operator_for
from opnet.core.sequential import joint_probability
from opnet.core.symmetry import transform_effect_to_state
from opnet.errors import (
    IncompatibleNetworkError,
    InvalidStateError,
    LayoutError,
    NullCompositionError,
)
from opnet.models.boundary import BoundaryOperation
from opnet.models.causal import CausalityReport, Order, Party, SignalingReport
from opnet.models.layout import IndexLayout, as_matrix, as_square
from opnet.models.network import Network, ProcessOperator
from opnet.models.operations import EffectPair, OutcomeDistribution, SequentialOperation
from opnet.models.symmetry import SymmetryTransform

logger = logging.getLogger(__name__)

Family = Union[Sequence[BoundaryOperation], Mapping[str, BoundaryOperation]]

ALICE_BOB_PORTS = ("A1", "B2", "C1", "D2")


def check_causality_axiom(
    prep: SequentialOperation, meas_family: Sequence[SequentialOperation]
) -> CausalityReport:
    """
    Largest total-variation distance between preparation marginals.

    Each measurement of the family is composed with the preparation; null
    compositions are skipped and their family indices reported.
    """
    marginals, skipped = [], []
    for k, meas in enumerate(meas_family):
        try:
            marginals.append(joint_probability(prep, meas).marginal([0]))
        except NullCompositionError:
            logger.info("measurement %d is incompatible with the preparation", k)
            skipped.append(k)
    deviation = max(
        (a.total_variation(b) for a, b in itertools.combinations(marginals, 2)), default=0.0
    )
    return CausalityReport(deviation=deviation, skipped=skipped)


def _family_items(family: Family) -> List[Tuple[str, BoundaryOperation]]:
    if isinstance(family, Mapping):
        return [(str(label), op) for label, op in family.items()]
    return [(str(k), op) for k, op in enumerate(family)]


def _party_order(w: ProcessOperator, parties: Sequence[Party]) -> ProcessOperator:
    ports = [pid for party in parties for pid in party.ports]
    if sorted(map(repr, ports)) != sorted(map(repr, w.layout.ids)):
        raise LayoutError("parties must partition the ports of the process operator")
    return w.reorder(ports)


def signaling_strength(
    w: ProcessOperator,
    parties: Sequence[Party],
    families: Mapping[str, Family],
    max_workers: Optional[int] = None,
) -> SignalingReport:
    """
    Directional signaling strengths over finite operation families.

    Every combination of family members is evaluated against W; incompatible
    combinations are skipped and recorded. ``max_workers`` above one spreads the
    combinations over a thread pool.
    """
    names = [party.name for party in parties]
    if len(set(names)) != len(names) or set(families) != set(names):
        raise LayoutError("one operation family per uniquely named party is required")
    w = _party_order(w, parties)
    items = {name: _family_items(families[name]) for name in names}
    for name in names:
        if not items[name]:
            raise LayoutError(f"party {name!r} has an empty family")

    combos = list(itertools.product(*[range(len(items[name])) for name in names]))

    def evaluate(combo) -> Optional[OutcomeDistribution]:
        ops = [items[name][k][1] for name, k in zip(names, combo)]
        try:
            return probabilities_from_process(w, ops, names)
        except IncompatibleNetworkError:
            return None

    workers = config.settings.max_workers if max_workers is None else max_workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(evaluate, combos))
    else:
        results = [evaluate(combo) for combo in combos]

    skipped = [
        tuple(items[name][k][0] for name, k in zip(names, combo))
        for combo, dist in zip(combos, results)
        if dist is None
    ]
    if len(skipped) == len(combos):
        raise IncompatibleNetworkError("every family combination is incompatible (null event)")

    directions = {}
    for s, sender in enumerate(names):
        for r, receiver in enumerate(names):
            if s == r:
                continue
            groups: Dict[tuple, List[OutcomeDistribution]] = {}
            for combo, dist in zip(combos, results):
                if dist is not None:
                    rest = combo[:s] + combo[s + 1:]
                    groups.setdefault(rest, []).append(dist.marginal([r]))
            directions[(sender, receiver)] = max(
                (
                    a.total_variation(b)
                    for group in groups.values()
                    for a, b in itertools.combinations(group, 2)
                ),
                default=0.0,
            )
    return SignalingReport(
        directions=directions,
        families={name: tuple(label for label, _ in items[name]) for name in names},
        skipped=skipped,
    )


def _check_density(rho: np.ndarray, d: int) -> np.ndarray:
    rho = as_square(rho, "rho")
    if rho.shape[0] != d:
        raise LayoutError(f"rho has dimension {rho.shape[0]}, expected {d}")
    if not linalg.is_psd(rho):
        raise InvalidStateError("rho is not positive semidefinite")
    if abs(linalg.real_trace(rho) - 1) > config.settings.normalization_tolerance:
        raise InvalidStateError("rho must have unit trace")
    return rho


def alice_bob_example(rho, d: int) -> ProcessOperator:
    """
    Equal mixture of the two fixed orders between Alice (A1 -> B2) and Bob (C1 -> D2).

    W = 1/2 rho(A1) phi+(B2 C1) I(D2)/d + 1/2 rho(C1) phi+(D2 A1) I(B2)/d
    """
    rho = _check_density(rho, d)
    layout = IndexLayout(tuple((port, d) for port in ALICE_BOB_PORTS))
    phi = linalg.max_entangled(d)
    first = linalg.kron_all([rho, phi, np.eye(d) / d])
    second = linalg.kron_all([rho, phi, np.eye(d) / d])
    second = linalg.permute_systems(
        second, layout.reorder(["C1", "D2", "A1", "B2"]), ALICE_BOB_PORTS
    )
    return ProcessOperator(layout, (first + second) / 2)


def fixed_order_w(
    channel: SequentialOperation, rho, order: Union[Order, str] = Order.a_first
) -> ProcessOperator:
    """
    Process operator of a fixed-order circuit on the ports A1, B2, C1, D2.

    rho feeds the first party's input, the channel joins the first party's
    output to the second party's input and the second party's output is
    discarded.
    """
    order = Order(order)
    d = channel.input_dim
    if channel.output_dim != d:
        raise LayoutError("channel must map a system to one of the same dimension")
    rho = _check_density(rho, d)
    link = cp_to_boundary(channel, output_ids=["out"])
    link = link.rename({channel.input_layout.ids[0]: "in"})
    if link.layout.ids != ("in", "out"):
        raise LayoutError("channel must act on a single input and a single output system")
    prep = cp_to_boundary(SequentialOperation.preparation({"0": rho}, "out"))
    slot_a = BoundaryOperation.unit(IndexLayout.of(("A1", d), ("B2", d)))
    slot_b = BoundaryOperation.unit(IndexLayout.of(("C1", d), ("D2", d)))
    first, second = ("alice", "bob") if order == Order.a_first else ("bob", "alice")
    in_port = {"alice": "A1", "bob": "C1"}
    out_port = {"alice": "B2", "bob": "D2"}

    net = Network()
    net.add_node("alice", slot_a)
    net.add_node("bob", slot_b)
    net.add_node("prep", prep)
    net.add_node("channel", link)
    net.add_node("discard", BoundaryOperation.unit(IndexLayout.single("in", d)))
    net.connect((first, in_port[first]), ("prep", "out"))
    net.connect(("channel", "in"), (first, out_port[first]))
    net.connect((second, in_port[second]), ("channel", "out"))
    net.connect(("discard", "in"), (second, out_port[second]))
    return process_operator_for(net, {"alice", "bob"}).rename(lambda port: port[1])


def two_state_process(psi, phi, s=None) -> ProcessOperator:
    """
    Process operator of a slot between a pre-selected and a post-selected pure state.

    The slot input A1 holds |psi><psi|, the output B2 the time-reversed image of
    the effect |phi><phi|.
    """
    psi = as_matrix(np.reshape(psi, (-1, 1)), "psi")[:, 0]
    phi = as_matrix(np.reshape(phi, (-1, 1)), "phi")[:, 0]
    for name, v in (("psi", psi), ("phi", phi)):
        if np.linalg.norm(v) == 0:
            raise InvalidStateError(f"{name} is the zero vector")
    rho = np.outer(psi, np.conj(psi)) / np.vdot(psi, psi).real
    d = phi.shape[0]
    effect = d * np.outer(phi, np.conj(phi)) / np.vdot(phi, phi).real
    t = SymmetryTransform.time_reversal(s, dim=d)
    future = transform_effect_to_state(EffectPair.deterministic(effect), t).rho
    layout = IndexLayout.of(("A1", rho.shape[0]), ("B2", d))
    return ProcessOperator(layout, np.kron(rho, future))
