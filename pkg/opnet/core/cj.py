"""Isomorphism between sequential operations and boundary operations"""
import logging
from typing import Hashable, Optional, Sequence, Tuple, Union

import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.errors import (
    InvalidOperationError,
    InvalidTransformError,
    LayoutError,
    NullCompositionError,
    NullUpdateError,
)
from opnet.models.boundary import BoundaryOperation, WireState
from opnet.models.layout import IndexLayout, SystemId, as_square
from opnet.models.operations import (
    KrausSet,
    SequentialOperation,
    StatePair,
    UpdateKernel,
    kraus_from_psd,
)
from opnet.models.symmetry import SymmetryTransform

logger = logging.getLogger(__name__)

MatrixLike = Union[np.ndarray, SymmetryTransform, None]


def symmetry_matrix(s: MatrixLike, dim: int) -> np.ndarray:
    """S as a matrix of the given dimension, identity when absent"""
    if s is None:
        return np.eye(dim, dtype=np.complex128)
    if isinstance(s, SymmetryTransform):
        s = s.s
    s = as_square(s, "S")
    if s.shape[0] != dim:
        raise LayoutError(f"S has dimension {s.shape[0]}, expected {dim}")
    return s


def make_wire(d: int, s: MatrixLike, ends: Tuple[Hashable, Hashable]) -> WireState:
    """
    wire state (I x S^-1dagger)|phi+> with S rescaled to Tr(S^-1dagger S^-1) = d

    S must be symmetric or antisymmetric, so that the projector is unchanged when
    the ends are exchanged.
    """
    s = symmetry_matrix(s, d)
    if linalg.smallest_singular_ratio(s) <= config.settings.invertibility_ratio:
        raise InvalidTransformError("wire symmetry operator S is singular")
    if not linalg.transpose_sign(s):
        raise InvalidTransformError(
            "wire symmetry operator S must satisfy S = S^T or S = -S^T"
        )
    s_inv = np.linalg.inv(s)
    scale = np.sqrt(linalg.real_trace(linalg.dagger(s_inv) @ s_inv) / d)
    s = s * scale
    s_inv = s_inv / scale
    logger.debug("wire of dimension %d between %r and %r", d, *ends)
    vector = np.kron(np.eye(d), linalg.dagger(s_inv)) @ linalg.max_entangled_vector(d)
    end_a, end_b = ends
    return WireState(end_a, end_b, s, np.outer(vector, np.conj(vector)))


def _output_ids(op: SequentialOperation, output_ids: Optional[Sequence[SystemId]]):
    if output_ids is not None:
        if len(output_ids) != len(op.output_layout):
            raise LayoutError("one output id per output system is required")
        return IndexLayout(tuple(zip(output_ids, op.output_layout.dims)))
    clash = set(op.input_layout.ids) & set(op.output_layout.ids)
    return op.output_layout.rename(lambda sid: f"{sid}'" if sid in clash else sid)


def cp_to_boundary(
    op: SequentialOperation,
    s_b: MatrixLike = None,
    output_ids: Optional[Sequence[SystemId]] = None,
) -> BoundaryOperation:
    """
    Boundary operation on (inputs, outputs) of a sequential operation.

    Each outcome becomes d_A d_B (I x S)[M_i(phi+)]^T(I x S)^dagger, normalized
    by the same expression for M-bar. Output systems sharing an id with an input
    system get a trailing prime unless ``output_ids`` is given.
    """
    d_a, d_b = op.input_dim, op.output_dim
    lift = np.kron(np.eye(d_a), symmetry_matrix(s_b, d_b))
    dressed = []
    for _, kraus in op.outcomes:
        vecs = np.transpose(kraus.operators, (0, 2, 1)).reshape(kraus.count, -1)
        choi = vecs.T @ np.conj(vecs) / d_a
        dressed.append(lift @ choi.T @ linalg.dagger(lift))
    norm = linalg.real_trace(np.sum(dressed, axis=0))
    if norm <= config.settings.null_threshold(d_a, d_b):
        raise InvalidOperationError("cannot map the null operation to a boundary operation")
    layout = op.input_layout + _output_ids(op, output_ids)
    scale = d_a * d_b / norm
    operators = [linalg.hermitian_part(m) * scale for m in dressed]
    return BoundaryOperation(layout, list(zip(op.labels, operators)))


def _split(b: BoundaryOperation, inputs: Optional[Sequence[SystemId]]):
    ids = list(b.layout.ids)
    if inputs is None:
        inputs = ids[:-1]
    inputs = list(inputs)
    for sid in inputs:
        b.layout.index(sid)
    outputs = [sid for sid in ids if sid not in inputs]
    return inputs, outputs


def boundary_to_cp(
    b: BoundaryOperation,
    s_b: MatrixLike = None,
    inputs: Optional[Sequence[SystemId]] = None,
) -> SequentialOperation:
    """
    Sequential operation inputs -> outputs of a boundary operation.

    ``inputs`` names the past systems; by default every system but the last.
    """
    inputs, outputs = _split(b, inputs)
    ordered = b.reorder([*inputs, *outputs])
    in_layout = IndexLayout(tuple((sid, b.layout.dim(sid)) for sid in inputs))
    out_layout = IndexLayout(tuple((sid, b.layout.dim(sid)) for sid in outputs))
    d_a, d_b = in_layout.size, out_layout.size
    s_inv = np.linalg.inv(symmetry_matrix(s_b, d_b))
    lower = np.kron(np.eye(d_a), s_inv)

    maps = []
    for label, m in ordered.outcomes:
        choi = (lower @ m @ linalg.dagger(lower)).T
        vecs = kraus_from_psd(choi, as_columns=True)[:, :, 0]
        ops = np.sqrt(d_a) * np.transpose(vecs.reshape(-1, d_a, d_b), (0, 2, 1))
        maps.append((label, KrausSet.from_operators(ops)))
    return SequentialOperation(in_layout, out_layout, maps).normalized()


def _oriented(wire: WireState, port: Hashable) -> WireState:
    """wire with ``port`` as its second end"""
    if wire.end_b == port:
        return wire
    if wire.end_a == port:
        return wire.swapped()
    raise LayoutError(f"{port!r} is not an end of wire {wire.ends}")


def _through_wire(x: np.ndarray, wire: WireState) -> np.ndarray:
    """Tr_b[(I x X) Phi]: operator on end a from an operator X on end b"""
    d = wire.dim
    phi = wire.state.reshape(d, d, d, d)
    return np.einsum("qt,ptrq->pr", x, phi)


def boundary_apply(
    b: BoundaryOperation,
    s: StatePair,
    wire: WireState,
    outcome: Optional[str] = None,
) -> StatePair:
    """
    State on the free end of ``wire`` after applying b to s.

    The wire's second end must be a system of b; every other system of b is fed
    by s. ``outcome`` selects the operator, the total operator by default.
    """
    future = wire.end_b
    if future not in b.layout:
        raise LayoutError(f"wire end {future!r} is not a system of the boundary operation")
    past = [sid for sid in b.layout.ids if sid != future]
    ordered = b.reorder([*past, future])
    d_a = ordered.dim // wire.dim
    if d_a != s.dim or b.layout.dim(future) != wire.dim:
        raise LayoutError("state, boundary operation and wire dimensions do not match")

    def image(m: np.ndarray, rho: np.ndarray) -> np.ndarray:
        x = np.einsum("abcd,ca->bd", m.reshape(d_a, wire.dim, d_a, wire.dim), rho)
        return _through_wire(x, wire)

    m = ordered.total() if outcome is None else ordered.outcome(outcome)
    kappa = image(m, s.rho)
    kappa_bar = image(ordered.total(), s.rho_bar)
    norm = linalg.real_trace(kappa_bar)
    if norm < config.settings.null_threshold(b.dim):
        raise NullCompositionError("applying the boundary operation is the null event")
    return StatePair(
        linalg.hermitian_part(kappa) / norm, linalg.hermitian_part(kappa_bar) / norm
    )


def induced_preparation(
    b: BoundaryOperation, port: Hashable, wire: WireState
) -> SequentialOperation:
    """preparation on the far end of ``wire`` induced by b, Tr_B(Phi N_j) / Tr(Phi N-bar)"""
    if b.layout.ids != (port,):
        raise LayoutError("induced preparation needs a boundary operation on exactly one port")
    wire = _oriented(wire, port)
    states = {label: _through_wire(m, wire) for label, m in b.outcomes}
    norm = linalg.real_trace(sum(states.values()))
    if norm < config.settings.null_threshold(b.dim):
        raise NullCompositionError("the induced preparation is the null event")
    return SequentialOperation.preparation(
        {label: linalg.hermitian_part(rho) / norm for label, rho in states.items()},
        IndexLayout.single(wire.end_a, wire.dim),
    )


def update_boundary_operation(b: BoundaryOperation, k: UpdateKernel) -> BoundaryOperation:
    """M'_j = d sum_i T(j,i) M_i / sum_{j,i} T(j,i) Tr M_i"""
    if k.old_count != len(b.outcomes):
        raise InvalidOperationError(
            f"kernel has {k.old_count} columns for {len(b.outcomes)} outcomes"
        )
    ops = b.operators
    traces = np.real(np.trace(ops, axis1=1, axis2=2))
    total = float(np.sum(k.t @ traces))
    if total < config.settings.null_threshold(b.dim):
        raise NullUpdateError("update kernel selects only null outcomes")
    updated = np.einsum("ji,iab->jab", k.t, ops) * (b.dim / total)
    return BoundaryOperation(b.layout, list(zip(k.labels, updated)))
