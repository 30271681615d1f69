"""Type-I/type-II symmetry transformations and time reversal"""
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.core.sequential import check_chain, circuit_probability_sequential
from opnet.errors import InvalidTransformError, LayoutError
from opnet.models.operations import EffectPair, KrausSet, SequentialOperation, StatePair
from opnet.models.symmetry import InvolutionReport, SymmetryTransform, TransformKind

logger = logging.getLogger(__name__)


def _require_kind(t: SymmetryTransform, kind: TransformKind):
    if t.kind != kind:
        raise InvalidTransformError(f"expected a {kind.value} transform, got {t.kind.value}")


def _require_dim(t: SymmetryTransform, dim: int):
    if t.dim != dim:
        raise LayoutError(f"transform dimension {t.dim} does not match {dim}")


def _normalize(m: np.ndarray, m_bar: np.ndarray, target: float):
    norm = linalg.real_trace(m_bar)
    assert norm > 0, "invertible S maps a unit-trace operator to a nonzero one"
    scale = target / norm
    return linalg.hermitian_part(m) * scale, linalg.hermitian_part(m_bar) * scale


def transform_state_typeI(s: StatePair, t: SymmetryTransform) -> StatePair:
    """(S rho S^dagger; S rho-bar S^dagger) / Tr(S rho-bar S^dagger)"""
    _require_kind(t, TransformKind.type_i)
    _require_dim(t, s.dim)
    return StatePair(*_normalize(t.forward(s.rho), t.forward(s.rho_bar), 1.0))


def transform_effect_typeI(e: EffectPair, t: SymmetryTransform) -> EffectPair:
    """d (S^-1dagger E S^-1; ...) / Tr(S^-1dagger E-bar S^-1)"""
    _require_kind(t, TransformKind.type_i)
    _require_dim(t, e.dim)
    return EffectPair(*_normalize(t.dual(e.e), t.dual(e.e_bar), e.dim))


def transform_state_to_effect(s: StatePair, t: SymmetryTransform) -> EffectPair:
    """d (S rho S^dagger; S rho-bar S^dagger) / Tr(S rho-bar S^dagger)"""
    _require_kind(t, TransformKind.type_ii)
    _require_dim(t, s.dim)
    return EffectPair(*_normalize(t.forward(s.rho), t.forward(s.rho_bar), s.dim))


def transform_effect_to_state(e: EffectPair, t: SymmetryTransform) -> StatePair:
    """(S^-1dagger E S^-1; ...) / Tr(S^-1dagger E-bar S^-1)"""
    _require_kind(t, TransformKind.type_ii)
    _require_dim(t, e.dim)
    return StatePair(*_normalize(t.dual(e.e), t.dual(e.e_bar), 1.0))


def time_reverse_operation(
    op: SequentialOperation, s_a: SymmetryTransform, s_b: SymmetryTransform
) -> SequentialOperation:
    """
    Time-reversed operation B -> A.

    Every kraus operator K becomes (S_B K* S_A^-1)^dagger / lambda, with lambda
    fixed by the generalized normalization of the reversed operation.
    """
    for t in (s_a, s_b):
        if t.kind != TransformKind.type_ii or not t.use_transpose:
            raise InvalidTransformError(
                "time reversal needs type-II transforms with transpose"
            )
    _require_dim(s_a, op.input_dim)
    _require_dim(s_b, op.output_dim)

    s_a_inv = s_a.s_inv
    reversed_maps = []
    for label, kraus in op.outcomes:
        ops = [
            linalg.dagger(s_b.s @ linalg.conjugate_in_basis(k, s_b.basis, s_a.basis) @ s_a_inv)
            for k in kraus
        ]
        reversed_maps.append((label, np.array(ops)))

    weight = sum(float(np.sum(np.abs(ops) ** 2)) for _, ops in reversed_maps)
    lam = np.sqrt(weight / op.output_dim)
    return SequentialOperation(
        op.output_layout,
        op.input_layout,
        [(label, KrausSet(ops / lam)) for label, ops in reversed_maps],
    )


def retrodictive_reverse_operation(op: SequentialOperation) -> SequentialOperation:
    """reversal by the adjoint maps K^dagger, renormalized"""
    outcomes = [
        (label, KrausSet(np.conj(np.transpose(kraus.operators, (0, 2, 1)))))
        for label, kraus in op.outcomes
    ]
    return SequentialOperation(op.output_layout, op.input_layout, outcomes).normalized()


def _random_pair(dim: int, rng: np.random.Generator, trace: float):
    """(X; X-bar) with 0 <= X <= X-bar and Tr X-bar = trace"""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    bar = g @ linalg.dagger(g)
    bar *= trace / linalg.real_trace(bar)
    h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    p = h @ linalg.dagger(h)
    p /= np.max(np.linalg.eigvalsh(p))
    values, vectors = np.linalg.eigh(bar)
    root = (vectors * np.sqrt(np.clip(values, 0, None))) @ linalg.dagger(vectors)
    return linalg.hermitian_part(root @ p @ root), bar


def _deviation(a, b) -> float:
    return float(
        max(np.max(np.abs(a[0] - b[0])), np.max(np.abs(a[1] - b[1])))
    )


def check_involution(
    t: SymmetryTransform,
    trials: Optional[int] = None,
    tol: float = 1e-10,
    seed: int = 0,
) -> InvolutionReport:
    """apply t twice to random states and effects and compare with the originals"""
    trials = config.settings.involution_trials if trials is None else trials
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        state = StatePair(*_random_pair(t.dim, rng, 1.0))
        effect = EffectPair(*_random_pair(t.dim, rng, float(t.dim)))
        if t.kind == TransformKind.type_i:
            state2 = transform_state_typeI(transform_state_typeI(state, t), t)
            effect2 = transform_effect_typeI(transform_effect_typeI(effect, t), t)
        else:
            state2 = transform_effect_to_state(transform_state_to_effect(state, t), t)
            effect2 = transform_state_to_effect(transform_effect_to_state(effect, t), t)
        worst = max(
            worst,
            _deviation((state.rho, state.rho_bar), (state2.rho, state2.rho_bar)),
            _deviation((effect.e, effect.e_bar), (effect2.e, effect2.e_bar)),
        )
    return InvolutionReport(
        involutive=worst <= tol, parity=t.parity, max_deviation=worst, unitary=t.is_unitary
    )


def reverse_circuit(
    prep: SequentialOperation,
    middles: Sequence[SequentialOperation],
    meas: SequentialOperation,
    transforms: Sequence[SymmetryTransform],
) -> Tuple[SequentialOperation, List[SequentialOperation], SequentialOperation]:
    """
    Time-reversed circuit: operations in reverse order, each time-reversed.

    ``transforms`` holds one transform per cut, the k-th acting on the output
    system of the k-th operation of the chain.
    """
    chain = check_chain(prep, middles, meas)
    if len(transforms) != len(chain) - 1:
        raise LayoutError(
            f"expected {len(chain) - 1} cut transforms, got {len(transforms)}"
        )
    cuts = [SymmetryTransform.trivial(), *transforms, SymmetryTransform.trivial()]
    reversed_ops = [
        time_reverse_operation(op, cuts[k], cuts[k + 1]) for k, op in enumerate(chain)
    ][::-1]
    return reversed_ops[0], reversed_ops[1:-1], reversed_ops[-1]


def verify_circuit_invariance(
    prep: SequentialOperation,
    middles: Sequence[SequentialOperation],
    meas: SequentialOperation,
    transforms: Sequence[SymmetryTransform],
) -> float:
    """max |p_forward - p_reversed| over all outcome tuples"""
    forward = circuit_probability_sequential(prep, middles, meas)
    r_prep, r_middles, r_meas = reverse_circuit(prep, middles, meas, transforms)
    backward = circuit_probability_sequential(r_prep, r_middles, r_meas)
    positions = list(range(len(middles) + 2))[::-1]
    deviation = forward.reordered(positions).max_abs_difference(backward)
    logger.debug("time reversal deviation %.3e", deviation)
    return deviation
