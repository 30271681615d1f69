"""Probability rules, composition and updates in the sequential picture"""
import logging
from typing import List, Optional, Sequence

import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.errors import (
    InvalidOperationError,
    InvalidStateError,
    LayoutError,
    NullCompositionError,
    NullUpdateError,
)
from opnet.models.layout import IndexLayout, as_square
from opnet.models.operations import (
    EffectPair,
    KrausSet,
    OutcomeDistribution,
    SequentialOperation,
    StatePair,
    UpdateKernel,
    ValidationReport,
)

logger = logging.getLogger(__name__)


def validate_operation(
    op: SequentialOperation, tol: Optional[float] = None
) -> ValidationReport:
    """check the generalized normalization and outcome positivity of an operation"""
    tol = config.settings.normalization_tolerance if tol is None else tol
    failures = []
    residual = abs(op.normalization() - 1.0)
    if residual > tol:
        failures.append(f"normalization residual {residual:.3e} exceeds {tol:.1e}")

    total_choi = op.total().choi()
    positive = {}
    for label, kraus in op.outcomes:
        choi = kraus.choi()
        positive[label] = linalg.is_psd(choi, tol) and linalg.is_psd(total_choi - choi, tol)
        if not positive[label]:
            failures.append(f"outcome {label!r} is not dominated by the total map")

    gram = op.total().gram()
    standard = bool(np.max(np.abs(gram - np.eye(op.input_dim))) <= tol)
    return ValidationReport(
        normalization_residual=residual,
        positive=positive,
        standard=standard,
        tolerance=tol,
        failures=failures,
    )


def _require_preparation(op: SequentialOperation):
    if not op.is_preparation:
        raise InvalidOperationError("expected a preparation (trivial input)")


def _require_measurement(op: SequentialOperation):
    if not op.is_measurement:
        raise InvalidOperationError("expected a measurement (trivial output)")


def joint_probability(
    prep: SequentialOperation,
    meas: SequentialOperation,
    names: Sequence[str] = ("prep", "meas"),
) -> OutcomeDistribution:
    """p(i, j) = Tr(rho_i E_j) / Tr(rho-bar E-bar)"""
    _require_preparation(prep)
    _require_measurement(meas)
    if prep.output_dim != meas.input_dim:
        raise LayoutError(
            f"preparation dimension {prep.output_dim} does not match "
            f"measurement dimension {meas.input_dim}"
        )
    states = list(prep.states().values())
    effects = list(meas.effects().values())
    weights = np.array([[np.real(np.trace(r @ e)) for e in effects] for r in states])
    total = weights.sum()
    if total < config.settings.null_threshold(prep.output_dim):
        raise NullCompositionError("their connection results in the null event")
    return OutcomeDistribution.from_array([prep.labels, meas.labels], weights, names)


def state_effect_probability(s: StatePair, e: EffectPair) -> float:
    """Tr(rho E) / Tr(rho-bar E-bar), zero for a null pair"""
    if s.dim != e.dim:
        raise LayoutError(f"state dimension {s.dim} does not match effect dimension {e.dim}")
    total = linalg.real_trace(s.rho_bar @ e.e_bar)
    if total < config.settings.null_threshold(s.dim):
        return 0.0
    return linalg.real_trace(s.rho @ e.e) / total


def _product_label(*labels: str) -> str:
    return config.settings.outcome_separator.join(labels)


def compose_sequential(m: SequentialOperation, n: SequentialOperation) -> SequentialOperation:
    """outcome (i, j) is N_j after M_i, renormalized by Tr N-bar(M-bar(I/d))"""
    if m.output_dim != n.input_dim:
        raise LayoutError(
            f"output dimension {m.output_dim} does not match input dimension {n.input_dim}"
        )
    outcomes = [
        (_product_label(i, j), mk.then(nk)) for i, mk in m.outcomes for j, nk in n.outcomes
    ]
    total = sum(k.normalization() for _, k in outcomes)
    if total < config.settings.null_threshold(m.input_dim, m.output_dim, n.output_dim):
        logger.debug("composition of %s and %s vanishes", m.labels, n.labels)
        raise NullCompositionError("sequential composition is the null operation")
    return SequentialOperation(
        m.input_layout,
        n.output_layout,
        [(label, k.scaled(1 / total)) for label, k in outcomes],
    )


def _disjoint(a: IndexLayout, b: IndexLayout) -> IndexLayout:
    clash = set(a.ids) & set(b.ids)
    if not clash:
        return b
    return b.rename(lambda sid: f"{sid}'" if sid in clash else sid)


def compose_parallel(m: SequentialOperation, n: SequentialOperation) -> SequentialOperation:
    """tensor product of the maps over the product outcome set, renormalized"""
    outcomes = [
        (_product_label(i, j), mk.tensor(nk)) for i, mk in m.outcomes for j, nk in n.outcomes
    ]
    total = sum(k.normalization() for _, k in outcomes)
    dims = (m.input_dim, m.output_dim, n.input_dim, n.output_dim)
    if total < config.settings.null_threshold(*dims):
        raise NullCompositionError("parallel composition is the null operation")
    return SequentialOperation(
        m.input_layout + _disjoint(m.input_layout, n.input_layout),
        m.output_layout + _disjoint(m.output_layout, n.output_layout),
        [(label, k.scaled(1 / total)) for label, k in outcomes],
    )


def deterministic_measure(rho_bar, meas: SequentialOperation) -> OutcomeDistribution:
    """p(j) = Tr(rho-bar E_j) / Tr(rho-bar E-bar); flagged null when the denominator is 0"""
    _require_measurement(meas)
    rho_bar = as_square(rho_bar, "rho-bar")
    if not linalg.is_psd(rho_bar):
        raise InvalidStateError("rho-bar is not positive semidefinite")
    if abs(linalg.real_trace(rho_bar) - 1) > config.settings.normalization_tolerance:
        raise InvalidStateError("rho-bar must have unit trace")
    if rho_bar.shape[0] != meas.input_dim:
        raise LayoutError("state and measurement dimensions differ")
    weights = np.array([linalg.real_trace(rho_bar @ e) for e in meas.effects().values()])
    if weights.sum() < config.settings.null_threshold(meas.input_dim):
        return OutcomeDistribution.null_distribution([meas.labels], ("meas",))
    return OutcomeDistribution.from_array([meas.labels], weights, ("meas",))


def update_operation(op: SequentialOperation, k: UpdateKernel) -> SequentialOperation:
    """M'_j = sum_i T(j,i) M_i / sum_{j,i} T(j,i) Tr M_i(I/d)"""
    if k.old_count != len(op.outcomes):
        raise InvalidOperationError(
            f"kernel has {k.old_count} columns for {len(op.outcomes)} outcomes"
        )
    norms = np.array([kraus.normalization() for _, kraus in op.outcomes])
    total = float(np.sum(k.t @ norms))
    if total < config.settings.null_threshold(op.input_dim, op.output_dim):
        raise NullUpdateError("update kernel selects only null outcomes")
    outcomes = []
    for j, label in enumerate(k.labels):
        parts = [
            kraus.scaled(k.t[j, i] / total)
            for i, (_, kraus) in enumerate(op.outcomes)
            if k.t[j, i] > 0
        ]
        if parts:
            outcomes.append((label, KrausSet.concatenate(parts)))
        else:
            outcomes.append((label, KrausSet.zero(op.output_dim, op.input_dim)))
    return op.with_outcomes(outcomes)


def check_chain(
    prep: SequentialOperation,
    middles: Sequence[SequentialOperation],
    meas: SequentialOperation,
) -> List[SequentialOperation]:
    """validate a preparation-to-measurement chain, returning all operations in order"""
    _require_preparation(prep)
    _require_measurement(meas)
    chain = [prep, *middles, meas]
    for before, after in zip(chain, chain[1:]):
        if before.output_dim != after.input_dim:
            raise LayoutError(
                f"chain breaks: output dimension {before.output_dim} "
                f"feeds input dimension {after.input_dim}"
            )
    return chain


def circuit_probability_sequential(
    prep: SequentialOperation,
    middles: Sequence[SequentialOperation],
    meas: SequentialOperation,
    names: Optional[Sequence[str]] = None,
) -> OutcomeDistribution:
    """joint outcome distribution of a preparation, a chain of operations and a measurement"""
    chain = check_chain(prep, middles, meas)
    names = tuple(names) if names is not None else tuple(f"op{k}" for k in range(len(chain)))

    branches = list(prep.states().values())
    for op in middles:
        branches = [kraus.apply(rho) for rho in branches for _, kraus in op.outcomes]
    effects = list(meas.effects().values())
    weights = np.array([linalg.real_trace(rho @ e) for rho in branches for e in effects])

    dims = [op.output_dim for op in chain[:-1]]
    if weights.sum() < config.settings.null_threshold(*dims):
        raise NullCompositionError("circuit is the null event")
    shape = [len(op.outcomes) for op in chain]
    return OutcomeDistribution.from_array(
        [op.labels for op in chain], weights.reshape(shape), names
    )
