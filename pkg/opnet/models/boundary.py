"""Boundary operations and wire states of the time-neutral picture"""
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import attr
import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.errors import InvalidOperationError, LayoutError
from opnet.models.layout import IndexLayout, SystemId, as_square


@attr.s(frozen=True, eq=False)
class WireState:
    """
    Entangled pure state joining two ports.

    ``state`` is (I x S^-1dagger)|phi+><phi+|(I x S^-1) with S acting on ``end_b``
    and normalized so that Tr(S^-1dagger S^-1) = dim. Build with
    ``opnet.core.cj.make_wire``.
    """

    end_a: Hashable = attr.ib()
    end_b: Hashable = attr.ib()
    s: np.ndarray = attr.ib(converter=as_square)
    state: np.ndarray = attr.ib(converter=as_square)

    @property
    def dim(self) -> int:
        return self.s.shape[0]

    @property
    def ends(self) -> Tuple[Hashable, Hashable]:
        return (self.end_a, self.end_b)

    @property
    def layout(self) -> IndexLayout:
        return IndexLayout.of((self.end_a, self.dim), (self.end_b, self.dim))

    @property
    def key(self) -> Tuple[str, str]:
        """order-independent identifier"""
        return tuple(sorted((repr(self.end_a), repr(self.end_b))))  # type: ignore

    def other_end(self, port: Hashable) -> Hashable:
        if port == self.end_a:
            return self.end_b
        if port == self.end_b:
            return self.end_a
        raise LayoutError(f"{port!r} is not an end of wire {self.ends}")

    def swapped(self) -> "WireState":
        """same state with the ends exchanged; S becomes S^T"""
        state = linalg.permute_systems(self.state, self.layout, (self.end_b, self.end_a))
        return WireState(self.end_b, self.end_a, self.s.T, state)


@attr.s(frozen=True, eq=False)
class BoundaryReport:
    """result of checking a boundary operation"""

    trace_residual: float = attr.ib()
    positive: Dict[str, bool] = attr.ib(factory=dict)
    failures: List[str] = attr.ib(factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.valid


def _to_outcomes(value) -> Tuple[Tuple[str, np.ndarray], ...]:
    return tuple((str(label), as_square(m, f"operator {label!r}")) for label, m in value)


@attr.s(frozen=True, eq=False)
class BoundaryOperation:
    """outcome-indexed positive operators on the boundary systems of a region"""

    layout: IndexLayout = attr.ib()
    outcomes: Tuple[Tuple[str, np.ndarray], ...] = attr.ib(converter=_to_outcomes)

    def __attrs_post_init__(self):
        if not self.outcomes:
            raise InvalidOperationError("boundary operation needs at least one outcome")
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise InvalidOperationError(f"outcome labels must be unique, got {labels}")
        for label, m in self.outcomes:
            self.layout.check_matrix(m, f"operator {label!r}")

    @classmethod
    def single(cls, layout: IndexLayout, operator, label: str = "0") -> "BoundaryOperation":
        return cls(layout, [(label, operator)])

    @classmethod
    def unit(cls, layout: IndexLayout, label: str = "1") -> "BoundaryOperation":
        """deterministic operation with operator I"""
        return cls.single(layout, np.eye(layout.size), label)

    @classmethod
    def null(cls, layout: IndexLayout, labels: Sequence[str] = ("0",)) -> "BoundaryOperation":
        """the null operation"""
        zero = np.zeros((layout.size, layout.size), dtype=np.complex128)
        return cls(layout, [(label, zero) for label in labels])

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.outcomes)

    @property
    def dim(self) -> int:
        return self.layout.size

    @property
    def operators(self) -> np.ndarray:
        """stacked operators, shape (outcomes, dim, dim)"""
        return np.stack([m for _, m in self.outcomes])

    def total(self) -> np.ndarray:
        """M-bar"""
        return np.sum(self.operators, axis=0)

    def outcome(self, label: str) -> np.ndarray:
        """lookup operator by label"""
        for name, m in self.outcomes:
            if name == label:
                return m
        raise InvalidOperationError(f"unknown outcome label {label!r}")

    def select(self, labels: Sequence[str]) -> np.ndarray:
        """sum of the operators of the given outcomes"""
        return np.sum([self.outcome(label) for label in labels], axis=0)

    @property
    def is_null(self) -> bool:
        return linalg.real_trace(self.total()) <= config.settings.null_threshold(self.dim)

    def check(self, tol: Optional[float] = None) -> BoundaryReport:
        """positivity of every operator and Tr M-bar = product of dims"""
        tol = config.settings.normalization_tolerance if tol is None else tol
        failures = []
        positive = {}
        for label, m in self.outcomes:
            positive[label] = linalg.is_psd(m, tol)
            if not positive[label]:
                failures.append(f"operator {label!r} is not positive semidefinite")
        residual = abs(linalg.real_trace(self.total()) - self.dim)
        if residual > tol * self.dim:
            failures.append(f"Tr M-bar differs from {self.dim} by {residual:.3e}")
        return BoundaryReport(trace_residual=residual, positive=positive, failures=failures)

    def normalized(self) -> "BoundaryOperation":
        """copy rescaled to Tr M-bar = product of dims"""
        total = linalg.real_trace(self.total())
        if total <= 0:
            raise InvalidOperationError("cannot normalize the null operation")
        return self.with_operators([m * (self.dim / total) for _, m in self.outcomes])

    def with_operators(self, operators: Sequence[np.ndarray]) -> "BoundaryOperation":
        return BoundaryOperation(self.layout, list(zip(self.labels, operators)))

    def coarse_grained(self, label: str = "e") -> "BoundaryOperation":
        return BoundaryOperation.single(self.layout, self.total(), label)

    def rename(self, mapping) -> "BoundaryOperation":
        """same operators on renamed systems"""
        return BoundaryOperation(self.layout.rename(mapping), self.outcomes)

    def reorder(self, order: Sequence[SystemId]) -> "BoundaryOperation":
        """same operation with the systems permuted"""
        layout = self.layout.reorder(order)
        ops = [linalg.permute_systems(m, self.layout, order) for _, m in self.outcomes]
        return BoundaryOperation(layout, list(zip(self.labels, ops)))

    def group_ports(
        self, systems: Sequence[SystemId], new_id: SystemId
    ) -> "BoundaryOperation":
        """merge systems into one system of product dimension, placed last"""
        others = [sid for sid in self.layout.ids if sid not in set(systems)]
        moved = self.reorder([*others, *systems])
        dim = int(np.prod([self.layout.dim(sid) for sid in systems]))
        layout = IndexLayout(
            tuple((sid, self.layout.dim(sid)) for sid in others) + ((new_id, dim),)
        )
        return BoundaryOperation(layout, moved.outcomes)
