"""Matrices, tensor-index layouts and bases"""
from typing import Hashable, Iterable, Iterator, Optional, Sequence, Tuple, Union

import attr
import numpy as np

from opnet import config
from opnet.errors import InvalidMatrixError, LayoutError

SystemId = Hashable


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """coerce to a finite 2-d complex array"""
    try:
        m = np.asarray(value, dtype=np.complex128)
    except (TypeError, ValueError) as e:
        raise InvalidMatrixError(f"{name} is not a complex matrix: {e}")
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise InvalidMatrixError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrixError(f"{name} has non-finite entries")
    return m


def as_square(value, name: str = "matrix") -> np.ndarray:
    """coerce to a finite square complex array"""
    m = as_matrix(value, name)
    if m.shape[0] != m.shape[1]:
        raise InvalidMatrixError(f"{name} must be square, got shape {m.shape}")
    return m


def _check_systems(instance, attribute, value):
    ids = [sid for sid, _ in value]
    if len(set(ids)) != len(ids):
        raise LayoutError(f"system ids must be unique, got {ids}")
    for sid, dim in value:
        if int(dim) < 1:
            raise LayoutError(f"system {sid!r} has non-positive dimension {dim}")


def _to_systems(value) -> Tuple[Tuple[SystemId, int], ...]:
    return tuple((sid, int(dim)) for sid, dim in value)


@attr.s(frozen=True)
class IndexLayout:
    """ordered (system id, dim) pairs annotating the tensor factors of a matrix"""

    systems: Tuple[Tuple[SystemId, int], ...] = attr.ib(
        converter=_to_systems, validator=_check_systems
    )

    @classmethod
    def of(cls, *systems: Tuple[SystemId, int]) -> "IndexLayout":
        """layout from (id, dim) pairs"""
        return cls(systems)

    @classmethod
    def single(cls, system_id: SystemId, dim: int) -> "IndexLayout":
        """layout of one system"""
        return cls(((system_id, dim),))

    @classmethod
    def trivial(cls) -> "IndexLayout":
        """layout of the one-dimensional trivial system"""
        return cls(())

    @property
    def ids(self) -> Tuple[SystemId, ...]:
        """system ids in order"""
        return tuple(sid for sid, _ in self.systems)

    @property
    def dims(self) -> Tuple[int, ...]:
        """dimensions in order"""
        return tuple(dim for _, dim in self.systems)

    @property
    def size(self) -> int:
        """matrix side length"""
        return int(np.prod(self.dims, dtype=np.int64)) if self.systems else 1

    def __len__(self) -> int:
        return len(self.systems)

    def __iter__(self) -> Iterator[Tuple[SystemId, int]]:
        return iter(self.systems)

    def __contains__(self, system_id) -> bool:
        return system_id in self.ids

    def __add__(self, other: "IndexLayout") -> "IndexLayout":
        return IndexLayout(self.systems + other.systems)

    def index(self, system_id: SystemId) -> int:
        """position of a system"""
        try:
            return self.ids.index(system_id)
        except ValueError:
            raise LayoutError(f"unknown system id {system_id!r}")

    def dim(self, system_id: SystemId) -> int:
        """dimension of a system"""
        return self.systems[self.index(system_id)][1]

    def remove(self, system_ids: Iterable[SystemId]) -> "IndexLayout":
        """layout without the named systems, order preserved"""
        drop = set(system_ids)
        for sid in drop:
            self.index(sid)
        return IndexLayout(tuple(s for s in self.systems if s[0] not in drop))

    def reorder(self, order: Sequence[SystemId]) -> "IndexLayout":
        """layout with systems in the given order"""
        order = list(order)
        if len(order) != len(self.ids) or set(order) != set(self.ids):
            raise LayoutError(f"{list(order)} is not a permutation of {list(self.ids)}")
        return IndexLayout(tuple(self.systems[self.index(sid)] for sid in order))

    def rename(self, mapping) -> "IndexLayout":
        """layout with system ids replaced through a mapping or callable"""
        rename = mapping if callable(mapping) else (lambda sid: mapping.get(sid, sid))
        return IndexLayout(tuple((rename(sid), dim) for sid, dim in self.systems))

    def check_matrix(self, m: np.ndarray, name: str = "matrix") -> np.ndarray:
        """validate that a square matrix matches this layout"""
        m = as_square(m, name)
        if m.shape[0] != self.size:
            raise LayoutError(
                f"{name} has side {m.shape[0]} but layout {list(self.ids)} "
                f"requires {self.size}"
            )
        return m


LayoutLike = Union[IndexLayout, SystemId]


def to_layout(value: LayoutLike, dim: Optional[int] = None) -> IndexLayout:
    """layout from an IndexLayout, or a single system id and its dimension"""
    if isinstance(value, IndexLayout):
        if dim is not None and value.size != dim:
            raise LayoutError(f"layout size {value.size} does not match dimension {dim}")
        return value
    if value is None:
        return IndexLayout.trivial()
    if dim is None:
        raise LayoutError(f"dimension of system {value!r} is unknown")
    return IndexLayout.single(value, dim)


@attr.s(frozen=True, eq=False)
class Basis:
    """orthonormal basis, vectors stored as columns"""

    vectors: np.ndarray = attr.ib(converter=as_square)

    def __attrs_post_init__(self):
        gram = self.vectors.conj().T @ self.vectors
        tol = config.settings.basis_tolerance
        if np.max(np.abs(gram - np.eye(self.dim))) > tol:
            raise InvalidMatrixError("basis vectors are not orthonormal")

    @classmethod
    def computational(cls, dim: int) -> "Basis":
        """standard basis"""
        return cls(np.eye(dim, dtype=np.complex128))

    @property
    def dim(self) -> int:
        """dimension"""
        return self.vectors.shape[0]

    @property
    def is_computational(self) -> bool:
        """true for the standard basis"""
        return bool(np.allclose(self.vectors, np.eye(self.dim), rtol=0, atol=1e-15))

    def column(self, i: int) -> np.ndarray:
        """i-th basis vector"""
        return self.vectors[:, i]
