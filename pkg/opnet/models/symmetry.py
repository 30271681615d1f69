"""Symmetry transformations"""
import enum
import logging
from typing import Optional

import attr
import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.errors import InvalidTransformError
from opnet.models.layout import Basis, as_square

logger = logging.getLogger(__name__)


class TransformKind(str, enum.Enum):
    """states to states (type I) or states to effects (type II)"""

    type_i = "type-I"
    type_ii = "type-II"


class Parity(str, enum.Enum):
    """S = S^T (bosonic) or S = -S^T (fermionic) in the transposition basis"""

    bosonic = "bosonic"
    fermionic = "fermionic"


@attr.s(frozen=True, eq=False)
class SymmetryTransform:
    """symmetry transformation given by an invertible S, optionally with transposition"""

    kind: TransformKind = attr.ib(converter=TransformKind)
    s: np.ndarray = attr.ib(converter=as_square)
    use_transpose: bool = attr.ib(default=True)
    basis: Optional[Basis] = attr.ib(default=None)

    def __attrs_post_init__(self):
        ratio = linalg.smallest_singular_ratio(self.s)
        if ratio <= config.settings.invertibility_ratio:
            raise InvalidTransformError(f"S is singular (singular value ratio {ratio:.3e})")
        if self.basis is not None and self.basis.dim != self.dim:
            raise InvalidTransformError(
                f"basis dimension {self.basis.dim} does not match S dimension {self.dim}"
            )
        if not self.is_unitary:
            logger.warning("non-unitary S (dimension %d)", self.dim)

    @classmethod
    def time_reversal(cls, s=None, dim: int = 2, basis: Optional[Basis] = None):
        """type-II transform with transposition, S = I unless given"""
        s = np.eye(dim) if s is None else s
        return cls(TransformKind.type_ii, s, True, basis)

    @classmethod
    def trivial(cls) -> "SymmetryTransform":
        """time reversal of the one-dimensional trivial system"""
        return cls.time_reversal(np.ones((1, 1)))

    @property
    def dim(self) -> int:
        return self.s.shape[0]

    @property
    def s_inv(self) -> np.ndarray:
        return np.linalg.inv(self.s)

    @property
    def is_unitary(self) -> bool:
        return linalg.is_unitary(self.s)

    @property
    def parity(self) -> Optional[Parity]:
        """bosonic or fermionic symmetry of S under transposition, if any"""
        tol = config.settings.unitarity_tolerance * max(1.0, np.max(np.abs(self.s)))
        st = linalg.transpose_in_basis(self.s, self.basis)
        if np.max(np.abs(self.s - st)) <= tol:
            return Parity.bosonic
        if np.max(np.abs(self.s + st)) <= tol:
            return Parity.fermionic
        return None

    def transpose(self, m: np.ndarray) -> np.ndarray:
        """transposition in this transform's basis when enabled"""
        if not self.use_transpose:
            return m
        return linalg.transpose_in_basis(m, self.basis)

    def forward(self, m: np.ndarray) -> np.ndarray:
        """S m(^T) S^dagger"""
        return self.s @ self.transpose(m) @ linalg.dagger(self.s)

    def dual(self, m: np.ndarray) -> np.ndarray:
        """S^-1dagger m(^T) S^-1"""
        s_inv = self.s_inv
        return linalg.dagger(s_inv) @ self.transpose(m) @ s_inv


@attr.s(frozen=True)
class InvolutionReport:
    """whether applying a transform twice is the identity"""

    involutive: bool = attr.ib()
    parity: Optional[Parity] = attr.ib(default=None)
    max_deviation: float = attr.ib(default=0.0)
    unitary: bool = attr.ib(default=True)

    def __bool__(self) -> bool:
        return self.involutive
