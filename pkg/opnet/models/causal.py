"""Signaling and causality reports"""
import enum
from typing import Dict, List, Tuple

import attr

from opnet.errors import InvalidStateError
from opnet.models.layout import SystemId


class Order(str, enum.Enum):
    """which party acts first in a fixed-order circuit"""

    a_first = "A-first"
    b_first = "B-first"


@attr.s(frozen=True)
class Party:
    """a named group of process operator ports"""

    name: str = attr.ib()
    ports: Tuple[SystemId, ...] = attr.ib(converter=tuple)


Direction = Tuple[str, str]


def _check_strengths(instance, attribute, value):
    for direction, strength in value.items():
        if not -1e-12 <= strength <= 1 + 1e-12:
            raise InvalidStateError(f"strength {strength} of {direction} is outside [0, 1]")


@attr.s(frozen=True)
class SignalingReport:
    """
    Signaling strength per ordered (sender, receiver) pair.

    The strength is the largest total-variation distance between the receiver's
    outcome marginals over two choices of the sender's operation, the other
    parties' choices held fixed. ``families`` records the operation labels
    the strengths were computed over; ``skipped`` lists incompatible choices.
    """

    directions: Dict[Direction, float] = attr.ib(validator=_check_strengths)
    families: Dict[str, Tuple[str, ...]] = attr.ib(factory=dict)
    skipped: List[Tuple[str, ...]] = attr.ib(factory=list)

    def __getitem__(self, direction: Direction) -> float:
        return self.directions[tuple(direction)]

    @property
    def max_strength(self) -> float:
        return max(self.directions.values(), default=0.0)


@attr.s(frozen=True)
class CausalityReport:
    """largest change of the preparation marginal over a measurement family"""

    deviation: float = attr.ib()
    skipped: List[int] = attr.ib(factory=list)

    def holds(self, tol: float = 1e-10) -> bool:
        return self.deviation <= tol
