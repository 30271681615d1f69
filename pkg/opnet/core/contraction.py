"""Tensor contraction of outcome-indexed operator blocks"""
import itertools
import logging
from typing import Dict, Hashable, List, Sequence, Tuple

import attr
import numpy as np

from opnet import config
from opnet.core import linalg
from opnet.errors import ContractionTooLargeError, LayoutError

logger = logging.getLogger(__name__)

# einsum sublist labels are limited to the ascii letters
MAX_LABELS = 52


def _to_stack(value) -> np.ndarray:
    t = np.asarray(value, dtype=np.complex128)
    if t.ndim == 2:
        t = t[np.newaxis]
    return t


@attr.s(frozen=True, eq=False)
class Block:
    """
    Operators on named ports, one per joint outcome.

    ``tensor`` has shape (outcomes, D, D) with D the product of ``dims``;
    ``labels[k]`` holds the outcome labels of the nodes in ``nodes`` for the
    k-th operator.
    """

    ports: Tuple[Hashable, ...] = attr.ib(converter=tuple)
    dims: Tuple[int, ...] = attr.ib(converter=tuple)
    tensor: np.ndarray = attr.ib(converter=_to_stack)
    labels: Tuple[Tuple[str, ...], ...] = attr.ib(converter=tuple, default=((),))
    nodes: Tuple[str, ...] = attr.ib(converter=tuple, default=())

    def __attrs_post_init__(self):
        side = self.size
        if self.tensor.shape[1:] != (side, side):
            raise LayoutError(
                f"block tensor {self.tensor.shape} does not match ports {self.dims}"
            )
        if len(self.labels) != self.tensor.shape[0]:
            raise LayoutError("one label tuple per block operator is required")

    @property
    def size(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    @property
    def outcome_count(self) -> int:
        return self.tensor.shape[0]

    def total_trace(self) -> float:
        return linalg.real_trace(np.sum(self.tensor, axis=0))

    def scaled(self, factor: float) -> "Block":
        return attr.evolve(self, tensor=self.tensor * factor)

    def summed(self) -> "Block":
        """single operator summing all outcomes"""
        return attr.evolve(self, tensor=np.sum(self.tensor, axis=0), labels=((),), nodes=())

    def permuted(self, order: Sequence[Hashable]) -> np.ndarray:
        """operators with the ports in the given order"""
        order = list(order)
        if sorted(map(repr, order)) != sorted(map(repr, self.ports)):
            raise LayoutError(f"{order} is not a permutation of the block ports")
        n = len(self.ports)
        perm = [self.ports.index(p) for p in order]
        t = self.tensor.reshape((self.outcome_count,) + self.dims + self.dims)
        t = t.transpose([0] + [1 + p for p in perm] + [1 + n + p for p in perm])
        return t.reshape(self.tensor.shape)


def block_side(dims: Sequence[int]) -> int:
    return int(np.prod(dims, dtype=np.int64)) if dims else 1


def contract(blocks: Sequence[Block]) -> Block:
    """
    Contract blocks over shared ports.

    A port shared by two blocks X and Y is summed as Tr[X Y] on that factor;
    ports held by one block stay open, in block then port order. The outcome
    axes of the result form the product of the block outcomes.
    """
    holders: Dict[Hashable, List[int]] = {}
    for i, block in enumerate(blocks):
        for port in block.ports:
            holders.setdefault(port, []).append(i)

    ket: Dict[Tuple[int, Hashable], int] = {}
    bra: Dict[Tuple[int, Hashable], int] = {}
    open_ports, open_dims = [], []
    counter = itertools.count()
    for port, held in holders.items():
        if len(held) > 2:
            raise LayoutError(f"port {port!r} is held by {len(held)} blocks")
        first = held[0]
        dim = blocks[first].dims[blocks[first].ports.index(port)]
        x, y = next(counter), next(counter)
        ket[(first, port)], bra[(first, port)] = x, y
        if len(held) == 2:
            second = held[1]
            if second == first:
                raise LayoutError(f"port {port!r} appears twice in one block")
            if blocks[second].dims[blocks[second].ports.index(port)] != dim:
                raise LayoutError(f"port {port!r} joins factors of different dimensions")
            ket[(second, port)], bra[(second, port)] = y, x
        else:
            open_ports.append(port)
            open_dims.append(dim)
    outcome_axes = [next(counter) for _ in blocks]
    if next(counter) > MAX_LABELS:
        raise ContractionTooLargeError(
            f"contraction needs more than {MAX_LABELS} tensor indices"
        )
    side = block_side(open_dims)
    logger.debug("contracting %d blocks into side %d", len(blocks), side)
    if side > config.settings.max_live_dimension:
        raise ContractionTooLargeError(
            f"intermediate block side {side} exceeds {config.settings.max_live_dimension}"
        )

    operands: list = []
    for i, block in enumerate(blocks):
        tensor = block.tensor.reshape((block.outcome_count,) + block.dims + block.dims)
        axes = (
            [outcome_axes[i]]
            + [ket[(i, p)] for p in block.ports]
            + [bra[(i, p)] for p in block.ports]
        )
        operands += [tensor, axes]
    out_axes = (
        outcome_axes
        + [ket[(holders[p][0], p)] for p in open_ports]
        + [bra[(holders[p][0], p)] for p in open_ports]
    )
    result = np.einsum(*operands, out_axes, optimize=True)

    labels = tuple(
        tuple(itertools.chain.from_iterable(combo))
        for combo in itertools.product(*[block.labels for block in blocks])
    )
    nodes = tuple(itertools.chain.from_iterable(block.nodes for block in blocks))
    return Block(open_ports, open_dims, result.reshape(len(labels), side, side), labels, nodes)
