from __future__ import annotations

import logging

from typing import Optional, Union

from bitswap.config import Backend
from bitswap.core.atomics import AtomicCell
from bitswap.core.base import Steps, complete
from bitswap.core.objects import MaxRegister, RegisterCell, StepCounter
from bitswap.exceptions import CapacityError, ContractViolation

logger = logging.getLogger(__name__)


class LeafCell:
    """
    Leaf of a register tree: a max register of capacity 1 whose value is always 0. It owns no
    register and its operations take no steps.
    """

    capacity = 1
    depth = 0


class MaxRegNode:
    """
    Internal node of a register-tree max register of capacity `2^k` (k >= 1). The node owns a
    one-bit `switch` register; the left subtree stores values below `capacity/2`, the right
    subtree stores `value - capacity/2` for the upper half. Once the switch is set it is never
    reset. Subtrees are materialized on first access and published once, so that large
    capacities cost memory only along the paths actually used.

    Arguments
    ---------
    capacity: int
        The number of representable values, a power of two larger than 1.
    """

    def __init__(self, capacity: int) -> None:
        if capacity < 2 or capacity & (capacity - 1):
            raise ContractViolation(f"An internal node requires a power-of-two capacity >= 2, got {capacity}")
        self.capacity = capacity
        self.depth = capacity.bit_length() - 1
        self.switch = RegisterCell(width=1)
        self.__children = (AtomicCell(None), AtomicCell(None))

    def __child(self, side: int) -> Union[MaxRegNode, LeafCell]:
        slot = self.__children[side]
        child = slot.get()
        if child is None:
            half = self.capacity // 2
            slot.compare_and_set(None, LeafCell() if half == 1 else MaxRegNode(half))
            child = slot.get()
        return child

    @property
    def left(self) -> Union[MaxRegNode, LeafCell]:
        return self.__child(0)

    @property
    def right(self) -> Union[MaxRegNode, LeafCell]:
        return self.__child(1)


def tree_build(capacity: int) -> Union[MaxRegNode, LeafCell]:
    """
    Builds a register tree of the given capacity representing the value 0.

    Arguments
    ---------
    capacity: int
        The capacity of the tree, a power of two `2^k` with `k >= 0`.

    Returns
    -------
    Union[MaxRegNode, LeafCell]
        A `LeafCell` for capacity 1, the root `MaxRegNode` otherwise.

    Raises
    ------
    ContractViolation
        Exception raised if the capacity is not a positive power of two.
    """
    if type(capacity) is not int or capacity < 1 or capacity & (capacity - 1):
        raise ContractViolation(f"The capacity must be a positive power of two, got {capacity}")
    if capacity == 1:
        return LeafCell()
    return MaxRegNode(capacity)


def _write_max_steps(node: Union[MaxRegNode, LeafCell], x: int, counter: Optional[StepCounter]) -> Steps[None]:
    if isinstance(node, LeafCell):
        return

    half = node.capacity // 2
    if x >= half:
        yield from _write_max_steps(node.right, x - half, counter)
        yield from node.switch.write_steps(1, counter)
    else:
        # A set switch means a value >= half is already stored: x is dominated
        switch = yield from node.switch.read_steps(counter)
        if switch == 0:
            yield from _write_max_steps(node.left, x, counter)


def tree_write_max_steps(node: Union[MaxRegNode, LeafCell], x: int, counter: Optional[StepCounter] = None) -> Steps[None]:
    if x < 0:
        raise ContractViolation(f"A max register stores unsigned values, got {x}")
    if x >= node.capacity:
        raise CapacityError(f"The value {x} exceeds the capacity {node.capacity} of the register tree")
    yield from _write_max_steps(node, x, counter)


def tree_read_steps(node: Union[MaxRegNode, LeafCell], counter: Optional[StepCounter] = None) -> Steps[int]:
    if isinstance(node, LeafCell):
        return 0

    switch = yield from node.switch.read_steps(counter)
    if switch == 1:
        upper = yield from tree_read_steps(node.right, counter)
        return node.capacity // 2 + upper
    return (yield from tree_read_steps(node.left, counter))


def tree_write_max(node: Union[MaxRegNode, LeafCell], x: int, counter: Optional[StepCounter] = None) -> None:
    """
    Writes `x` into the register tree rooted at `node`. At most one switch access is performed
    per level, so a write on a tree of capacity `2^k` takes at most `k` register operations.

    Raises
    ------
    CapacityError
        Exception raised if `x` is not smaller than the capacity of the tree.
    """
    complete(tree_write_max_steps(node, x, counter))


def tree_read(node: Union[MaxRegNode, LeafCell], counter: Optional[StepCounter] = None) -> int:
    """
    Reads the register tree rooted at `node` following the switches from the root to a leaf.
    """
    return complete(tree_read_steps(node, counter))


class TreeMaxRegister(MaxRegister):
    """
    Bounded max register built from one-bit read-write registers arranged as a binary tree.
    Every operation on a tree of capacity `2^k` performs at most `k` register accesses, each one
    charged one unit to the caller's `StepCounter`.

    Arguments
    ---------
    capacity: int
        The capacity of the register, a power of two.
    """

    backend = Backend.REGTREE

    def __init__(self, capacity: int) -> None:
        self.root = tree_build(capacity)
        logger.debug(f"Register tree built with capacity {capacity} (depth {self.root.depth})")

    @property
    def capacity(self) -> int:
        return self.root.capacity

    def max_steps(self) -> int:
        return self.root.depth

    def read_max_steps(self, counter: Optional[StepCounter] = None) -> Steps[int]:
        return (yield from tree_read_steps(self.root, counter))

    def write_max_steps(self, x: int, counter: Optional[StepCounter] = None) -> Steps[None]:
        yield from tree_write_max_steps(self.root, x, counter)
