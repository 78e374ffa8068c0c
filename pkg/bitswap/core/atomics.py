from __future__ import annotations

from threading import Lock
from typing import Generic, TypeVar

T = TypeVar("T")


class AtomicCell(Generic[T]):
    """
    A lock-guarded memory cell. Every method takes effect atomically at a single point (while
    the cell lock is held), which is how a machine-atomic word is rendered in pure Python.

    Arguments
    ---------
    value: T
        The initial content of the cell.
    """

    def __init__(self, value: T) -> None:
        self._value: T = value
        self._lock = Lock()

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}: {self._value!r}>"

    def get(self) -> T:
        with self._lock:
            return self._value

    def set(self, value: T) -> None:
        with self._lock:
            self._value = value

    def compare_and_set(self, expect: T, update: T) -> bool:
        """
        Replaces the content of the cell with `update` if and only if the current content is
        `expect`.

        Returns
        -------
        bool
            True if the swap took place, False otherwise.
        """
        with self._lock:
            if self._value == expect:
                self._value = update
                return True
            return False


class AtomicCounter(AtomicCell[int]):
    """
    Monotone shared counter. Each call to `draw` returns a value never returned before.

    Arguments
    ---------
    start: int
        The first value returned by `draw` (default: 0).
    """

    def __init__(self, start: int = 0) -> None:
        super().__init__(start)

    def draw(self) -> int:
        with self._lock:
            result = self._value
            self._value += 1
            return result