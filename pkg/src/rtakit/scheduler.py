"""Atomic marks, append-only sets and the task pool that drives the analysis.

The pool counts scheduled-but-unfinished tasks and stops when that count
drops to zero. With one thread the worker loop runs in the caller's thread,
so single-threaded and multi-threaded runs share one code path.
"""

from __future__ import annotations

import collections
import threading
from typing import Any, Callable, Generic, Hashable, Iterator, TypeVar

T = TypeVar("T", bound=Hashable)

_STRIPES = tuple(threading.Lock() for _ in range(128))


def _stripe(obj: object) -> threading.Lock:
    return _STRIPES[(id(obj) >> 4) % len(_STRIPES)]


class Flag:
    """One-shot boolean; a non-blocking acquire of a never-released lock is an atomic test-and-set."""

    __slots__ = ("_lock",)

    def __init__(self) -> None:
        self._lock = threading.Lock()

    def __bool__(self) -> bool:
        return self._lock.locked()

    def __repr__(self) -> str:
        return f"Flag({bool(self)})"


def mark(flag: Flag) -> bool:
    """Atomically set ``flag``; True only for the call that flipped it."""
    return flag._lock.acquire(False)


class AppendSet(Generic[T]):
    """Duplicate-free, append-only collection.

    Iteration works on a snapshot, so it observes every element appended
    before the iteration started.
    """

    __slots__ = ("_items", "_members", "_lock")

    def __init__(self) -> None:
        self._items: list[T] = []
        self._members: set[T] = set()
        self._lock = _stripe(self)

    def add(self, item: T) -> bool:
        with self._lock:
            if item in self._members:
                return False
            self._members.add(item)
            self._items.append(item)
            return True

    def snapshot(self) -> tuple[T, ...]:
        with self._lock:
            return tuple(self._items)

    def __iter__(self) -> Iterator[T]:
        return iter(self.snapshot())

    def __contains__(self, item: object) -> bool:
        return item in self._members

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)


class TaskFailed(RuntimeError):
    """A scheduled task raised; the run was aborted."""


class TaskPool:
    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValueError("threads must be >= 1")
        self.threads = threads
        self._queue: collections.deque[tuple[Callable[..., Any], tuple]] = collections.deque()
        self._cv = threading.Condition()
        self._in_flight = 0
        self._error: BaseException | None = None
        self.executed = 0

    @property
    def in_flight(self) -> int:
        return self._in_flight

    def schedule(self, fn: Callable[..., Any], *args: Any) -> None:
        with self._cv:
            self._in_flight += 1
            self._queue.append((fn, args))
            self._cv.notify()

    def run(self) -> None:
        """Execute tasks until quiescence (nothing queued, nothing running)."""
        if self.threads == 1:
            self._worker()
        else:
            workers = [
                threading.Thread(target=self._worker, name=f"rta-worker-{i}", daemon=True)
                for i in range(self.threads)
            ]
            for w in workers:
                w.start()
            for w in workers:
                w.join()
        if self._error is not None:
            raise TaskFailed(f"analysis task failed: {self._error!r}") from self._error

    def _worker(self) -> None:
        while True:
            with self._cv:
                while not self._queue and self._in_flight > 0 and self._error is None:
                    self._cv.wait()
                if self._error is not None or not self._queue:
                    self._cv.notify_all()
                    return
                fn, args = self._queue.popleft()
            try:
                fn(*args)
            except BaseException as exc:  # noqa: BLE001 - reported by run()
                with self._cv:
                    if self._error is None:
                        self._error = exc
                    self._cv.notify_all()
                return
            with self._cv:
                self._in_flight -= 1
                self.executed += 1
                if self._in_flight == 0:
                    self._cv.notify_all()


def run_parallel(model, config=None):
    """Run RTA on ``model`` with ``config.threads`` workers."""
    from .engine import AnalysisConfig, analyze

    return analyze(model, config or AnalysisConfig())
