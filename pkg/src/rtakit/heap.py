"""Build-time heap scanning.

Objects reachable from read static fields of initialized classes, or embedded
as constants in reachable methods, form the image heap. Only fields marked as
read are followed; every value of a field is parked per field so that a field
becoming read later pulls in values found on objects scanned earlier.
"""

from __future__ import annotations

from typing import Callable, Optional

from .model import FieldRef, HeapObject, ModelError, ProgramModel
from .scheduler import AppendSet, Flag, mark


class HeapScanner:
    def __init__(
        self,
        model: ProgramModel,
        is_read: Callable[[FieldRef], bool],
        on_object: Callable[[HeapObject], None],
        on_field_value: Optional[Callable[[FieldRef, HeapObject], None]] = None,
    ):
        self.model = model
        self._is_read = is_read
        self._on_object = on_object
        self._on_field_value = on_field_value
        self._scanned = {oid: Flag() for oid in model.heap}
        self.image_heap: AppendSet[str] = AppendSet()
        self.pending: dict[FieldRef, AppendSet[str]] = {}
        for obj in model.heap.values():
            for ref in obj.field_values:
                self.pending.setdefault(ref, AppendSet())
        # static values of initialized classes wait for their field to be read
        for ref, value in model.static_values():
            self.pending.setdefault(ref, AppendSet()).add(value)

    def _follow(self, ref: FieldRef, value: str, stack: list[str]) -> None:
        if self._on_field_value is not None:
            self._on_field_value(ref, self._object(value))
        stack.append(value)

    def _object(self, oid: str) -> HeapObject:
        try:
            return self.model.heap[oid]
        except KeyError:
            raise ModelError(f"dangling object id {oid!r}") from None

    def scan_root(self, oid: str) -> None:
        stack = [oid]
        while stack:
            cur = stack.pop()
            obj = self._object(cur)
            if not mark(self._scanned[cur]):
                continue
            self.image_heap.add(cur)
            self._on_object(obj)
            for ref, value in obj.field_values.items():
                # park before checking the flag; on_field_read parks-then-iterates the other way
                self.pending[ref].add(value)
                if self._is_read(ref):
                    self._follow(ref, value, stack)
            stack.extend(reversed(obj.elements))

    def on_field_read(self, ref: FieldRef) -> None:
        values = self.pending.get(ref)
        if not values:
            return
        stack: list[str] = []
        for value in values:
            self._follow(ref, value, stack)
        for value in stack:
            self.scan_root(value)

    def is_scanned(self, oid: str) -> bool:
        return bool(self._scanned.get(oid))
