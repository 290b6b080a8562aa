"""Serialized method summaries reused across analysis runs.

Store file layout (UTF-8, records sorted by method id)::

    rtakit-summaries 1
    method Hello.log()
    hash <sha256 hex of the canonical body>
    static-invokes
    virtual-invokes
    special-invokes
    instantiated-types B
    read-fields
    written-fields
    embedded-constants
    end

Each labeled line carries its items separated by single spaces. Embedded
constants are written as ``objectId:Type`` and must be trivial objects.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .model import FieldRef, MethodDecl, MethodRef, ProgramModel
from .summary import SECTIONS, MethodSummary, extract_summary
from .textformat import format_instruction

HEADER = "rtakit-summaries 1"
DEFAULT_UNSTABLE_PATTERNS = (r"\$Lambda\$", r"\$\$", r"\$Proxy")

_LABELS = {name: name.replace("_", "-") for name in SECTIONS}
_BY_LABEL = {v: k for k, v in _LABELS.items()}


class NotReusable(ValueError):
    pass


class Unresolvable(LookupError):
    def __init__(self, identifier: str):
        self.identifier = identifier
        super().__init__(f"cannot resolve {identifier}")


class StoreFormatError(ValueError):
    pass


def method_hash(method: MethodDecl) -> str:
    body = method.body or ()
    canonical = "\n".join(format_instruction(ins) for ins in body)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SerializedSummary:
    method_id: str
    body_hash: str
    static_invokes: tuple[str, ...] = ()
    virtual_invokes: tuple[str, ...] = ()
    special_invokes: tuple[str, ...] = ()
    instantiated_types: tuple[str, ...] = ()
    read_fields: tuple[str, ...] = ()
    written_fields: tuple[str, ...] = ()
    embedded_constants: tuple[str, ...] = ()

    def to_text(self) -> str:
        lines = [f"method {self.method_id}", f"hash {self.body_hash}"]
        for name in SECTIONS:
            items = getattr(self, name)
            lines.append(" ".join([_LABELS[name], *items]))
        lines.append("end")
        return "\n".join(lines) + "\n"


def _identifiers(summary: MethodSummary, model: ProgramModel) -> Iterable[str]:
    for ref in (*summary.static_invokes, *summary.virtual_invokes, *summary.special_invokes):
        yield ref.owner
        yield ref.name
        yield from ref.params
    yield from summary.instantiated_types
    for f in (*summary.read_fields, *summary.written_fields):
        yield f.owner
        yield f.name
    for oid in summary.embedded_constants:
        obj = model.heap.get(oid)
        if obj is not None:
            yield obj.type


def is_reusable(
    summary: MethodSummary,
    method: MethodRef,
    model: ProgramModel,
    patterns: Sequence[str] = DEFAULT_UNSTABLE_PATTERNS,
) -> bool:
    """A summary can be stored when all its names are stable and all constants trivial."""
    compiled = [re.compile(p) for p in patterns]
    names = [method.owner, method.name, *method.params, *_identifiers(summary, model)]
    if any(rx.search(name) for rx in compiled for name in names):
        return False
    for oid in summary.embedded_constants:
        obj = model.heap.get(oid)
        if obj is None or not obj.trivial:
            return False
    return True


def serialize_summary(
    summary: MethodSummary,
    method: MethodRef,
    model: ProgramModel,
    patterns: Sequence[str] = DEFAULT_UNSTABLE_PATTERNS,
) -> SerializedSummary:
    if not is_reusable(summary, method, model, patterns):
        raise NotReusable(str(method))
    decl = model.method(method)
    if decl is None:
        raise Unresolvable(str(method))
    return SerializedSummary(
        method_id=str(method),
        body_hash=method_hash(decl),
        static_invokes=tuple(sorted(map(str, summary.static_invokes))),
        virtual_invokes=tuple(sorted(map(str, summary.virtual_invokes))),
        special_invokes=tuple(sorted(map(str, summary.special_invokes))),
        instantiated_types=tuple(sorted(summary.instantiated_types)),
        read_fields=tuple(sorted(map(str, summary.read_fields))),
        written_fields=tuple(sorted(map(str, summary.written_fields))),
        embedded_constants=tuple(
            sorted(f"{oid}:{model.heap[oid].type}" for oid in summary.embedded_constants)
        ),
    )


def _resolve_class(model: ProgramModel, class_id: str) -> None:
    if class_id not in model.types:
        raise Unresolvable(class_id)


def _resolve_method(model: ProgramModel, method_id: str) -> MethodRef:
    try:
        ref = MethodRef.parse(method_id)
    except ValueError:
        raise Unresolvable(method_id) from None
    _resolve_class(model, ref.owner)
    for m in model.types[ref.owner].methods:
        if m.name == ref.name and m.param_types == ref.params:
            return ref
    raise Unresolvable(method_id)


def _resolve_field(model: ProgramModel, field_id: str) -> FieldRef:
    try:
        ref = FieldRef.parse(field_id)
    except ValueError:
        raise Unresolvable(field_id) from None
    _resolve_class(model, ref.owner)
    for f in model.types[ref.owner].fields:
        if f.name == ref.name:
            return ref
    raise Unresolvable(field_id)


def _resolve_constant(model: ProgramModel, descriptor: str) -> str:
    oid, _, tname = descriptor.rpartition(":")
    obj = model.heap.get(oid)
    if obj is None or obj.type != tname or not obj.trivial:
        raise Unresolvable(descriptor)
    return oid


def resolve_summary(serialized: SerializedSummary, model: ProgramModel) -> MethodSummary:
    """Turn a textual summary back into a MethodSummary against ``model``.

    Raises Unresolvable carrying the first identifier that fails to resolve.
    """
    _resolve_method(model, serialized.method_id)
    for t in serialized.instantiated_types:
        _resolve_class(model, t)
    return MethodSummary(
        static_invokes=frozenset(_resolve_method(model, m) for m in serialized.static_invokes),
        virtual_invokes=frozenset(_resolve_method(model, m) for m in serialized.virtual_invokes),
        special_invokes=frozenset(_resolve_method(model, m) for m in serialized.special_invokes),
        instantiated_types=frozenset(serialized.instantiated_types),
        read_fields=frozenset(_resolve_field(model, f) for f in serialized.read_fields),
        written_fields=frozenset(_resolve_field(model, f) for f in serialized.written_fields),
        embedded_constants=frozenset(_resolve_constant(model, c) for c in serialized.embedded_constants),
    )


@dataclass
class SummaryStore:
    entries: dict[str, SerializedSummary] = field(default_factory=dict)
    source_path: Optional[str] = None

    def get(self, method_id: str) -> Optional[SerializedSummary]:
        return self.entries.get(method_id)

    def add(self, entry: SerializedSummary) -> None:
        self.entries[entry.method_id] = entry

    def __len__(self) -> int:
        return len(self.entries)

    def to_text(self) -> str:
        parts = [HEADER + "\n"]
        for key in sorted(self.entries):
            parts.append(self.entries[key].to_text())
        return "".join(parts)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str, source_path: Optional[str] = None) -> SummaryStore:
        lines = text.splitlines()
        if not lines or lines[0].strip() != HEADER:
            raise StoreFormatError(f"missing header {HEADER!r}")
        store = cls(source_path=source_path)
        i = 1
        while i < len(lines):
            if not lines[i].strip():
                i += 1
                continue
            record = lines[i : i + len(SECTIONS) + 3]
            if len(record) < len(SECTIONS) + 3 or not record[0].startswith("method "):
                raise StoreFormatError(f"line {i + 1}: truncated or malformed record")
            method_id = record[0][len("method ") :].strip()
            if not record[1].startswith("hash "):
                raise StoreFormatError(f"line {i + 2}: expected hash")
            sections = {}
            for offset, line in enumerate(record[2 : 2 + len(SECTIONS)]):
                label, *items = line.split(" ")
                if _BY_LABEL.get(label) != SECTIONS[offset]:
                    raise StoreFormatError(f"line {i + 3 + offset}: expected {_LABELS[SECTIONS[offset]]}")
                sections[SECTIONS[offset]] = tuple(x for x in items if x)
            if record[-1].strip() != "end":
                raise StoreFormatError(f"line {i + len(record)}: expected end")
            store.add(SerializedSummary(method_id, record[1][5:].strip(), **sections))
            i += len(record)
        return store

    @classmethod
    def load(cls, path: str | os.PathLike) -> SummaryStore:
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), source_path=str(path))


def get_summary(
    ref: MethodRef,
    method: MethodDecl,
    model: ProgramModel,
    store: Optional[SummaryStore] = None,
) -> tuple[MethodSummary, bool]:
    """Summary for ``method``: a still-valid stored one if possible, else a fresh extraction.

    The second element tells whether the stored summary was reused.
    """
    if store is not None:
        serialized = store.get(str(ref))
        if serialized is not None and serialized.body_hash == method_hash(method):
            try:
                return resolve_summary(serialized, model), True
            except Unresolvable:
                pass
    return extract_summary(method), False
