from __future__ import annotations

from dataclasses import dataclass, fields

from .model import (
    Alloc,
    AllocArray,
    Const,
    FieldRef,
    InvokeSpecial,
    InvokeStatic,
    InvokeVirtual,
    LoadField,
    LoadStatic,
    MethodDecl,
    MethodRef,
    NoBody,
    StoreField,
    StoreStatic,
)


@dataclass(frozen=True)
class MethodSummary:
    """Effects of one method body, as seven duplicate-free collections."""

    static_invokes: frozenset[MethodRef] = frozenset()
    virtual_invokes: frozenset[MethodRef] = frozenset()
    special_invokes: frozenset[MethodRef] = frozenset()
    instantiated_types: frozenset[str] = frozenset()
    read_fields: frozenset[FieldRef] = frozenset()
    written_fields: frozenset[FieldRef] = frozenset()
    embedded_constants: frozenset[str] = frozenset()

    def is_empty(self) -> bool:
        return not any(getattr(self, f.name) for f in fields(self))


SECTIONS = tuple(f.name for f in fields(MethodSummary))


def extract_summary(method: MethodDecl) -> MethodSummary:
    if method.body is None:
        raise NoBody(f"abstract method {method.name} has no body")
    static, virtual, special = set(), set(), set()
    types, reads, writes, consts = set(), set(), set(), set()
    for ins in method.body:
        if isinstance(ins, (Alloc, AllocArray)):
            types.add(ins.type)
        elif isinstance(ins, InvokeStatic):
            static.add(ins.method)
        elif isinstance(ins, InvokeVirtual):
            virtual.add(ins.method)
        elif isinstance(ins, InvokeSpecial):
            special.add(ins.method)
        elif isinstance(ins, (LoadField, LoadStatic)):
            reads.add(ins.field)
        elif isinstance(ins, (StoreField, StoreStatic)):
            writes.add(ins.field)
        elif isinstance(ins, Const):
            consts.add(ins.obj)
    return MethodSummary(
        frozenset(static),
        frozenset(virtual),
        frozenset(special),
        frozenset(types),
        frozenset(reads),
        frozenset(writes),
        frozenset(consts),
    )
