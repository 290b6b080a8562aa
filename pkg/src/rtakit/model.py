"""Closed-world program model: types, methods, fields, instructions and the build-time heap."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterator, Mapping, NamedTuple, Optional, Union

ROOT_TYPE = "Object"
PRIMITIVES = frozenset(
    {"void", "boolean", "byte", "char", "short", "int", "long", "float", "double"}
)

CLASS = "class"
INTERFACE = "interface"
ARRAY = "array"


class ModelError(Exception):
    """Raised when a model file cannot be turned into a valid ProgramModel."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


class NoBody(ModelError):
    pass


def _split_member(text: str) -> tuple[str, str]:
    # type names may be dotted (java.lang.String), so split on the last dot
    owner, dot, member = text.rpartition(".")
    if not dot or not owner or not member:
        raise ValueError(f"not a qualified member reference: {text!r}")
    return owner, member


class MethodRef(NamedTuple):
    owner: str
    name: str
    params: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.owner}.{self.name}({','.join(self.params)})"

    @classmethod
    def parse(cls, text: str) -> MethodRef:
        text = text.strip()
        if not text.endswith(")") or "(" not in text:
            raise ValueError(f"not a method reference: {text!r}")
        head, _, rest = text.partition("(")
        owner, name = _split_member(head)
        inner = rest[:-1].strip()
        params = tuple(p.strip() for p in inner.split(",")) if inner else ()
        return cls(owner, name, params)


class FieldRef(NamedTuple):
    owner: str
    name: str

    def __str__(self) -> str:
        return f"{self.owner}.{self.name}"

    @classmethod
    def parse(cls, text: str) -> FieldRef:
        owner, name = _split_member(text.strip())
        return cls(owner, name)


# -- instructions -------------------------------------------------------------


@dataclass(frozen=True)
class Alloc:
    dst: str
    type: str


@dataclass(frozen=True)
class AllocArray:
    dst: str
    type: str


@dataclass(frozen=True)
class InvokeStatic:
    dst: Optional[str]
    method: MethodRef
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class InvokeVirtual:
    dst: Optional[str]
    method: MethodRef
    receiver: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class InvokeSpecial:
    dst: Optional[str]
    method: MethodRef
    receiver: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class LoadField:
    dst: str
    obj: str
    field: FieldRef


@dataclass(frozen=True)
class StoreField:
    obj: str
    field: FieldRef
    src: str


@dataclass(frozen=True)
class LoadStatic:
    dst: str
    field: FieldRef


@dataclass(frozen=True)
class StoreStatic:
    field: FieldRef
    src: str


@dataclass(frozen=True)
class Const:
    dst: str
    obj: str


@dataclass(frozen=True)
class Move:
    dst: str
    src: str


@dataclass(frozen=True)
class Return:
    src: Optional[str] = None


Instruction = Union[
    Alloc,
    AllocArray,
    InvokeStatic,
    InvokeVirtual,
    InvokeSpecial,
    LoadField,
    StoreField,
    LoadStatic,
    StoreStatic,
    Const,
    Move,
    Return,
]
Invoke = (InvokeStatic, InvokeVirtual, InvokeSpecial)


def defined_local(ins: Instruction) -> Optional[str]:
    return getattr(ins, "dst", None)


def used_locals(ins: Instruction) -> list[str]:
    if isinstance(ins, (InvokeVirtual, InvokeSpecial)):
        return [ins.receiver, *ins.args]
    if isinstance(ins, InvokeStatic):
        return list(ins.args)
    if isinstance(ins, LoadField):
        return [ins.obj]
    if isinstance(ins, StoreField):
        return [ins.obj, ins.src]
    if isinstance(ins, (StoreStatic, Move)):
        return [ins.src]
    if isinstance(ins, Return):
        return [ins.src] if ins.src is not None else []
    return []


# -- declarations -------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str
    type: str


@dataclass(frozen=True)
class FieldDecl:
    name: str
    type: str
    is_static: bool = False


@dataclass(frozen=True)
class MethodDecl:
    name: str
    params: tuple[Param, ...] = ()
    returns: str = "void"
    is_static: bool = False
    is_abstract: bool = False
    body: Optional[tuple[Instruction, ...]] = ()

    @property
    def param_types(self) -> tuple[str, ...]:
        cached = self.__dict__.get("_param_types")
        if cached is None:
            cached = tuple(p.type for p in self.params)
            object.__setattr__(self, "_param_types", cached)
        return cached

    def ref(self, owner: str) -> MethodRef:
        return MethodRef(owner, self.name, self.param_types)


@dataclass(frozen=True)
class TypeDecl:
    name: str
    kind: str = CLASS
    superclass: Optional[str] = None
    interfaces: tuple[str, ...] = ()
    element_type: Optional[str] = None
    is_abstract: bool = False
    methods: tuple[MethodDecl, ...] = ()
    fields: tuple[FieldDecl, ...] = ()
    static_values: Mapping[str, str] = field(default_factory=dict)

    @property
    def is_concrete(self) -> bool:
        return self.kind != INTERFACE and not self.is_abstract

    def _index(self, attr: str, build):
        # lock-free memo: a racing thread at worst builds an identical dict
        index = self.__dict__.get(attr)
        if index is None:
            index = build()
            object.__setattr__(self, attr, index)
        return index

    def method(self, name: str, params: tuple[str, ...]) -> Optional[MethodDecl]:
        index = self._index("_methods_by_sig", lambda: {(m.name, m.param_types): m for m in reversed(self.methods)})
        return index.get((name, params))

    def field(self, name: str) -> Optional[FieldDecl]:
        index = self._index("_fields_by_name", lambda: {f.name: f for f in reversed(self.fields)})
        return index.get(name)


@dataclass(frozen=True)
class HeapObject:
    id: str
    type: str
    field_values: Mapping[FieldRef, str] = field(default_factory=dict)
    elements: tuple[str, ...] = ()
    trivial: bool = False


@dataclass(frozen=True)
class ProgramModel:
    types: Mapping[str, TypeDecl]
    roots: tuple[MethodRef, ...] = ()
    heap: Mapping[str, HeapObject] = field(default_factory=dict)
    initialized: frozenset[str] = frozenset()

    def method(self, ref: MethodRef) -> Optional[MethodDecl]:
        decl = self.types.get(ref.owner)
        return decl.method(ref.name, ref.params) if decl is not None else None

    def field(self, ref: FieldRef) -> Optional[FieldDecl]:
        decl = self.types.get(ref.owner)
        return decl.field(ref.name) if decl is not None else None

    def methods(self) -> Iterator[tuple[MethodRef, MethodDecl]]:
        for t in self.types.values():
            for m in t.methods:
                yield m.ref(t.name), m

    def fields(self) -> Iterator[tuple[FieldRef, FieldDecl]]:
        for t in self.types.values():
            for f in t.fields:
                yield FieldRef(t.name, f.name), f

    def static_values(self) -> Iterator[tuple[FieldRef, str]]:
        """Values of static fields of build-time initialized classes."""
        for name in sorted(self.initialized):
            decl = self.types.get(name)
            if decl is None:
                continue
            for fname, obj in sorted(decl.static_values.items()):
                yield FieldRef(name, fname), obj

    def method_count(self) -> int:
        return sum(len(t.methods) for t in self.types.values())


def fingerprint(model: ProgramModel) -> str:
    """Short structural digest identifying a model's element universe."""
    h = hashlib.sha1()
    for name in sorted(model.types):
        h.update(name.encode())
        h.update(b"\0")
    for ref in sorted(str(r) for r, _ in model.methods()):
        h.update(ref.encode())
        h.update(b"\0")
    for root in model.roots:
        h.update(str(root).encode())
    return h.hexdigest()[:16]
