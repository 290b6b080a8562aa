"""Random well-formed instruction insertion for monotonicity checks."""

import random
from dataclasses import replace

from rtakit.model import (
    Alloc,
    Const,
    InvokeSpecial,
    InvokeStatic,
    InvokeVirtual,
    LoadField,
    LoadStatic,
    MethodRef,
    ProgramModel,
    Return,
    StoreField,
    StoreStatic,
    defined_local,
)


def _locals(decl):
    names = [p.name for p in decl.params]
    if not decl.is_static:
        names.append("this")
    names += [d for d in map(defined_local, decl.body) if d]
    return names


def random_instruction(model: ProgramModel, decl, rng: random.Random):
    """An instruction that keeps ``decl`` valid when placed before its final return."""
    fresh = f"mut{len(decl.body)}_{rng.randrange(10**6)}"
    local = _locals(decl)
    pick = lambda xs: xs[rng.randrange(len(xs))] if xs else None  # noqa: E731
    concrete = [t.name for t in model.types.values() if t.is_concrete and t.kind == "class"]
    refs = [(ref, d) for ref, d in model.methods()]
    static = [r for r, d in refs if d.is_static]
    virtual = [r for r, d in refs if not d.is_static]
    special = [r for r, d in refs if not d.is_static and not d.is_abstract]
    fields = [(ref, f) for ref, f in model.fields()]
    inst = [r for r, f in fields if not f.is_static]
    stat = [r for r, f in fields if f.is_static]
    options = []
    if concrete:
        options.append(lambda: Alloc(fresh, pick(concrete)))
    if static and local:
        options.append(lambda: _call(InvokeStatic, pick(static), None, local, pick))
    if virtual and local:
        options.append(lambda: _call(InvokeVirtual, pick(virtual), pick(local), local, pick))
    if special and local:
        options.append(lambda: _call(InvokeSpecial, pick(special), pick(local), local, pick))
    if inst and local:
        options.append(lambda: LoadField(fresh, pick(local), pick(inst)))
        options.append(lambda: StoreField(pick(local), pick(inst), pick(local)))
    if stat:
        options.append(lambda: LoadStatic(fresh, pick(stat)))
        if local:
            options.append(lambda: StoreStatic(pick(stat), pick(local)))
    if model.heap:
        options.append(lambda: Const(fresh, pick(sorted(model.heap))))
    return pick(options)()


def _call(cls, ref: MethodRef, receiver, local, pick):
    args = tuple(pick(local) for _ in ref.params)
    if cls is InvokeStatic:
        return cls(None, ref, args)
    return cls(None, ref, receiver, args)


def append_instruction(model: ProgramModel, ref: MethodRef, ins) -> ProgramModel:
    owner = model.types[ref.owner]
    methods = []
    for m in owner.methods:
        if m.ref(owner.name) == ref:
            body = list(m.body)
            at = len(body) - 1 if body and isinstance(body[-1], Return) else len(body)
            body.insert(at, ins)
            m = replace(m, body=tuple(body))
        methods.append(m)
    types = dict(model.types)
    types[owner.name] = replace(owner, methods=tuple(methods))
    return replace(model, types=types)
