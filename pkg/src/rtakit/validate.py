"""Model invariant checks. Violations are returned as data, never raised."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import (
    ARRAY,
    CLASS,
    INTERFACE,
    PRIMITIVES,
    ROOT_TYPE,
    Alloc,
    AllocArray,
    Const,
    InvokeSpecial,
    InvokeStatic,
    InvokeVirtual,
    LoadField,
    LoadStatic,
    MethodDecl,
    ModelError,
    ProgramModel,
    StoreField,
    StoreStatic,
    defined_local,
    used_locals,
)


@dataclass(frozen=True)
class Violation:
    rule: str
    element: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.rule} at {self.element}" + (f": {self.detail}" if self.detail else "")


class ModelViolations(ModelError):
    def __init__(self, violations: list[Violation], line: Optional[int] = None):
        self.violations = violations
        more = f" (+{len(violations) - 1} more)" if len(violations) > 1 else ""
        super().__init__(f"{violations[0]}{more}", line, 1 if line is not None else None)


def find_cycle(model: ProgramModel) -> Optional[list[str]]:
    """Return one cycle in the declared supertype graph, or None."""
    white, grey, black = 0, 1, 2
    color = {name: white for name in model.types}

    def edges(name: str) -> list[str]:
        t = model.types[name]
        out = [s for s in ([t.superclass] if t.superclass else []) + list(t.interfaces)]
        return [s for s in out if s in model.types]

    for start in model.types:
        if color[start] != white:
            continue
        stack = [(start, iter(edges(start)))]
        path = [start]
        color[start] = grey
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = black
                stack.pop()
                path.pop()
            elif color[nxt] == grey:
                return path[path.index(nxt):] + [nxt]
            elif color[nxt] == white:
                color[nxt] = grey
                stack.append((nxt, iter(edges(nxt))))
                path.append(nxt)
    return None


class _Checker:
    def __init__(self, model: ProgramModel):
        self.model = model
        self.out: list[Violation] = []

    def add(self, rule: str, element: str, detail: str = "") -> None:
        self.out.append(Violation(rule, element, detail))

    def type_ref(self, name: Optional[str], element: str, allow_primitive: bool = True) -> bool:
        if name is None:
            return False
        if allow_primitive and name in PRIMITIVES:
            return True
        if name not in self.model.types:
            self.add("UndeclaredType", element, name)
            return False
        return True

    def run(self) -> list[Violation]:
        m = self.model
        for t in m.types.values():
            self.check_type(t)
        cycle = find_cycle(m)
        if cycle:
            self.add("CyclicHierarchy", cycle[0], " -> ".join(cycle))
        for t in m.types.values():
            for meth in t.methods:
                self.check_method(t.name, meth)
        self.check_roots()
        self.check_heap()
        if not cycle and not any(v.rule == "UndeclaredType" for v in self.out):
            self.check_defaults()
        return self.out

    def check_type(self, t) -> None:
        m = self.model
        if t.kind == INTERFACE:
            if t.superclass not in (None, ROOT_TYPE):
                self.add("InterfaceSuperclass", t.name, t.superclass)
        elif t.kind == ARRAY:
            if t.element_type is None:
                self.add("ArrayElement", t.name, "missing element type")
            else:
                self.type_ref(t.element_type, t.name)
            if t.superclass not in (None, ROOT_TYPE) or t.interfaces:
                self.add("ArraySupertype", t.name, "arrays extend only the root type")
            if t.methods or t.fields:
                self.add("ArrayMembers", t.name)
        else:
            if t.element_type is not None:
                self.add("ArrayElement", t.name, "element type on a non-array")
            if t.superclass is not None and self.type_ref(t.superclass, t.name, False):
                if m.types[t.superclass].kind != CLASS:
                    self.add("BadSupertype", t.name, f"{t.superclass} is not a class")
        for iface in t.interfaces:
            if self.type_ref(iface, t.name, False) and m.types[iface].kind != INTERFACE:
                self.add("BadSupertype", t.name, f"{iface} is not an interface")
        for f in t.fields:
            self.type_ref(f.type, f"{t.name}.{f.name}")
        for meth in t.methods:
            ref = str(meth.ref(t.name))
            for p in meth.params:
                self.type_ref(p.type, ref)
            self.type_ref(meth.returns, ref)
            if meth.is_abstract and meth.is_static:
                self.add("StaticAbstract", ref)
            if meth.is_abstract and t.kind == CLASS and not t.is_abstract:
                self.add("AbstractInConcreteClass", ref)
            if meth.is_abstract != (meth.body is None):
                self.add("AbstractBody", ref)
        for fname in t.static_values:
            f = t.field(fname)
            if f is None or not f.is_static:
                self.add("StaticValueNotStatic", f"{t.name}.{fname}")
            elif t.static_values[fname] not in m.heap:
                self.add("UndeclaredObject", f"{t.name}.{fname}", t.static_values[fname])

    def check_method(self, owner: str, meth: MethodDecl) -> None:
        if meth.body is None:
            return
        ref = str(meth.ref(owner))
        defined = {p.name for p in meth.params}
        if len(defined) != len(meth.params) or (not meth.is_static and "this" in defined):
            self.add("Reassignment", ref, "duplicate parameter name")
        if not meth.is_static:
            defined.add("this")
        for idx, ins in enumerate(meth.body):
            at = f"{ref}#{idx}"
            for local in used_locals(ins):
                if local not in defined:
                    self.add("UseBeforeDef", at, local)
            dst = defined_local(ins)
            if dst is not None:
                if dst in defined:
                    self.add("Reassignment", at, dst)
                defined.add(dst)
            self.check_instruction(ins, at)

    def check_instruction(self, ins, at: str) -> None:
        m = self.model
        if isinstance(ins, Alloc):
            if self.type_ref(ins.type, at, False):
                t = m.types[ins.type]
                if t.kind != CLASS or t.is_abstract:
                    self.add("InstantiateAbstract", at, ins.type)
        elif isinstance(ins, AllocArray):
            if self.type_ref(ins.type, at, False) and m.types[ins.type].kind != ARRAY:
                self.add("NotAnArray", at, ins.type)
        elif isinstance(ins, (InvokeStatic, InvokeVirtual, InvokeSpecial)):
            target = ins.method
            for p in target.params:
                self.type_ref(p, at)
            if not self.type_ref(target.owner, at, False):
                return
            decl = m.method(target)
            if decl is None:
                self.add("UndeclaredMethod", at, str(target))
                return
            if isinstance(ins, InvokeStatic) != decl.is_static:
                self.add("StaticMismatch", at, str(target))
            if isinstance(ins, InvokeSpecial) and decl.is_abstract:
                self.add("SpecialAbstract", at, str(target))
            if len(ins.args) != len(decl.params):
                self.add("ArityMismatch", at, f"{target} takes {len(decl.params)}")
        elif isinstance(ins, (LoadField, StoreField, LoadStatic, StoreStatic)):
            if not self.type_ref(ins.field.owner, at, False):
                return
            decl = m.field(ins.field)
            if decl is None:
                self.add("UndeclaredField", at, str(ins.field))
                return
            want_static = isinstance(ins, (LoadStatic, StoreStatic))
            if decl.is_static != want_static:
                self.add("FieldStaticMismatch", at, str(ins.field))
        elif isinstance(ins, Const):
            if ins.obj not in m.heap:
                self.add("UndeclaredObject", at, ins.obj)

    def check_roots(self) -> None:
        if not self.model.roots:
            self.add("NoRoots", "<model>")
        for root in self.model.roots:
            decl = self.model.method(root)
            if decl is None:
                self.add("RootUnresolved", str(root))
            elif decl.is_abstract:
                self.add("RootAbstract", str(root))

    def check_heap(self) -> None:
        m = self.model
        for name in m.initialized:
            self.type_ref(name, f"init {name}", False)
        for obj in m.heap.values():
            at = obj.id
            if not self.type_ref(obj.type, at, False):
                continue
            t = m.types[obj.type]
            if not t.is_concrete:
                self.add("AbstractHeapObject", at, obj.type)
            if obj.elements and t.kind != ARRAY:
                self.add("NotAnArray", at, obj.type)
            for e in obj.elements:
                if e not in m.heap:
                    self.add("UndeclaredObject", at, e)
            supers = self._superclass_chain(obj.type)
            for ref, value in obj.field_values.items():
                decl = m.field(ref)
                if decl is None or decl.is_static or ref.owner not in supers:
                    self.add("HeapFieldNotDeclared", at, str(ref))
                if value not in m.heap:
                    self.add("UndeclaredObject", at, value)

    def _superclass_chain(self, name: str) -> set[str]:
        seen: set[str] = set()
        cur: Optional[str] = name
        while cur is not None and cur in self.model.types and cur not in seen:
            seen.add(cur)
            cur = self.model.types[cur].superclass
        if ROOT_TYPE in self.model.types:
            seen.add(ROOT_TYPE)
        return seen

    def check_defaults(self) -> None:
        from .hierarchy import AmbiguousDefault, Hierarchy

        h = Hierarchy(self.model)
        for t in self.model.types.values():
            if not t.is_concrete:
                continue
            seen = set()
            for sup in h.supertypes(t.name):
                sdecl = self.model.types[sup]
                if sdecl.kind != INTERFACE:
                    continue
                for meth in sdecl.methods:
                    if meth.is_static:
                        continue
                    key = (meth.name, meth.param_types)
                    if key in seen:
                        continue
                    seen.add(key)
                    try:
                        h.resolve_method(t.name, meth.ref(sup))
                    except AmbiguousDefault as exc:
                        self.add("AmbiguousDefault", t.name, str(exc))


def validate(model: ProgramModel) -> list[Violation]:
    return _Checker(model).run()
