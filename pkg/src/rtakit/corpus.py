"""Seeded generator of valid synthetic program models.

Output leans toward deep class hierarchies and interface-typed call sites,
where RTA and the points-to baseline disagree. The same CorpusSpec always
serializes to the same bytes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .hierarchy import Hierarchy
from .model import (
    ARRAY,
    CLASS,
    INTERFACE,
    Alloc,
    AllocArray,
    Const,
    FieldDecl,
    FieldRef,
    HeapObject,
    Instruction,
    InvokeSpecial,
    InvokeStatic,
    InvokeVirtual,
    LoadField,
    LoadStatic,
    MethodDecl,
    MethodRef,
    Move,
    Param,
    ProgramModel,
    Return,
    StoreField,
    StoreStatic,
    TypeDecl,
)

MAIN = "Main"


@dataclass(frozen=True)
class CorpusSpec:
    seed: int = 0
    type_count: int = 10
    method_count: int = 30
    max_hierarchy_depth: int = 4
    interface_density: float = 0.3
    call_density: float = 0.5
    field_density: float = 0.3
    heap_object_count: int = 8

    def __post_init__(self):
        if self.type_count < 1 or self.method_count < 1 or self.max_hierarchy_depth < 1:
            raise ValueError("type_count, method_count and max_hierarchy_depth must be positive")
        for name in ("interface_density", "call_density", "field_density"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be within [0, 1]")
        if self.heap_object_count < 0:
            raise ValueError("heap_object_count must be >= 0")


@dataclass
class _Type:
    name: str
    kind: str
    superclass: Optional[str] = None
    interfaces: list[str] = field(default_factory=list)
    element: Optional[str] = None
    abstract: bool = False
    depth: int = 0
    methods: list[MethodDecl] = field(default_factory=list)
    fields: list[FieldDecl] = field(default_factory=list)


class _Generator:
    def __init__(self, spec: CorpusSpec):
        self.spec = spec
        self.rng = random.Random(spec.seed)
        self.types: dict[str, _Type] = {}

    # -- hierarchy --------------------------------------------------------------

    def build_types(self) -> None:
        rng, spec = self.rng, self.spec
        self.types[MAIN] = _Type(MAIN, CLASS)
        others = spec.type_count - 1
        n_iface = min(others, round(others * spec.interface_density))
        n_array = min(others - n_iface, others // 10)
        n_class = others - n_iface - n_array
        ifaces: list[str] = []
        for i in range(n_iface):
            name = f"I{i}"
            parents = []
            if ifaces and rng.random() < 0.5:
                cands = [p for p in ifaces if self.types[p].depth < spec.max_hierarchy_depth]
                parents = sorted(set(rng.sample(cands, min(len(cands), rng.randint(1, 2))))) if cands else []
            depth = 1 + max((self.types[p].depth for p in parents), default=0)
            self.types[name] = _Type(name, INTERFACE, interfaces=parents, depth=depth)
            ifaces.append(name)
        classes: list[str] = []
        for i in range(n_class):
            name = f"C{i}"
            sup = None
            # prefer the most recent classes so chains get deep
            cands = [c for c in classes[-12:] if self.types[c].depth < spec.max_hierarchy_depth]
            if cands and rng.random() < 0.75:
                sup = rng.choice(cands)
            impl = []
            if ifaces and rng.random() < max(spec.interface_density, 0.2):
                impl = sorted(set(rng.sample(ifaces, min(len(ifaces), rng.randint(1, 2)))))
            depth = 1 + (self.types[sup].depth if sup else 0)
            self.types[name] = _Type(name, CLASS, sup, impl, abstract=rng.random() < 0.12, depth=depth)
            classes.append(name)
        concrete = [c for c in classes if not self.types[c].abstract]
        for i in range(n_array):
            elem = rng.choice(classes) if classes else MAIN
            name = f"{elem}[]"
            if name in self.types:
                continue
            self.types[name] = _Type(name, ARRAY, element=elem)
        self.classes = classes
        self.concrete = concrete
        self.ifaces = ifaces
        skeleton = {n: self._decl(t) for n, t in self.types.items()}
        self.hier = Hierarchy(ProgramModel(types=skeleton))
        self.ref_types = sorted(n for n, t in self.types.items() if t.kind != ARRAY and n != MAIN)
        self._concrete_subs: dict[str, list[str]] = {}

    def concrete_subtypes(self, t: str) -> list[str]:
        subs = self._concrete_subs.get(t)
        if subs is None:
            subs = sorted(
                s for s in self.hier.subtypes(t) if self.types[s].kind == CLASS and not self.types[s].abstract
            )
            self._concrete_subs[t] = subs
        return subs

    # -- members ----------------------------------------------------------------

    def random_ref_type(self) -> str:
        if not self.ref_types:
            return MAIN
        return self.rng.choice(self.ref_types)

    def build_fields(self) -> None:
        rng = self.rng
        self.instance_fields: list[tuple[str, FieldDecl]] = []
        self.static_fields: list[tuple[str, FieldDecl]] = []
        for name in self.classes:
            t = self.types[name]
            count = sum(1 for _ in range(3) if rng.random() < self.spec.field_density)
            for j in range(count):
                is_static = rng.random() < 0.35
                f = FieldDecl(f"f{j}", self.random_ref_type(), is_static)
                t.fields.append(f)
                (self.static_fields if is_static else self.instance_fields).append((name, f))

    def _signature(self) -> tuple[tuple[Param, ...], str]:
        rng = self.rng
        params = tuple(Param(f"p{k}", self.random_ref_type()) for k in range(rng.choice((0, 0, 1, 1, 2))))
        ret = "void" if rng.random() < 0.5 else self.random_ref_type()
        return params, ret

    def build_methods(self) -> None:
        """Declare every method header; bodies come later."""
        rng, spec = self.rng, self.spec
        budget = spec.method_count - 1
        self.types[MAIN].methods.append(MethodDecl("main", (), "void", is_static=True, body=()))
        if spec.type_count == 1:
            for k in range(budget):
                self.types[MAIN].methods.append(MethodDecl(f"s{k}", (), "void", is_static=True, body=()))
            return
        owners = self.ifaces + self.classes
        if not owners:
            return
        per_type = max(1, budget // len(owners))
        counter = 0
        order = list(owners)
        while budget > 0:
            for name in order:
                if budget <= 0:
                    break
                t = self.types[name]
                for _ in range(rng.randint(1, per_type * 2 - 1 if per_type > 1 else 1)):
                    if budget <= 0:
                        break
                    decl = self._new_method(t, counter)
                    counter += 1
                    if decl is not None:
                        t.methods.append(decl)
                        budget -= 1

    def _new_method(self, t: _Type, counter: int) -> Optional[MethodDecl]:
        rng = self.rng
        existing = {(m.name, m.param_types) for m in t.methods}
        if t.kind == INTERFACE:
            params, ret = self._signature()
            default = rng.random() < 0.3
            return MethodDecl(f"m{counter}", params, ret, is_abstract=not default, body=None if not default else ())
        # override something visible from a supertype
        if rng.random() < 0.55:
            inherited = []
            for sup in self.hier.supertypes(t.name)[1:]:
                for m in self.types[sup].methods:
                    if not m.is_static and (m.name, m.param_types) not in existing:
                        inherited.append(m)
            if inherited:
                base = rng.choice(inherited)
                abstract = t.abstract and rng.random() < 0.3
                return MethodDecl(base.name, base.params, base.returns, is_abstract=abstract, body=None if abstract else ())
        params, ret = self._signature()
        if rng.random() < 0.1 and t.methods:
            # overload of an existing name
            name = rng.choice(t.methods).name
            if (name, tuple(p.type for p in params)) in existing:
                name = f"m{counter}"
        else:
            name = f"m{counter}"
        is_static = rng.random() < 0.3
        abstract = not is_static and t.abstract and rng.random() < 0.3
        return MethodDecl(name, params, ret, is_static=is_static, is_abstract=abstract, body=None if abstract else ())

    # -- heap ---------------------------------------------------------------------

    def build_heap(self) -> None:
        rng, spec = self.rng, self.spec
        self.heap: dict[str, HeapObject] = {}
        self.inits: dict[str, dict[str, str]] = {}
        if not self.concrete or spec.heap_object_count == 0:
            return
        plan = []
        arrays = [n for n, t in self.types.items() if t.kind == ARRAY]
        for i in range(spec.heap_object_count):
            if arrays and rng.random() < 0.15:
                plan.append((f"o{i}", rng.choice(arrays)))
            else:
                plan.append((f"o{i}", rng.choice(self.concrete)))
        by_type: dict[str, list[str]] = {}
        for oid, tname in plan:
            by_type.setdefault(tname, []).append(oid)

        def value_for(tname: str) -> Optional[str]:
            if tname not in self.types:
                return None
            cands = [o for s in self.concrete_subtypes(tname) for o in by_type.get(s, ())]
            return rng.choice(cands) if cands else None

        for oid, tname in plan:
            t = self.types[tname]
            values: dict[FieldRef, str] = {}
            elements: tuple[str, ...] = ()
            if t.kind == ARRAY:
                picks = [value_for(t.element) for _ in range(rng.randint(0, 3))]
                elements = tuple(p for p in picks if p is not None)
            else:
                for cls in self.hier.superclass_chain(tname):
                    for f in self.types[cls].fields:
                        if not f.is_static and rng.random() < 0.7:
                            v = value_for(f.type)
                            if v is not None:
                                values[FieldRef(cls, f.name)] = v
            trivial = not values and not elements and rng.random() < 0.5
            self.heap[oid] = HeapObject(oid, tname, values, elements, trivial)
        for owner, f in self.static_fields:
            if rng.random() < 0.6:
                v = value_for(f.type)
                if v is not None:
                    self.inits.setdefault(owner, {})[f.name] = v

    # -- bodies -------------------------------------------------------------------

    def build_bodies(self) -> None:
        self.instance_methods = []
        self.static_methods = []
        self.special_targets = []
        for name, t in self.types.items():
            for m in t.methods:
                ref = m.ref(name)
                if m.is_static:
                    if ref != MethodRef(MAIN, "main", ()):
                        self.static_methods.append((ref, m))
                else:
                    self.instance_methods.append((ref, m))
                    if not m.is_abstract:
                        self.special_targets.append((ref, m))
        for name, t in self.types.items():
            new_methods = []
            for m in t.methods:
                if m.body is not None:
                    is_main = name == MAIN and m.name == "main"
                    body = self._body(name, m, 8 + int(20 * self.spec.call_density) if is_main else None)
                    m = MethodDecl(m.name, m.params, m.returns, m.is_static, m.is_abstract, body)
                new_methods.append(m)
            t.methods = new_methods

    def _body(self, owner: str, m: MethodDecl, length: Optional[int]) -> tuple[Instruction, ...]:
        rng, spec = self.rng, self.spec
        out: list[Instruction] = []
        local: dict[str, str] = {}
        if not m.is_static:
            local["this"] = owner
        for p in m.params:
            local[p.name] = p.type
        counter = [0]

        def fresh() -> str:
            counter[0] += 1
            return f"v{counter[0]}"

        def value(tname: str, allow_new: bool = True) -> Optional[str]:
            if tname not in self.types:
                return None
            allowed = self.hier.subtypes(tname)
            have = [l for l, lt in local.items() if lt in allowed]
            if have and (rng.random() < 0.7 or not allow_new):
                return rng.choice(have)
            if not allow_new:
                return None
            subs = self.concrete_subtypes(tname)
            if not subs:
                return rng.choice(have) if have else None
            dst = fresh()
            s = rng.choice(subs)
            out.append(Alloc(dst, s))
            local[dst] = s
            return dst

        def bind(decl_ret: str) -> Optional[str]:
            if decl_ret != "void" and rng.random() < 0.6:
                dst = fresh()
                local[dst] = decl_ret
                return dst
            return None

        if length is None:
            length = rng.randint(1, 2 + int(6 * spec.call_density))
        ops = ["new", "virtual", "static", "special", "field", "const", "move", "array"]
        weights = [
            0.22,
            0.1 + 0.5 * spec.call_density,
            0.1 + 0.3 * spec.call_density,
            0.05 + 0.1 * spec.call_density,
            0.05 + 0.3 * spec.field_density,
            0.06 if self.heap else 0.0,
            0.05,
            0.03 if any(t.kind == ARRAY for t in self.types.values()) else 0.0,
        ]
        for _ in range(length):
            op = rng.choices(ops, weights)[0]
            if op == "new" and self.concrete:
                dst = fresh()
                t = rng.choice(self.concrete)
                out.append(Alloc(dst, t))
                local[dst] = t
            elif op == "array":
                arrays = [n for n, t in self.types.items() if t.kind == ARRAY]
                if arrays:
                    dst = fresh()
                    t = rng.choice(arrays)
                    out.append(AllocArray(dst, t))
                    local[dst] = t
            elif op in ("virtual", "special") and self.instance_methods:
                pool = self.instance_methods if op == "virtual" else self.special_targets
                if not pool:
                    continue
                ref, decl = rng.choice(pool)
                # special receivers come from existing values only half of the time
                recv = value(ref.owner, allow_new=op == "virtual" or rng.random() < 0.5)
                if recv is None:
                    continue
                args = [value(p.type) for p in decl.params]
                if any(a is None for a in args):
                    continue
                cls = InvokeVirtual if op == "virtual" else InvokeSpecial
                out.append(cls(bind(decl.returns), ref, recv, tuple(args)))
            elif op == "static" and self.static_methods:
                ref, decl = rng.choice(self.static_methods)
                args = [value(p.type) for p in decl.params]
                if any(a is None for a in args):
                    continue
                out.append(InvokeStatic(bind(decl.returns), ref, tuple(args)))
            elif op == "field":
                self._field_op(out, local, fresh, value)
            elif op == "const" and self.heap:
                dst = fresh()
                oid = rng.choice(sorted(self.heap))
                out.append(Const(dst, oid))
                local[dst] = self.heap[oid].type
            elif op == "move" and local:
                src = rng.choice(sorted(local))
                dst = fresh()
                out.append(Move(dst, src))
                local[dst] = local[src]
        if m.returns != "void" and m.returns in self.types:
            out.append(Return(value(m.returns)))
        else:
            out.append(Return())
        return tuple(out)

    def _field_op(self, out, local, fresh, value) -> None:
        rng = self.rng
        use_static = self.static_fields and (not self.instance_fields or rng.random() < 0.4)
        if use_static:
            owner, f = rng.choice(self.static_fields)
            ref = FieldRef(owner, f.name)
            if rng.random() < 0.6:
                dst = fresh()
                out.append(LoadStatic(dst, ref))
                local[dst] = f.type
            else:
                src = value(f.type)
                if src is not None:
                    out.append(StoreStatic(ref, src))
        elif self.instance_fields:
            owner, f = rng.choice(self.instance_fields)
            ref = FieldRef(owner, f.name)
            obj = value(owner)
            if obj is None:
                return
            if rng.random() < 0.6:
                dst = fresh()
                out.append(LoadField(dst, obj, ref))
                local[dst] = f.type
            else:
                src = value(f.type)
                if src is not None:
                    out.append(StoreField(obj, ref, src))

    # -- assembly -----------------------------------------------------------------

    def _decl(self, t: _Type, static_values: Optional[dict[str, str]] = None) -> TypeDecl:
        return TypeDecl(
            name=t.name,
            kind=t.kind,
            superclass=t.superclass,
            interfaces=tuple(t.interfaces),
            element_type=t.element,
            is_abstract=t.abstract,
            methods=tuple(t.methods),
            fields=tuple(t.fields),
            static_values=dict(static_values or {}),
        )

    def generate(self) -> ProgramModel:
        self.build_types()
        self.build_fields()
        self.build_methods()
        self.build_heap()
        self.build_bodies()
        types = {n: self._decl(t, self.inits.get(n)) for n, t in self.types.items()}
        return ProgramModel(
            types=types,
            roots=(MethodRef(MAIN, "main", ()),),
            heap=self.heap,
            initialized=frozenset(self.inits),
        )


def generate_model(spec: CorpusSpec) -> ProgramModel:
    return _Generator(spec).generate()


def oracle_corpus_spec(seed: int) -> CorpusSpec:
    """Small corpus parameters used by the equivalence checks (<=100 types, <=400 methods)."""
    rng = random.Random(10_000 + seed)
    types = rng.randint(2, 100)
    return CorpusSpec(
        seed=seed,
        type_count=types,
        method_count=rng.randint(types, min(400, types * 5)),
        max_hierarchy_depth=rng.randint(1, 6),
        interface_density=rng.choice((0.1, 0.3, 0.5)),
        call_density=rng.choice((0.3, 0.5, 0.8)),
        field_density=rng.choice((0.1, 0.3, 0.6)),
        heap_object_count=rng.randint(0, 20),
    )
