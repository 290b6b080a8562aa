"""Type-based points-to analysis, used as the precision baseline for RTA.

Each reachable method gets a type-flow graph. Allocation and constant nodes
produce types, which flow along use edges into locals, fields, parameters
and return values. Static calls are linked when the caller's graph is built;
virtual and special calls are linked as receiver types arrive. Objects are
abstracted by their type only, fields are one global node each, and every
node filters incoming types by its declared type.
"""

from __future__ import annotations

import collections
import time
from dataclasses import dataclass, field
from typing import Optional

from .engine import AnalysisConfig, AnalysisResult, Diagnostics
from .heap import HeapScanner
from .hierarchy import Hierarchy
from .model import (
    Alloc,
    AllocArray,
    Const,
    FieldRef,
    HeapObject,
    InvokeSpecial,
    InvokeStatic,
    InvokeVirtual,
    LoadField,
    LoadStatic,
    MethodRef,
    Move,
    ProgramModel,
    Return,
    StoreField,
    StoreStatic,
    fingerprint,
)

_PREFIX = {
    "allocation": "an",
    "formal-parameter": "fn",
    "return": "rn",
    "invocation": "in",
    "field-load": "ld",
    "field-store": "st",
    "constant": "cn",
    "field": "fd",
}


@dataclass(eq=False)
class FlowNode:
    id: str
    kind: str
    declared: str
    method: Optional[MethodRef] = None
    label: str = ""
    state: set[str] = field(default_factory=set)
    uses: list["FlowNode"] = field(default_factory=list, repr=False)
    observers: list["Invocation"] = field(default_factory=list, repr=False)
    pending: set[str] = field(default_factory=set, repr=False)

    def __repr__(self) -> str:
        return f"FlowNode({self.id} {self.kind} {self.label} {sorted(self.state)})"


@dataclass(eq=False)
class Invocation:
    node: FlowNode
    kind: str
    target: MethodRef
    receiver: Optional[FlowNode]
    args: list[FlowNode]
    linked: set[MethodRef] = field(default_factory=set)


@dataclass
class MethodFlows:
    formals: list[FlowNode]
    this: Optional[FlowNode]
    return_node: FlowNode
    invocations: list[Invocation] = field(default_factory=list)


class TypeFlowGraph:
    def __init__(self) -> None:
        self.nodes: list[FlowNode] = []
        self.edges: list[tuple[str, str, str]] = []
        self.per_method: dict[MethodRef, MethodFlows] = {}
        self.field_nodes: dict[FieldRef, FlowNode] = {}
        self._counters: collections.Counter[str] = collections.Counter()

    def new_node(self, kind: str, declared: str, method: Optional[MethodRef], label: str = "") -> FlowNode:
        prefix = _PREFIX[kind]
        self._counters[prefix] += 1
        node = FlowNode(f"{prefix}{self._counters[prefix]}", kind, declared, method, label)
        self.nodes.append(node)
        return node

    def node(self, node_id: str) -> FlowNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def dump(self) -> str:
        """Text listing: one ``node`` line per node, one ``edge`` line per edge."""
        lines = []
        for n in self.nodes:
            owner = str(n.method) if n.method is not None else "-"
            state = ",".join(sorted(n.state))
            lines.append(f"node {n.id} {n.kind} {owner} {n.label or '-'} declared={n.declared} state={{{state}}}")
        for src, dst, kind in self.edges:
            lines.append(f"edge {src} -> {dst} {kind}")
        return "\n".join(lines) + "\n"


class PointsToAnalysis:
    def __init__(
        self,
        model: ProgramModel,
        config: Optional[AnalysisConfig] = None,
        hierarchy: Optional[Hierarchy] = None,
    ):
        self.model = model
        self.config = config or AnalysisConfig()
        self.hierarchy = hierarchy or Hierarchy(model)
        self.graph = TypeFlowGraph()
        self.diagnostics = Diagnostics()
        self.instantiated: set[str] = set()
        self.read_fields: set[FieldRef] = set()
        self.written_fields: set[FieldRef] = set()
        self.virtual_invoked: set[MethodRef] = set()
        self.special_invoked: set[MethodRef] = set()
        self.provenance: dict[object, str] = {}
        self._worklist: collections.deque[FlowNode] = collections.deque()
        self._to_build: collections.deque[MethodRef] = collections.deque()
        self._subtypes: dict[str, frozenset[str]] = {}
        self.scanner = HeapScanner(
            model,
            is_read=self.read_fields.__contains__,
            on_object=self._on_heap_object,
            on_field_value=self._on_field_value,
        )

    # -- graph construction ---------------------------------------------------

    def _allowed(self, declared: str) -> frozenset[str]:
        allowed = self._subtypes.get(declared)
        if allowed is None:
            allowed = self.hierarchy.subtypes(declared) if declared in self.model.types else frozenset()
            self._subtypes[declared] = allowed
        return allowed

    def flows(self, m: MethodRef, cause: str = "") -> MethodFlows:
        """Flow interface of ``m``; creating it makes ``m`` reachable and queues its body."""
        flows = self.graph.per_method.get(m)
        if flows is not None:
            return flows
        decl = self.model.method(m)
        this = None
        formals = []
        if not decl.is_static:
            this = self.graph.new_node("formal-parameter", m.owner, m, "this")
            formals.append(this)
        for p in decl.params:
            formals.append(self.graph.new_node("formal-parameter", p.type, m, p.name))
        ret = self.graph.new_node("return", decl.returns, m)
        flows = MethodFlows(formals, this, ret)
        self.graph.per_method[m] = flows
        self.provenance[m] = cause
        self._to_build.append(m)
        return flows

    def _field_node(self, f: FieldRef) -> FlowNode:
        node = self.graph.field_nodes.get(f)
        if node is None:
            decl = self.model.field(f)
            node = self.graph.new_node("field", decl.type, None, str(f))
            self.graph.field_nodes[f] = node
        return node

    def _build(self, m: MethodRef) -> None:
        decl = self.model.method(m)
        flows = self.graph.per_method[m]
        new = self.graph.new_node
        local: dict[str, FlowNode] = {}
        if flows.this is not None:
            local["this"] = flows.this
        offset = 1 if flows.this is not None else 0
        for p, node in zip(decl.params, flows.formals[offset:]):
            local[p.name] = node
        for ins in decl.body:
            if isinstance(ins, (Alloc, AllocArray)):
                node = new("allocation", ins.type, m, ins.type)
                local[ins.dst] = node
                if ins.type not in self.instantiated:
                    self.instantiated.add(ins.type)
                    self.provenance.setdefault(ins.type, f"allocated in {m}")
                self.add_types(node, (ins.type,))
            elif isinstance(ins, (InvokeStatic, InvokeVirtual, InvokeSpecial)):
                self._build_invoke(m, ins, local, flows)
            elif isinstance(ins, (LoadField, LoadStatic)):
                node = new("field-load", self.model.field(ins.field).type, m, str(ins.field))
                local[ins.dst] = node
                self.add_edge(self._field_node(ins.field), node)
                if ins.field not in self.read_fields:
                    self.read_fields.add(ins.field)
                    self.scanner.on_field_read(ins.field)
            elif isinstance(ins, (StoreField, StoreStatic)):
                node = new("field-store", self.model.field(ins.field).type, m, str(ins.field))
                self.written_fields.add(ins.field)
                self.add_edge(local[ins.src], node)
                self.add_edge(node, self._field_node(ins.field))
            elif isinstance(ins, Const):
                obj = self.model.heap[ins.obj]
                node = new("constant", obj.type, m, ins.obj)
                local[ins.dst] = node
                self.scanner.scan_root(ins.obj)
                self.add_types(node, (obj.type,))
            elif isinstance(ins, Move):
                local[ins.dst] = local[ins.src]
            elif isinstance(ins, Return) and ins.src is not None:
                self.add_edge(local[ins.src], flows.return_node)

    def _build_invoke(self, m, ins, local, flows) -> None:
        target = ins.method
        decl = self.model.method(target)
        node = self.graph.new_node("invocation", decl.returns, m, str(target))
        receiver = local[ins.receiver] if not isinstance(ins, InvokeStatic) else None
        args = [local[a] for a in ins.args]
        kind = {InvokeStatic: "static", InvokeVirtual: "virtual", InvokeSpecial: "special"}[type(ins)]
        inv = Invocation(node, kind, target, receiver, args)
        flows.invocations.append(inv)
        if receiver is not None:
            self.graph.edges.append((receiver.id, node.id, "receiver"))
        for i, a in enumerate(args):
            self.graph.edges.append((a.id, node.id, f"arg{i}"))
        if ins.dst is not None:
            local[ins.dst] = node
        if kind == "static":
            self.link(inv, target)
            return
        (self.virtual_invoked if kind == "virtual" else self.special_invoked).add(target)
        receiver.observers.append(inv)
        for t in sorted(receiver.state):
            self.link_invocation(inv, t)

    # -- propagation ----------------------------------------------------------

    def add_edge(self, src: FlowNode, dst: FlowNode, kind: str = "use") -> None:
        if dst in src.uses:
            return
        src.uses.append(dst)
        self.graph.edges.append((src.id, dst.id, kind))
        if src.state:
            self.add_types(dst, src.state)

    def add_types(self, node: FlowNode, types) -> None:
        allowed = self._allowed(node.declared)
        fresh = [t for t in types if t in allowed and t not in node.state]
        if not fresh:
            return
        node.state.update(fresh)
        if not node.pending:
            self._worklist.append(node)
        node.pending.update(fresh)

    def propagate(self) -> None:
        """Run to fixpoint: build queued method graphs and push type deltas."""
        while self._worklist or self._to_build:
            if self._to_build:
                self._build(self._to_build.popleft())
                continue
            node = self._worklist.popleft()
            delta, node.pending = node.pending, set()
            for use in list(node.uses):
                self.add_types(use, delta)
            for inv in list(node.observers):
                for t in sorted(delta):
                    self.link_invocation(inv, t)

    def link_invocation(self, inv: Invocation, receiver_type: str) -> None:
        if receiver_type not in self._allowed(inv.target.owner):
            return
        if inv.kind == "virtual":
            callee = self.hierarchy.resolve_method(receiver_type, inv.target)
            if callee is None:
                self.diagnostics.no_target.append((receiver_type, inv.target))
                return
        else:
            callee = inv.target
        self.link(inv, callee, receiver_type)

    def link(self, inv: Invocation, callee: MethodRef, receiver_type: Optional[str] = None) -> None:
        if callee in inv.linked:
            return
        inv.linked.add(callee)
        cause = f"{inv.kind} {inv.target}" + (f" on {receiver_type}" if receiver_type else "")
        flows = self.flows(callee, cause)
        if inv.receiver is not None and flows.this is not None:
            self.add_edge(inv.receiver, flows.this)
        params = flows.formals[1:] if flows.this is not None else flows.formals
        for a, formal in zip(inv.args, params):
            self.add_edge(a, formal)
        self.add_edge(flows.return_node, inv.node)

    # -- heap -------------------------------------------------------------------

    def _on_heap_object(self, obj: HeapObject) -> None:
        if obj.type not in self.instantiated:
            self.instantiated.add(obj.type)
            self.provenance.setdefault(obj.type, f"image heap object {obj.id}")

    def _on_field_value(self, f: FieldRef, obj: HeapObject) -> None:
        self.add_types(self._field_node(f), (obj.type,))

    # -- driver -------------------------------------------------------------------

    def run(self) -> AnalysisResult:
        start = time.perf_counter()
        for root in self.model.roots:
            self.flows(root, "root")
        self.propagate()
        self.diagnostics.analysis_seconds = time.perf_counter() - start
        self.diagnostics.extracted = len(self.graph.per_method)
        return AnalysisResult(
            reachable_methods=frozenset(self.graph.per_method),
            instantiated_types=frozenset(self.instantiated),
            virtual_invoked_methods=frozenset(self.virtual_invoked),
            special_invoked_methods=frozenset(self.special_invoked),
            read_fields=frozenset(self.read_fields),
            written_fields=frozenset(self.written_fields),
            image_heap_objects=frozenset(self.scanner.image_heap),
            provenance=dict(self.provenance),
            diagnostics=self.diagnostics,
            engine="pta",
            model_fingerprint=fingerprint(self.model),
        )


def analyze_pta(
    model: ProgramModel,
    config: Optional[AnalysisConfig] = None,
    hierarchy: Optional[Hierarchy] = None,
) -> tuple[AnalysisResult, TypeFlowGraph]:
    analysis = PointsToAnalysis(model, config, hierarchy)
    result = analysis.run()
    return result, analysis.graph
