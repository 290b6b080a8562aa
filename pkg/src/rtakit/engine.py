"""Rapid type analysis over method summaries.

Every method that becomes invoked is processed as one task: its summary is
obtained (reused from a store or extracted from the body) and applied, which
registers the invoked methods, instantiated types and accessed fields it
mentions. Virtual calls are resolved against every instantiated subtype of
the declaring type, from both directions: when the call is first seen and
when a new subtype is instantiated.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from .heap import HeapScanner
from .hierarchy import Hierarchy
from .model import FieldRef, HeapObject, MethodDecl, MethodRef, ModelError, ProgramModel, fingerprint
from .scheduler import AppendSet, Flag, TaskPool, mark
from .store import DEFAULT_UNSTABLE_PATTERNS, SummaryStore, get_summary, is_reusable, serialize_summary
from .summary import MethodSummary

log = logging.getLogger(__name__)

RESULT_SETS = (
    "reachable_methods",
    "instantiated_types",
    "virtual_invoked_methods",
    "special_invoked_methods",
    "read_fields",
    "written_fields",
    "image_heap_objects",
)


@dataclass
class AnalysisConfig:
    threads: int = 1
    distinguish_special_invokes: bool = True
    summary_store_path: Optional[str] = None
    emit_summaries_path: Optional[str] = None
    unstable_name_patterns: tuple[str, ...] = DEFAULT_UNSTABLE_PATTERNS


@dataclass
class Diagnostics:
    no_target: list[tuple[str, MethodRef]] = field(default_factory=list)
    reused: int = 0
    extracted: int = 0
    extracted_methods: list[MethodRef] = field(default_factory=list)
    tasks: int = 0
    analysis_seconds: float = 0.0
    emitted: int = 0


@dataclass(frozen=True)
class AnalysisResult:
    reachable_methods: frozenset[MethodRef]
    instantiated_types: frozenset[str]
    virtual_invoked_methods: frozenset[MethodRef] = frozenset()
    special_invoked_methods: frozenset[MethodRef] = frozenset()
    read_fields: frozenset[FieldRef] = frozenset()
    written_fields: frozenset[FieldRef] = frozenset()
    image_heap_objects: frozenset[str] = frozenset()
    provenance: dict = field(default_factory=dict, compare=False, repr=False)
    diagnostics: Diagnostics = field(default_factory=Diagnostics, compare=False, repr=False)
    engine: str = field(default="rta", compare=False)
    model_fingerprint: str = field(default="", compare=False)

    def sets(self) -> dict[str, frozenset]:
        return {name: getattr(self, name) for name in RESULT_SETS}

    def same_sets(self, other: AnalysisResult) -> bool:
        return self.sets() == other.sets()

    def mismatches(self, other: AnalysisResult) -> list[str]:
        return [name for name in RESULT_SETS if getattr(self, name) != getattr(other, name)]


class TypeState:
    __slots__ = ("is_instantiated", "virtual_invoked", "special_invoked", "instantiated_subtypes")

    def __init__(self) -> None:
        self.is_instantiated = Flag()
        self.virtual_invoked: AppendSet[MethodRef] = AppendSet()
        self.special_invoked: AppendSet[MethodRef] = AppendSet()
        self.instantiated_subtypes: AppendSet[str] = AppendSet()


class MethodState:
    __slots__ = ("is_invoked", "is_special_invoked", "is_virtual_invoked")

    def __init__(self) -> None:
        self.is_invoked = Flag()
        self.is_special_invoked = Flag()
        self.is_virtual_invoked = Flag()


class FieldState:
    __slots__ = ("is_read", "is_written")

    def __init__(self) -> None:
        self.is_read = Flag()
        self.is_written = Flag()


class _Lazy(dict):
    """Per-element state created on first touch; unknown keys are rejected."""

    def __init__(self, factory, exists):
        super().__init__()
        self._factory = factory
        self._exists = exists

    def __missing__(self, key):
        if not self._exists(key):
            raise KeyError(key)
        # setdefault keeps the first state if two threads race here
        return self.setdefault(key, self._factory())


class AnalysisState:
    """Monotone marks for the types, methods and fields the analysis has touched."""

    def __init__(self, model: ProgramModel):
        self.types: dict[str, TypeState] = _Lazy(TypeState, model.types.__contains__)
        self.methods: dict[MethodRef, MethodState] = _Lazy(MethodState, lambda m: model.method(m) is not None)
        self.fields: dict[FieldRef, FieldState] = _Lazy(FieldState, lambda f: model.field(f) is not None)
        self._model = model

    def decl(self, m: MethodRef) -> MethodDecl:
        return self._model.method(m)

    def invoked(self) -> frozenset[MethodRef]:
        return frozenset(m for m, s in list(self.methods.items()) if s.is_invoked)

    def instantiated(self) -> frozenset[str]:
        return frozenset(t for t, s in list(self.types.items()) if s.is_instantiated)


class RTAEngine:
    def __init__(
        self,
        model: ProgramModel,
        config: Optional[AnalysisConfig] = None,
        hierarchy: Optional[Hierarchy] = None,
        store: Optional[SummaryStore] = None,
    ):
        self.model = model
        self.config = config or AnalysisConfig()
        self.hierarchy = hierarchy or Hierarchy(model)
        if store is None and self.config.summary_store_path:
            store = SummaryStore.load(self.config.summary_store_path)
        self.store = store
        self.state = AnalysisState(model)
        self.pool = TaskPool(self.config.threads)
        self.scanner = HeapScanner(model, self._field_is_read, self._on_heap_object)
        self.summaries: dict[MethodRef, MethodSummary] = {}
        self.provenance: dict[object, str] = {}
        self.diagnostics = Diagnostics()
        self._reused: list[MethodRef] = []
        self._extracted: list[MethodRef] = []

    # -- driver ---------------------------------------------------------------

    def run(self) -> AnalysisResult:
        start = time.perf_counter()
        for root in self.model.roots:
            self.register_as_invoked(root, "root")
        self.pool.run()
        self.diagnostics.analysis_seconds = time.perf_counter() - start
        self.diagnostics.tasks = self.pool.executed
        self.diagnostics.reused = len(self._reused)
        self.diagnostics.extracted = len(self._extracted)
        self.diagnostics.extracted_methods = sorted(self._extracted)
        if self.config.emit_summaries_path:
            self.emit_summaries().save(self.config.emit_summaries_path)
        return self.result()

    def result(self) -> AnalysisResult:
        st = self.state
        return AnalysisResult(
            reachable_methods=st.invoked(),
            instantiated_types=st.instantiated(),
            virtual_invoked_methods=frozenset(m for m, s in list(st.methods.items()) if s.is_virtual_invoked),
            special_invoked_methods=frozenset(m for m, s in list(st.methods.items()) if s.is_special_invoked),
            read_fields=frozenset(f for f, s in list(st.fields.items()) if s.is_read),
            written_fields=frozenset(f for f, s in list(st.fields.items()) if s.is_written),
            image_heap_objects=frozenset(self.scanner.image_heap),
            provenance=dict(self.provenance),
            diagnostics=self.diagnostics,
            engine="rta",
            model_fingerprint=fingerprint(self.model),
        )

    def emit_summaries(self) -> SummaryStore:
        out = SummaryStore(source_path=self.config.emit_summaries_path)
        patterns = self.config.unstable_name_patterns
        for ref in sorted(self.summaries):
            summary = self.summaries[ref]
            if is_reusable(summary, ref, self.model, patterns):
                out.add(serialize_summary(summary, ref, self.model, patterns))
        self.diagnostics.emitted = len(out)
        return out

    def on_invoked(self, m: MethodRef) -> None:
        decl = self.state.decl(m)
        summary, reused = get_summary(m, decl, self.model, self.store)
        (self._reused if reused else self._extracted).append(m)
        self.summaries[m] = summary
        self.apply_summary(summary, m)

    def apply_summary(self, summary: MethodSummary, origin: Optional[MethodRef] = None) -> None:
        where = f" in {origin}" if origin is not None else ""
        for m in summary.static_invokes:
            self.register_as_invoked(m, "static call" + where)
        for m in summary.virtual_invokes:
            self.register_as_virtual_invoked(m)
        for m in summary.special_invokes:
            self.register_as_special_invoked(m)
        for t in summary.instantiated_types:
            self.register_as_instantiated(t, "allocated" + where)
        for f in summary.read_fields:
            self.register_field_read(f)
        for f in summary.written_fields:
            self.register_field_written(f)
        for oid in summary.embedded_constants:
            self.scanner.scan_root(oid)

    # -- registration -----------------------------------------------------------

    def register_as_invoked(self, m: MethodRef, cause: str = "") -> None:
        state = self.state.methods[m]
        if mark(state.is_invoked):
            if self.state.decl(m).is_abstract:
                raise ModelError(f"abstract method {m} registered as invoked")
            self.provenance[m] = cause
            self.pool.schedule(self.on_invoked, m)

    def _invoke_resolved(self, receiver: str, m: MethodRef) -> None:
        target = self.hierarchy.resolve_method(receiver, m)
        if target is None:
            log.debug("no concrete target for %s on %s", m, receiver)
            self.diagnostics.no_target.append((receiver, m))
            return
        self.register_as_invoked(target, f"virtual {m} on {receiver}")

    def register_as_virtual_invoked(self, m: MethodRef) -> None:
        if mark(self.state.methods[m].is_virtual_invoked):
            declaring = self.state.types[m.owner]
            # publish before iterating; register_as_instantiated does the mirror image
            declaring.virtual_invoked.add(m)
            for sub in declaring.instantiated_subtypes:
                self._invoke_resolved(sub, m)

    def register_as_special_invoked(self, m: MethodRef) -> None:
        if mark(self.state.methods[m].is_special_invoked):
            declaring = self.state.types[m.owner]
            declaring.special_invoked.add(m)
            if not self.config.distinguish_special_invokes or declaring.instantiated_subtypes:
                self.register_as_invoked(m, "special call")

    def register_as_instantiated(self, t: str, cause: str = "") -> None:
        state = self.state.types[t]
        if mark(state.is_instantiated):
            if not self.model.types[t].is_concrete:
                raise ModelError(f"abstract type {t} registered as instantiated")
            self.provenance[t] = cause
            supers = self.hierarchy.supertypes(t)
            for sup in supers:
                self.state.types[sup].instantiated_subtypes.add(t)
            for sup in supers:
                sstate = self.state.types[sup]
                for m in sstate.virtual_invoked:
                    self._invoke_resolved(t, m)
                for m in sstate.special_invoked:
                    self.register_as_invoked(m, f"special call enabled by {t}")

    def register_field_read(self, f: FieldRef) -> None:
        if mark(self.state.fields[f].is_read):
            self.scanner.on_field_read(f)

    def register_field_written(self, f: FieldRef) -> None:
        mark(self.state.fields[f].is_written)

    # -- heap scanner callbacks -------------------------------------------------

    def _field_is_read(self, f: FieldRef) -> bool:
        return bool(self.state.fields[f].is_read)

    def _on_heap_object(self, obj: HeapObject) -> None:
        self.register_as_instantiated(obj.type, f"image heap object {obj.id}")


def analyze(
    model: ProgramModel,
    config: Optional[AnalysisConfig] = None,
    hierarchy: Optional[Hierarchy] = None,
    store: Optional[SummaryStore] = None,
) -> AnalysisResult:
    """Run rapid type analysis; threads come from ``config.threads``."""
    return RTAEngine(model, config, hierarchy, store).run()
