"""Brute-force least fixpoint of the RTA rules.

Every round re-evaluates every rule over the whole current state, starting
from the roots, until a round adds nothing. There is no worklist and no
event ordering, so this serves as an independent check on the engine.
"""

from __future__ import annotations

from typing import Optional

from .engine import AnalysisResult
from .hierarchy import Hierarchy
from .model import ProgramModel, fingerprint
from .summary import extract_summary


class BudgetExceeded(RuntimeError):
    pass


def naive_least_fixpoint(
    model: ProgramModel,
    distinguish_special_invokes: bool = True,
    max_rounds: Optional[int] = 10_000,
) -> AnalysisResult:
    h = Hierarchy(model)
    summaries = {ref: extract_summary(decl) for ref, decl in model.methods() if decl.body is not None}

    reachable = set(model.roots)
    instantiated: set[str] = set()
    virtual: set = set()
    special: set = set()
    reads: set = set()
    writes: set = set()
    heap: set[str] = set()

    rounds = 0
    while True:
        rounds += 1
        if max_rounds is not None and rounds > max_rounds:
            raise BudgetExceeded(f"no fixpoint after {max_rounds} rounds")
        before = (len(reachable), len(instantiated), len(virtual), len(special), len(reads), len(writes), len(heap))

        for m in list(reachable):
            s = summaries[m]
            reachable |= s.static_invokes
            virtual |= s.virtual_invokes
            special |= s.special_invokes
            instantiated |= s.instantiated_types
            reads |= s.read_fields
            writes |= s.written_fields
            heap |= s.embedded_constants

        # a virtual call reaches the resolution of every instantiated subtype of its declaring type
        by_owner: dict[str, list] = {}
        for m in virtual:
            by_owner.setdefault(m.owner, []).append(m)
        for t in list(instantiated):
            for sup in h.supertypes(t):
                for m in by_owner.get(sup, ()):
                    target = h.resolve_method(t, m)
                    if target is not None:
                        reachable.add(target)

        # a special call needs an instantiated subtype of its declaring type
        for m in list(special):
            if not distinguish_special_invokes or not instantiated.isdisjoint(h.subtypes(m.owner)):
                reachable.add(m)

        for ref, value in model.static_values():
            if ref in reads:
                heap.add(value)
        for oid in list(heap):
            obj = model.heap[oid]
            instantiated.add(obj.type)
            heap.update(obj.elements)
            for ref, value in obj.field_values.items():
                if ref in reads:
                    heap.add(value)

        after = (len(reachable), len(instantiated), len(virtual), len(special), len(reads), len(writes), len(heap))
        if after == before:
            break

    return AnalysisResult(
        reachable_methods=frozenset(reachable),
        instantiated_types=frozenset(instantiated),
        virtual_invoked_methods=frozenset(virtual),
        special_invoked_methods=frozenset(special),
        read_fields=frozenset(reads),
        written_fields=frozenset(writes),
        image_heap_objects=frozenset(heap),
        engine="oracle",
        model_fingerprint=fingerprint(model),
    )
