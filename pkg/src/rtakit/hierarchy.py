from __future__ import annotations

from typing import Optional

from .model import INTERFACE, ROOT_TYPE, MethodRef, ProgramModel


class UnknownType(KeyError):
    pass


class UnknownMethod(KeyError):
    pass


class AmbiguousDefault(Exception):
    """Two unrelated interfaces supply competing default methods."""


class Hierarchy:
    """Subtype/supertype closures and virtual-call resolution over a closed world.

    Supertype order is: the type itself, its superclass chain, then the
    implemented interfaces breadth-first, with the root type last.
    """

    def __init__(self, model: ProgramModel):
        self.model = model
        self._has_root = ROOT_TYPE in model.types
        self._supers: dict[str, tuple[str, ...]] = {}
        subs: dict[str, set[str]] = {name: set() for name in model.types}
        for name in model.types:
            closure = self._compute_supers(name)
            self._supers[name] = closure
            for s in closure:
                subs[s].add(name)
        self._subs = {k: frozenset(v) for k, v in subs.items()}
        self._resolved: dict[tuple[str, str, tuple[str, ...]], Optional[MethodRef]] = {}
        self._declarers: Optional[dict[tuple[str, tuple[str, ...]], list[str]]] = None
        self._chain_pos: dict[str, dict[str, int]] = {}

    def _superclass(self, name: str) -> Optional[str]:
        t = self.model.types[name]
        if t.superclass is not None:
            return t.superclass
        if self._has_root and name != ROOT_TYPE:
            return ROOT_TYPE
        return None

    def _compute_supers(self, name: str) -> tuple[str, ...]:
        order: list[str] = []
        seen: set[str] = set()
        chain = []
        cur: Optional[str] = name
        while cur is not None and cur not in seen:
            seen.add(cur)
            chain.append(cur)
            cur = self._superclass(cur)
        order.extend(c for c in chain if c != ROOT_TYPE or name == ROOT_TYPE)
        queue = [i for c in chain for i in self.model.types[c].interfaces]
        while queue:
            nxt = []
            for iface in queue:
                if iface in seen:
                    continue
                seen.add(iface)
                order.append(iface)
                nxt.extend(self.model.types[iface].interfaces)
            queue = nxt
        if self._has_root and name != ROOT_TYPE:
            order.append(ROOT_TYPE)
        return tuple(order)

    def supertypes(self, t: str) -> tuple[str, ...]:
        try:
            return self._supers[t]
        except KeyError:
            raise UnknownType(t) from None

    def subtypes(self, t: str) -> frozenset[str]:
        try:
            return self._subs[t]
        except KeyError:
            raise UnknownType(t) from None

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sub in self.subtypes(sup)

    def superclass_chain(self, t: str) -> list[str]:
        chain = []
        cur: Optional[str] = t
        while cur is not None:
            chain.append(cur)
            cur = self._superclass(cur)
        return chain

    def resolve_method(self, receiver: str, declared: MethodRef) -> Optional[MethodRef]:
        """Concrete target of ``declared`` invoked on an instance of ``receiver``.

        Returns None when only abstract declarations exist (no target).
        """
        # keyed by signature: every declaration of name(params) resolves alike
        key = (receiver, declared.name, declared.params)
        try:
            return self._resolved[key]
        except KeyError:
            pass
        if receiver not in self._supers:
            raise UnknownType(receiver)
        if self.model.method(declared) is None:
            raise UnknownMethod(str(declared))
        result = self._resolve(receiver, declared.name, declared.params)
        self._resolved[key] = result
        return result

    def _declaring_types(self, name: str, params: tuple[str, ...]) -> list[str]:
        if self._declarers is None:
            index: dict[tuple[str, tuple[str, ...]], list[str]] = {}
            for t in self.model.types.values():
                for m in t.methods:
                    if not m.is_abstract and not m.is_static:
                        index.setdefault((m.name, m.param_types), []).append(t.name)
            self._declarers = index
        return self._declarers.get((name, params), [])

    def _resolve(self, receiver: str, name: str, params: tuple[str, ...]) -> Optional[MethodRef]:
        owners = self._declaring_types(name, params)
        if not owners:
            return None
        pos = self._chain_pos.get(receiver)
        if pos is None:
            pos = {c: i for i, c in enumerate(self.superclass_chain(receiver))}
            self._chain_pos[receiver] = pos
        in_chain = [o for o in owners if o in pos]
        if in_chain:
            return MethodRef(min(in_chain, key=pos.__getitem__), name, params)
        supers = self._supers[receiver]
        types = self.model.types
        candidates = [o for o in owners if types[o].kind == INTERFACE and o in supers]
        most_specific = [
            c for c in candidates if not any(d != c and c in self._supers[d] for d in candidates)
        ]
        if len(most_specific) > 1:
            raise AmbiguousDefault(
                f"{receiver}.{name}: defaults in {', '.join(sorted(most_specific))}"
            )
        if most_specific:
            return MethodRef(most_specific[0], name, params)
        return None

    def concrete_types(self) -> list[str]:
        return [name for name, t in self.model.types.items() if t.is_concrete]
