"""Line-oriented model file format.

A model file is a sequence of top-level declarations; members of a type are
indented under the type header and instructions are indented under their
method header::

    root Hello.main()

    class Hello
      method static main(): void
        h = new Hello
        a = new A
        invokevirtual Hello.foo(I) h a
        invokestatic Hello.log()
        return

See docs/model-format.md for the complete grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

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
    ModelError,
    Move,
    Param,
    ProgramModel,
    Return,
    StoreField,
    StoreStatic,
    TypeDecl,
)

TYPE_NAME = r"[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*(?:\[\])*"
IDENT = r"[A-Za-z_$][\w$]*"
OBJ_ID = r"[\w$][\w$.\-]*"

_TYPE_RE = re.compile(TYPE_NAME + r"\Z")
_IDENT_RE = re.compile(IDENT + r"\Z")
_OBJ_RE = re.compile(OBJ_ID + r"\Z")
_TOKEN_RE = re.compile(r"[^\s(]+\([^)]*\)|\S+")

_CLASS_RE = re.compile(
    rf"(?P<abstract>abstract\s+)?class\s+(?P<name>{TYPE_NAME})"
    rf"(?:\s+extends\s+(?P<super>{TYPE_NAME}))?"
    r"(?:\s+implements\s+(?P<ifaces>[^#]+?))?\s*\Z"
)
_INTERFACE_RE = re.compile(
    rf"interface\s+(?P<name>{TYPE_NAME})(?:\s+extends\s+(?P<ifaces>[^#]+?))?\s*\Z"
)
_ARRAY_RE = re.compile(rf"array\s+(?P<name>{TYPE_NAME})\s+of\s+(?P<elem>{TYPE_NAME})\s*\Z")
_FIELD_RE = re.compile(rf"field\s+(?P<static>static\s+)?(?P<name>{IDENT})\s*:\s*(?P<type>{TYPE_NAME})\s*\Z")
_METHOD_RE = re.compile(
    rf"method\s+(?P<mods>(?:(?:static|abstract)\s+)*)(?P<name>{IDENT})\s*"
    rf"\((?P<params>[^)]*)\)\s*:\s*(?P<ret>{TYPE_NAME})\s*\Z"
)
_OBJECT_RE = re.compile(
    rf"object\s+(?P<id>{OBJ_ID})\s*:\s*(?P<type>{TYPE_NAME})"
    r"(?:\s*\{(?P<fields>[^}]*)\})?(?:\s*\[(?P<elems>[^\]]*)\])?"
    r"(?P<trivial>\s+trivial)?\s*\Z"
)
_INIT_RE = re.compile(rf"init\s+(?P<type>{TYPE_NAME})(?:\s*\{{(?P<fields>[^}}]*)\}})?\s*\Z")
_ROOT_RE = re.compile(r"root\s+(?P<ref>\S.*?)\s*\Z")


@dataclass
class _Source:
    """Line numbers of parsed elements, used to locate semantic errors."""

    lines: dict[str, int] = field(default_factory=dict)


def _strip_comment(line: str) -> str:
    idx = line.find("#")
    return line if idx < 0 else line[:idx]


def _split_list(text: Optional[str]) -> list[str]:
    if not text:
        return []
    return [p.strip() for p in text.split(",") if p.strip()]


class _Parser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.types: dict[str, TypeDecl] = {}
        self.roots: list[MethodRef] = []
        self.objects: dict[str, HeapObject] = {}
        self.inits: dict[str, dict[str, str]] = {}
        self.source = _Source()
        # raw heap field keys, resolved once every type is known
        self._pending_objects: list[tuple[int, int, str, str, list[tuple[str, str]], list[str], bool]] = []

    def error(self, lineno: int, col: int, msg: str) -> ModelError:
        return ModelError(msg, lineno, col)

    def parse(self) -> ProgramModel:
        i = 0
        n = len(self.lines)
        while i < n:
            raw = _strip_comment(self.lines[i]).rstrip()
            lineno = i + 1
            if not raw.strip():
                i += 1
                continue
            indent = len(raw) - len(raw.lstrip())
            if indent:
                raise self.error(lineno, 1, "unexpected indentation at top level")
            head = raw.split(None, 1)[0]
            if head in ("class", "abstract", "interface", "array"):
                i = self._parse_type(i)
                continue
            if head == "root":
                m = _ROOT_RE.match(raw)
                try:
                    self.roots.append(MethodRef.parse(m.group("ref")))
                except (ValueError, AttributeError):
                    raise self.error(lineno, 6, f"malformed root reference: {raw[5:].strip()!r}")
                self.source.lines.setdefault(f"root {self.roots[-1]}", lineno)
            elif head == "init":
                self._parse_init(raw, lineno)
            elif head == "object":
                self._parse_object(raw, lineno)
            else:
                raise self.error(lineno, 1, f"unknown declaration {head!r}")
            i += 1
        for entry in self._pending_objects:
            self._finish_object(*entry)
        types = {}
        for name, decl in self.types.items():
            values = self.inits.get(name)
            if values:
                decl = TypeDecl(
                    name=decl.name,
                    kind=decl.kind,
                    superclass=decl.superclass,
                    interfaces=decl.interfaces,
                    element_type=decl.element_type,
                    is_abstract=decl.is_abstract,
                    methods=decl.methods,
                    fields=decl.fields,
                    static_values=values,
                )
            types[name] = decl
        return ProgramModel(
            types=types,
            roots=tuple(self.roots),
            heap=self.objects,
            initialized=frozenset(self.inits),
        )

    # -- types ----------------------------------------------------------------

    def _parse_type(self, i: int) -> int:
        raw = _strip_comment(self.lines[i]).rstrip()
        lineno = i + 1
        superclass = None
        element = None
        abstract = False
        if m := _CLASS_RE.match(raw):
            kind, name = CLASS, m.group("name")
            superclass = m.group("super")
            interfaces = _split_list(m.group("ifaces"))
            abstract = bool(m.group("abstract"))
        elif m := _INTERFACE_RE.match(raw):
            kind, name = INTERFACE, m.group("name")
            interfaces = _split_list(m.group("ifaces"))
        elif m := _ARRAY_RE.match(raw):
            kind, name, element = ARRAY, m.group("name"), m.group("elem")
            interfaces = []
        else:
            raise self.error(lineno, 1, f"malformed type header: {raw.strip()!r}")
        for iface in interfaces:
            if not _TYPE_RE.match(iface):
                raise self.error(lineno, raw.find(iface) + 1, f"bad type name {iface!r}")
        if name in self.types:
            raise self.error(lineno, raw.find(name) + 1, f"duplicate type {name}")
        self.source.lines[name] = lineno

        methods: list[MethodDecl] = []
        fields: list[FieldDecl] = []
        i += 1
        member_indent = None
        while i < len(self.lines):
            line = _strip_comment(self.lines[i]).rstrip()
            if not line.strip():
                i += 1
                continue
            indent = len(line) - len(line.lstrip())
            if indent == 0:
                break
            if member_indent is None:
                member_indent = indent
            if indent != member_indent:
                raise self.error(i + 1, indent + 1, "inconsistent member indentation")
            body = line.strip()
            if body.startswith("field"):
                fm = _FIELD_RE.match(body)
                if not fm:
                    raise self.error(i + 1, indent + 1, f"malformed field: {body!r}")
                if any(f.name == fm.group("name") for f in fields):
                    raise self.error(i + 1, indent + 1, f"duplicate field {name}.{fm.group('name')}")
                fields.append(FieldDecl(fm.group("name"), fm.group("type"), bool(fm.group("static"))))
                self.source.lines[f"{name}.{fm.group('name')}"] = i + 1
                i += 1
            elif body.startswith("method"):
                decl, i = self._parse_method(i, indent, name)
                if any(m.name == decl.name and m.param_types == decl.param_types for m in methods):
                    raise self.error(i, indent + 1, f"duplicate method {decl.ref(name)}")
                methods.append(decl)
            else:
                raise self.error(i + 1, indent + 1, f"expected 'field' or 'method', got {body!r}")
        self.types[name] = TypeDecl(
            name=name,
            kind=kind,
            superclass=superclass,
            interfaces=tuple(interfaces),
            element_type=element,
            is_abstract=abstract,
            methods=tuple(methods),
            fields=tuple(fields),
        )
        return i

    def _parse_method(self, i: int, member_indent: int, owner: str) -> tuple[MethodDecl, int]:
        line = _strip_comment(self.lines[i]).strip()
        lineno = i + 1
        m = _METHOD_RE.match(line)
        if not m:
            raise self.error(lineno, member_indent + 1, f"malformed method header: {line!r}")
        mods = m.group("mods").split()
        params = []
        for p in _split_list(m.group("params")):
            pname, colon, ptype = p.partition(":")
            pname, ptype = pname.strip(), ptype.strip()
            if not colon or not _IDENT_RE.match(pname) or not _TYPE_RE.match(ptype):
                raise self.error(lineno, member_indent + 1, f"malformed parameter {p!r}")
            params.append(Param(pname, ptype))
        is_abstract = "abstract" in mods
        body: list[Instruction] = []
        i += 1
        while i < len(self.lines):
            raw = _strip_comment(self.lines[i]).rstrip()
            if not raw.strip():
                i += 1
                continue
            indent = len(raw) - len(raw.lstrip())
            if indent <= member_indent:
                break
            body.append(parse_instruction(raw.strip(), i + 1, indent + 1))
            i += 1
        if is_abstract and body:
            raise self.error(lineno, member_indent + 1, "abstract method has a body")
        decl = MethodDecl(
            name=m.group("name"),
            params=tuple(params),
            returns=m.group("ret"),
            is_static="static" in mods,
            is_abstract=is_abstract,
            body=None if is_abstract else tuple(body),
        )
        self.source.lines[str(decl.ref(owner))] = lineno
        return decl, i

    # -- heap -----------------------------------------------------------------

    def _parse_pairs(self, text: Optional[str], lineno: int) -> list[tuple[str, str]]:
        pairs = []
        for item in _split_list(text):
            key, arrow, value = item.partition("->")
            key, value = key.strip(), value.strip()
            if not arrow or not key or not _OBJ_RE.match(value):
                raise self.error(lineno, 1, f"malformed field value {item!r}")
            pairs.append((key, value))
        return pairs

    def _parse_init(self, raw: str, lineno: int) -> None:
        m = _INIT_RE.match(raw)
        if not m:
            raise self.error(lineno, 1, f"malformed init declaration: {raw!r}")
        values = self.inits.setdefault(m.group("type"), {})
        for key, value in self._parse_pairs(m.group("fields"), lineno):
            values[key] = value
        self.source.lines.setdefault(f"init {m.group('type')}", lineno)

    def _parse_object(self, raw: str, lineno: int) -> None:
        m = _OBJECT_RE.match(raw)
        if not m:
            raise self.error(lineno, 1, f"malformed object declaration: {raw!r}")
        oid = m.group("id")
        if oid in self.objects or any(p[2] == oid for p in self._pending_objects):
            raise self.error(lineno, raw.find(oid) + 1, f"duplicate object {oid}")
        elems = _split_list(m.group("elems"))
        for e in elems:
            if not _OBJ_RE.match(e):
                raise self.error(lineno, 1, f"bad element id {e!r}")
        pairs = self._parse_pairs(m.group("fields"), lineno)
        self._pending_objects.append(
            (lineno, 1, oid, m.group("type"), pairs, elems, bool(m.group("trivial")))
        )
        self.source.lines[f"object {oid}"] = lineno

    def _finish_object(self, lineno, col, oid, tname, pairs, elems, trivial) -> None:
        values: dict[FieldRef, str] = {}
        for key, value in pairs:
            ref = FieldRef.parse(key) if "." in key else self._lookup_field(tname, key)
            values[ref] = value
        self.objects[oid] = HeapObject(oid, tname, values, tuple(elems), trivial)

    def _lookup_field(self, tname: str, fname: str) -> FieldRef:
        # nearest declaring type along the superclass chain; undeclared falls through to validate
        seen = set()
        cur: Optional[str] = tname
        while cur is not None and cur in self.types and cur not in seen:
            seen.add(cur)
            if self.types[cur].field(fname) is not None:
                return FieldRef(cur, fname)
            cur = self.types[cur].superclass
        return FieldRef(tname, fname)


def _local(tok: str, lineno: int, col: int) -> str:
    if not _IDENT_RE.match(tok):
        raise ModelError(f"bad local name {tok!r}", lineno, col)
    return tok


def parse_instruction(text: str, lineno: int = 0, col: int = 1) -> Instruction:
    """Parse one instruction line (already stripped of indentation)."""
    dst = None
    m = re.match(rf"({IDENT})\s*=\s*(.*)\Z", text)
    if m and m.group(2):
        dst, text = m.group(1), m.group(2)
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        raise ModelError("empty instruction", lineno, col)
    op, args = tokens[0], tokens[1:]

    def need(count: int, exact: bool = True) -> None:
        if (exact and len(args) != count) or len(args) < count:
            raise ModelError(f"{op}: wrong operand count", lineno, col)

    def need_dst() -> str:
        if dst is None:
            raise ModelError(f"{op} requires a destination", lineno, col)
        return dst

    def no_dst() -> None:
        if dst is not None:
            raise ModelError(f"{op} has no result", lineno, col)

    try:
        if op == "new":
            need(1)
            return Alloc(need_dst(), _checked_type(args[0], lineno, col))
        if op == "newarray":
            need(1)
            return AllocArray(need_dst(), _checked_type(args[0], lineno, col))
        if op == "invokestatic":
            need(1, exact=False)
            return InvokeStatic(dst, MethodRef.parse(args[0]), tuple(_local(a, lineno, col) for a in args[1:]))
        if op in ("invokevirtual", "invokespecial"):
            need(2, exact=False)
            cls = InvokeVirtual if op == "invokevirtual" else InvokeSpecial
            return cls(
                dst,
                MethodRef.parse(args[0]),
                _local(args[1], lineno, col),
                tuple(_local(a, lineno, col) for a in args[2:]),
            )
        if op == "getfield":
            need(2)
            return LoadField(need_dst(), _local(args[0], lineno, col), FieldRef.parse(args[1]))
        if op == "putfield":
            need(3)
            no_dst()
            return StoreField(_local(args[0], lineno, col), FieldRef.parse(args[1]), _local(args[2], lineno, col))
        if op == "getstatic":
            need(1)
            return LoadStatic(need_dst(), FieldRef.parse(args[0]))
        if op == "putstatic":
            need(2)
            no_dst()
            return StoreStatic(FieldRef.parse(args[0]), _local(args[1], lineno, col))
        if op == "const":
            need(1)
            if not _OBJ_RE.match(args[0]):
                raise ModelError(f"bad object id {args[0]!r}", lineno, col)
            return Const(need_dst(), args[0])
        if op == "move":
            need(1)
            return Move(need_dst(), _local(args[0], lineno, col))
        if op == "return":
            no_dst()
            if len(args) > 1:
                raise ModelError("return takes at most one operand", lineno, col)
            return Return(_local(args[0], lineno, col) if args else None)
    except ValueError as exc:
        raise ModelError(str(exc), lineno, col) from None
    raise ModelError(f"unknown instruction {op!r}", lineno, col)


def _checked_type(tok: str, lineno: int, col: int) -> str:
    if not _TYPE_RE.match(tok):
        raise ModelError(f"bad type name {tok!r}", lineno, col)
    return tok


def format_instruction(ins: Instruction) -> str:
    """Canonical single-line form; also the input to body hashing."""
    prefix = f"{ins.dst} = " if getattr(ins, "dst", None) is not None else ""
    if isinstance(ins, Alloc):
        return f"{prefix}new {ins.type}"
    if isinstance(ins, AllocArray):
        return f"{prefix}newarray {ins.type}"
    if isinstance(ins, InvokeStatic):
        return " ".join([f"{prefix}invokestatic {ins.method}", *ins.args])
    if isinstance(ins, InvokeVirtual):
        return " ".join([f"{prefix}invokevirtual {ins.method}", ins.receiver, *ins.args])
    if isinstance(ins, InvokeSpecial):
        return " ".join([f"{prefix}invokespecial {ins.method}", ins.receiver, *ins.args])
    if isinstance(ins, LoadField):
        return f"{prefix}getfield {ins.obj} {ins.field}"
    if isinstance(ins, StoreField):
        return f"putfield {ins.obj} {ins.field} {ins.src}"
    if isinstance(ins, LoadStatic):
        return f"{prefix}getstatic {ins.field}"
    if isinstance(ins, StoreStatic):
        return f"putstatic {ins.field} {ins.src}"
    if isinstance(ins, Const):
        return f"{prefix}const {ins.obj}"
    if isinstance(ins, Move):
        return f"{prefix}move {ins.src}"
    if isinstance(ins, Return):
        return "return" if ins.src is None else f"return {ins.src}"
    raise TypeError(f"not an instruction: {ins!r}")


def _format_method(m: MethodDecl) -> list[str]:
    mods = "".join(f"{mod} " for mod, on in (("static", m.is_static), ("abstract", m.is_abstract)) if on)
    params = ", ".join(f"{p.name}: {p.type}" for p in m.params)
    lines = [f"  method {mods}{m.name}({params}): {m.returns}"]
    for ins in m.body or ():
        lines.append("    " + format_instruction(ins))
    return lines


def _format_type(t: TypeDecl) -> list[str]:
    if t.kind == ARRAY:
        head = f"array {t.name} of {t.element_type}"
    elif t.kind == INTERFACE:
        head = f"interface {t.name}"
        if t.interfaces:
            head += " extends " + ", ".join(t.interfaces)
    else:
        head = ("abstract " if t.is_abstract else "") + f"class {t.name}"
        if t.superclass:
            head += f" extends {t.superclass}"
        if t.interfaces:
            head += " implements " + ", ".join(t.interfaces)
    lines = [head]
    for f in t.fields:
        lines.append(f"  field {'static ' if f.is_static else ''}{f.name}: {f.type}")
    for m in t.methods:
        lines.extend(_format_method(m))
    return lines


def _format_pairs(pairs: list[str]) -> str:
    return " { " + ", ".join(pairs) + " }" if pairs else ""


def serialize_model(model: ProgramModel) -> str:
    out: list[str] = [f"root {r}" for r in model.roots]
    for t in model.types.values():
        if out:
            out.append("")
        out.extend(_format_type(t))
    inits = sorted(model.initialized)
    if inits:
        out.append("")
    for name in inits:
        decl = model.types.get(name)
        values = sorted(decl.static_values.items()) if decl is not None else []
        out.append(f"init {name}" + _format_pairs([f"{k} -> {v}" for k, v in values]))
    if model.heap:
        out.append("")
    for obj in model.heap.values():
        pairs = [f"{ref} -> {value}" for ref, value in obj.field_values.items()]
        line = f"object {obj.id}: {obj.type}" + _format_pairs(pairs)
        if obj.elements:
            line += " [" + ", ".join(obj.elements) + "]"
        if obj.trivial:
            line += " trivial"
        out.append(line)
    return "\n".join(out) + "\n"


def parse_model(text: str, check: bool = True) -> ProgramModel:
    """Parse model-file text.

    With ``check`` (the default) the result is validated and a
    :class:`ModelViolations` error is raised for any broken invariant.
    """
    parser = _Parser(text)
    model = parser.parse()
    if check:
        from .validate import ModelViolations, validate

        violations = validate(model)
        if violations:
            first = violations[0]
            line = _locate(parser.source, first.element)
            raise ModelViolations(violations, line)
    return model


def _locate(source: _Source, element: str) -> Optional[int]:
    key = element.split("#", 1)[0]
    for candidate in (key, f"object {key}", f"init {key}", f"root {key}"):
        if candidate in source.lines:
            return source.lines[candidate]
    return None


def load_model(path, check: bool = True) -> ProgramModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), check=check)
