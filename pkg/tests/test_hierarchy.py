import pytest

from conftest import EMPTY_MAIN, M
from rtakit.hierarchy import AmbiguousDefault, Hierarchy, UnknownType
from rtakit.textformat import parse_model


@pytest.fixture
def h(running_example):
    return Hierarchy(running_example)


def test_subtypes(h):
    assert h.subtypes("I") == {"I", "A", "B"}
    assert h.subtypes("B") == {"B"}


def test_supertypes_reflexive_and_dual(h, running_example):
    for t in running_example.types:
        assert h.supertypes(t)[0] == t
        assert t in h.subtypes(t)
        for u in running_example.types:
            assert (u in h.supertypes(t)) == (t in h.subtypes(u))


def test_unknown_type(h):
    with pytest.raises(UnknownType):
        h.subtypes("Nope")


def test_resolve_running_example(h):
    assert h.resolve_method("A", M("I.bar()")) == M("A.bar()")
    assert h.resolve_method("B", M("I.bar()")) == M("B.bar()")
    assert h.resolve_method("Hello", M("Hello.foo(I)")) == M("Hello.foo(I)")


HIER = EMPTY_MAIN + """
class Object
  method hashCode(): int
    return

interface Shape
  method area(): int
    return
  method abstract name(): void

interface Round extends Shape
  method area(): int
    return

abstract class Base implements Shape
  method abstract name(): void
  method size(): int
    return

class Circle extends Base implements Round
  method name(): void
    return

class Square extends Base
  method area(): int
    return

class Blob extends Base
"""


@pytest.fixture
def hh():
    return Hierarchy(parse_model(HIER))


def test_implicit_root_is_supertype_of_everything(hh):
    assert hh.subtypes("Object") == set(parse_model(HIER).types)
    assert hh.supertypes("Circle")[-1] == "Object"


def test_superclass_chain_before_defaults(hh):
    assert hh.resolve_method("Square", M("Shape.area()")) == M("Square.area()")


def test_most_specific_default(hh):
    assert hh.resolve_method("Circle", M("Shape.area()")) == M("Round.area()")
    assert hh.resolve_method("Blob", M("Shape.area()")) == M("Shape.area()")


def test_abstract_only_is_no_target(hh):
    assert hh.resolve_method("Blob", M("Shape.name()")) is None
    assert hh.resolve_method("Circle", M("Base.name()")) == M("Circle.name()")


def test_inherited_from_root(hh):
    assert hh.resolve_method("Circle", M("Object.hashCode()")) == M("Object.hashCode()")


def test_resolution_independent_of_declaration_order():
    blocks = HIER.split("\n\n")
    reordered = "\n\n".join([blocks[0]] + list(reversed(blocks[1:])))
    a, b = Hierarchy(parse_model(HIER)), Hierarchy(parse_model(reordered))
    for t in ("Circle", "Square", "Blob"):
        for m in ("Shape.area()", "Shape.name()", "Object.hashCode()"):
            assert a.resolve_method(t, M(m)) == b.resolve_method(t, M(m))


def test_ambiguous_default():
    text = (
        EMPTY_MAIN
        + "interface J\n  method m(): void\n    return\n"
        + "interface K\n  method m(): void\n    return\n"
        + "class C implements J, K\n"
    )
    h = Hierarchy(parse_model(text, check=False))
    with pytest.raises(AmbiguousDefault):
        h.resolve_method("C", M("J.m()"))
