import itertools

import pytest
from hypothesis import given, settings, strategies as st

from conftest import EMPTY_MAIN, F
from rtakit.heap import HeapScanner
from rtakit.textformat import parse_model

HEAP = EMPTY_MAIN + """
class Node
  field next: Node
  field data: Leaf

class Leaf

class Holder
  field static root: Node

array Node[] of Node

init Holder { root -> n1 }
object n1: Node { next -> n2, data -> l1 }
object n2: Node { next -> n1, data -> l2 }
object l1: Leaf
object l2: Leaf
object arr: Node[] [n2]
object lone: Leaf
"""


class Harness:
    def __init__(self, text=HEAP):
        self.model = parse_model(text)
        self.read = set()
        self.types = set()
        self.scanner = HeapScanner(self.model, self.read.__contains__, lambda o: self.types.add(o.type))

    def read_field(self, f):
        self.read.add(f)
        self.scanner.on_field_read(f)

    def outcome(self):
        return set(self.scanner.image_heap), self.types


def test_object_without_fields():
    h = Harness()
    h.scanner.scan_root("lone")
    assert h.outcome() == ({"lone"}, {"Leaf"})


def test_cycle_terminates():
    h = Harness()
    h.read_field(F("Node.next"))
    h.scanner.scan_root("n1")
    assert h.outcome() == ({"n1", "n2"}, {"Node"})


def test_unread_fields_are_parked():
    h = Harness()
    h.scanner.scan_root("n1")
    assert h.outcome() == ({"n1"}, {"Node"})
    h.read_field(F("Node.data"))
    assert h.outcome() == ({"n1", "l1"}, {"Node", "Leaf"})


def test_array_elements_always_followed():
    h = Harness()
    h.scanner.scan_root("arr")
    assert h.outcome() == ({"arr", "n2"}, {"Node[]", "Node"})


def test_static_field_of_initialized_class():
    h = Harness()
    h.read_field(F("Holder.root"))
    assert h.outcome() == ({"n1"}, {"Node"})


def test_dangling_root():
    from rtakit.model import ModelError

    with pytest.raises(ModelError):
        Harness().scanner.scan_root("missing")


EVENTS = [
    ("root", "arr"),
    ("root", "lone"),
    ("read", F("Node.next")),
    ("read", F("Node.data")),
    ("read", F("Holder.root")),
]


def replay(order):
    h = Harness()
    for kind, arg in order:
        if kind == "root":
            h.scanner.scan_root(arg)
        else:
            h.read_field(arg)
    return h.outcome()


def test_event_order_independence_exhaustive():
    expected = replay(EVENTS)
    assert expected == ({"arr", "lone", "n1", "n2", "l1", "l2"}, {"Node[]", "Node", "Leaf"})
    for order in itertools.permutations(EVENTS):
        assert replay(order) == expected


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(EVENTS), max_size=8))
def test_event_order_independence_prefixes(events):
    assert replay(events) == replay(sorted(events, key=str))
