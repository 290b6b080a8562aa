import pytest

from conftest import EMPTY_MAIN, F, M, load, methods
from rtakit.engine import AnalysisConfig, RTAEngine, analyze
from rtakit.model import ModelError
from rtakit.summary import MethodSummary, extract_summary
from rtakit.textformat import parse_model

RTA_METHODS = methods("Hello.main()", "Hello.log()", "Hello.foo(I)", "A.bar()", "B.bar()")


def test_running_example(running_example):
    r = analyze(running_example)
    assert r.reachable_methods == RTA_METHODS
    assert r.instantiated_types == {"Hello", "A", "B"}
    assert r.virtual_invoked_methods == methods("Hello.foo(I)", "I.bar()")


def test_empty_main(empty_main):
    r = analyze(empty_main)
    assert r.reachable_methods == methods("Main.main()")
    assert r.instantiated_types == frozenset()


def test_reuse_accounting(running_example):
    r = analyze(running_example)
    assert r.diagnostics.reused + r.diagnostics.extracted == len(r.reachable_methods)


def test_virtual_invoked_is_not_invoked(running_example):
    r = analyze(running_example)
    assert M("I.bar()") in r.virtual_invoked_methods
    assert M("I.bar()") not in r.reachable_methods


def engine(model, **kw):
    e = RTAEngine(model, AnalysisConfig(**kw))
    return e


def drain(e):
    e.pool.run()
    return e.result()


def test_apply_main_summary(running_example):
    e = engine(running_example)
    e.apply_summary(extract_summary(running_example.method(M("Hello.main()"))))
    # nothing has run yet: only direct effects of the summary
    assert e.state.instantiated() == {"Hello", "A"}
    assert e.state.invoked() == methods("Hello.log()", "Hello.foo(I)")
    assert e.state.methods[M("Hello.foo(I)")].is_virtual_invoked


def test_apply_empty_summary(running_example):
    e = engine(running_example)
    e.apply_summary(MethodSummary())
    assert e.state.invoked() == frozenset() and e.state.instantiated() == frozenset()


def test_register_as_invoked_once(running_example):
    e = engine(running_example)
    e.register_as_invoked(M("Hello.log()"))
    e.register_as_invoked(M("Hello.log()"))
    assert e.pool.in_flight == 1
    r = drain(e)
    assert r.reachable_methods == methods("Hello.log()")
    assert r.instantiated_types == {"B"}


def test_register_abstract_is_error(running_example):
    e = engine(running_example)
    with pytest.raises(ModelError):
        e.register_as_invoked(M("I.bar()"))


@pytest.mark.parametrize(
    "instantiate, expected",
    [((), ()), (("A",), ("A.bar()",)), (("A", "B"), ("A.bar()", "B.bar()"))],
)
@pytest.mark.parametrize("virtual_first", [True, False])
def test_virtual_and_instantiation_commute(running_example, instantiate, expected, virtual_first):
    e = engine(running_example)
    if virtual_first:
        e.register_as_virtual_invoked(M("I.bar()"))
    for t in instantiate:
        e.register_as_instantiated(t)
    if not virtual_first:
        e.register_as_virtual_invoked(M("I.bar()"))
    assert drain(e).reachable_methods == methods(*expected)


def test_instantiate_without_virtual_invokes(running_example):
    e = engine(running_example)
    e.register_as_instantiated("Hello")
    e.register_as_instantiated("Hello")
    assert drain(e).reachable_methods == frozenset()


def test_instantiate_interface_is_error(running_example):
    with pytest.raises(ModelError):
        engine(running_example).register_as_instantiated("I")


def test_special_invoke_guard():
    model = load("thread_sleep")
    target = M("VirtualThread.sleep(long)")
    e = engine(model)
    e.register_as_special_invoked(target)
    assert target not in drain(e).reachable_methods
    e.register_as_instantiated("VirtualThread")
    assert target in drain(e).reachable_methods


def test_special_invoke_after_instantiation():
    e = engine(load("thread_sleep"))
    e.register_as_instantiated("VirtualThread")
    e.register_as_special_invoked(M("VirtualThread.sleep(long)"))
    assert M("VirtualThread.sleep(long)") in drain(e).reachable_methods


def test_special_invoke_flag_off():
    e = engine(load("thread_sleep"), distinguish_special_invokes=False)
    e.register_as_special_invoked(M("VirtualThread.sleep(long)"))
    assert M("VirtualThread.sleep(long)") in drain(e).reachable_methods


@pytest.mark.parametrize(
    "name, flag, reachable",
    [
        ("thread_sleep", True, False),
        ("thread_sleep_virtual", True, True),
        ("thread_sleep", False, True),
        ("thread_sleep_virtual", False, True),
    ],
)
def test_thread_sleep_models(name, flag, reachable):
    r = analyze(load(name), AnalysisConfig(distinguish_special_invokes=flag))
    assert (M("VirtualThread.sleep(long)") in r.reachable_methods) == reachable
    assert M("VirtualThread.sleep(long)") in r.special_invoked_methods


def test_embedded_constant():
    r = analyze(load("embedded_constant"))
    assert {"Component", "Helper"} <= r.instantiated_types
    assert methods("Component.execute()", "Helper.help()") <= r.reachable_methods
    assert r.image_heap_objects == {"c1", "h1"}
    # selectComponent is only reachable from the initializer, which is not analyzed
    assert M("EmbeddedConstantsExample.selectComponent()") not in r.reachable_methods


def test_unread_field_is_not_followed():
    r = analyze(load("embedded_constant_noread"))
    assert r.instantiated_types == {"Component"}
    assert M("Helper.help()") not in r.reachable_methods
    assert r.image_heap_objects == {"c1"}


def test_static_field_read_pulls_in_value():
    r = analyze(load("static_field_read"))
    assert r.read_fields == {F("EmbeddedConstantsExample.c"), F("Component.delegate")}
    assert r.image_heap_objects == {"c1", "h1"}
    r = analyze(load("static_field_unread"))
    assert r.image_heap_objects == frozenset() and r.instantiated_types == frozenset()


def test_write_only_field_is_not_scanned():
    model = load("static_field_unread")
    e = engine(model)
    e.register_field_written(F("EmbeddedConstantsExample.c"))
    r = drain(e)
    assert r.written_fields == {F("EmbeddedConstantsExample.c")}
    assert r.image_heap_objects == frozenset()


def test_repeated_reads_scan_once():
    seen = []
    e = engine(load("static_field_unread"))
    original = e.scanner.on_field_read
    e.scanner.on_field_read = lambda f: (seen.append(f), original(f))
    for _ in range(3):
        e.register_field_read(F("EmbeddedConstantsExample.c"))
    assert seen == [F("EmbeddedConstantsExample.c")]
    assert drain(e).image_heap_objects == {"c1"}


def test_no_target_is_recorded():
    model = parse_model(
        EMPTY_MAIN
        + "interface Shape\n  method abstract name(): void\n"
        + "abstract class Base implements Shape\n"
        + "class Blob extends Base\n"
    )
    e = engine(model)
    e.register_as_virtual_invoked(M("Shape.name()"))
    e.register_as_instantiated("Blob")
    assert drain(e).reachable_methods == frozenset()
    assert e.diagnostics.no_target == [("Blob", M("Shape.name()"))]


def test_provenance_names_causes(running_example):
    r = analyze(running_example)
    assert r.provenance[M("Hello.main()")] == "root"
    assert "Hello.log()" in r.provenance["B"]
