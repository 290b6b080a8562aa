import pytest

from conftest import EMPTY_MAIN, M, load
from rtakit.engine import AnalysisConfig, analyze
from rtakit.model import MethodDecl, Return
from rtakit.store import (
    HEADER,
    NotReusable,
    SerializedSummary,
    StoreFormatError,
    SummaryStore,
    Unresolvable,
    get_summary,
    is_reusable,
    method_hash,
    resolve_summary,
    serialize_summary,
)
from rtakit.summary import MethodSummary, extract_summary
from rtakit.textformat import parse_instruction, parse_model


def body(*lines):
    return MethodDecl("m", body=tuple(parse_instruction(line) for line in lines))


def test_hash_equal_bodies():
    assert method_hash(body("x = new A", "return")) == method_hash(body("x = new A", "return"))


def test_hash_differs_by_one_instruction():
    assert method_hash(body("x = new A", "return")) != method_hash(body("x = new B", "return"))


def test_hash_is_over_sequence():
    assert method_hash(body("x = new A", "y = new B")) != method_hash(body("y = new B", "x = new A"))


def test_hash_ignores_formatting():
    a = parse_model(EMPTY_MAIN.replace("    return", "    x   =   new   Main\n    return"))
    b = parse_model(EMPTY_MAIN.replace("    return", "    x = new Main\n    return"))
    assert method_hash(a.method(M("Main.main()"))) == method_hash(b.method(M("Main.main()")))


UNSTABLE = EMPTY_MAIN + """
class Foo$$Lambda$17
  method run(): void
    return

class Component
  method execute(): void
    return

class Str

object c: Component
object s: Str trivial
"""


@pytest.fixture
def unstable():
    return parse_model(UNSTABLE)


def summary_of(model, ref):
    return extract_summary(model.method(M(ref)))


def test_log_summary_is_reusable(running_example):
    assert is_reusable(summary_of(running_example, "Hello.log()"), M("Hello.log()"), running_example)


def test_lambda_name_not_reusable(unstable):
    s = MethodSummary(instantiated_types=frozenset({"Foo$$Lambda$17"}))
    assert not is_reusable(s, M("Main.main()"), unstable)
    assert not is_reusable(MethodSummary(), M("Foo$$Lambda$17.run()"), unstable)
    assert is_reusable(s, M("Main.main()"), unstable, patterns=())
    with pytest.raises(NotReusable):
        serialize_summary(s, M("Main.main()"), unstable)


def test_non_trivial_constant_not_reusable(unstable):
    assert not is_reusable(MethodSummary(embedded_constants=frozenset({"c"})), M("Main.main()"), unstable)
    assert is_reusable(MethodSummary(embedded_constants=frozenset({"s"})), M("Main.main()"), unstable)


def test_serialize_log(running_example):
    ref = M("Hello.log()")
    entry = serialize_summary(summary_of(running_example, "Hello.log()"), ref, running_example)
    assert entry.method_id == "Hello.log()"
    assert entry.instantiated_types == ("B",)
    assert entry.body_hash == method_hash(running_example.method(ref))
    assert entry.to_text().splitlines() == [
        "method Hello.log()",
        f"hash {entry.body_hash}",
        "static-invokes",
        "virtual-invokes",
        "special-invokes",
        "instantiated-types B",
        "read-fields",
        "written-fields",
        "embedded-constants",
        "end",
    ]


def test_serialize_empty(empty_main):
    entry = serialize_summary(MethodSummary(), M("Main.main()"), empty_main)
    assert entry.to_text().count("\n") == 10


@pytest.mark.parametrize("ref", ["Hello.main()", "Hello.log()", "Hello.foo(I)", "A.bar()"])
def test_round_trip(running_example, ref):
    s = summary_of(running_example, ref)
    assert resolve_summary(serialize_summary(s, M(ref), running_example), running_example) == s


def test_trivial_constant_round_trip(unstable):
    s = MethodSummary(embedded_constants=frozenset({"s"}))
    entry = serialize_summary(s, M("Main.main()"), unstable)
    assert entry.embedded_constants == ("s:Str",)
    assert resolve_summary(entry, unstable) == s


def test_deleted_class_is_unresolvable(running_example):
    entry = serialize_summary(summary_of(running_example, "Hello.log()"), M("Hello.log()"), running_example)
    text = open_model_text().replace("class B implements I\n  method bar(): void\n    return\n", "")
    text = text.replace("    b = new B\n", "")
    smaller = parse_model(text)
    with pytest.raises(Unresolvable) as err:
        resolve_summary(entry, smaller)
    assert err.value.identifier == "B"


def open_model_text():
    from conftest import model_path

    return model_path("running_example").read_text()


def test_overload_still_resolves(running_example):
    ref = M("Hello.main()")
    entry = serialize_summary(summary_of(running_example, "Hello.main()"), ref, running_example)
    text = open_model_text().replace(
        "  method static log(): void\n",
        "  method static log(x: Hello): void\n    return\n  method static log(): void\n",
    )
    overloaded = parse_model(text)
    resolved = resolve_summary(entry, overloaded)
    assert resolved.static_invokes == {M("Hello.log()")}


def test_store_text_round_trip(running_example, tmp_path):
    store = SummaryStore()
    for ref in ("Hello.main()", "Hello.log()", "Hello.foo(I)"):
        store.add(serialize_summary(summary_of(running_example, ref), M(ref), running_example))
    path = tmp_path / "s.txt"
    store.save(path)
    text = path.read_text()
    assert text.startswith(HEADER + "\n")
    ids = [line.split(" ", 1)[1] for line in text.splitlines() if line.startswith("method ")]
    assert ids == sorted(ids)
    again = SummaryStore.load(path)
    assert again.entries == store.entries
    assert again.to_text() == text


def test_store_format_errors():
    with pytest.raises(StoreFormatError):
        SummaryStore.from_text("garbage\n")
    with pytest.raises(StoreFormatError):
        SummaryStore.from_text(HEADER + "\nmethod A.b()\nhash x\n")


def test_get_summary_paths(running_example):
    ref = M("Hello.log()")
    decl = running_example.method(ref)
    fresh, reused = get_summary(ref, decl, running_example, None)
    assert not reused and fresh == extract_summary(decl)
    store = SummaryStore()
    store.add(serialize_summary(fresh, ref, running_example))
    assert get_summary(ref, decl, running_example, store) == (fresh, True)
    edited = MethodDecl(decl.name, body=(*decl.body[:-1], parse_instruction("a = new A"), Return()))
    s, reused = get_summary(ref, edited, running_example, store)
    assert not reused and s.instantiated_types == {"A", "B"}


def test_stale_entry_falls_back(running_example):
    ref = M("Hello.log()")
    decl = running_example.method(ref)
    bogus = SerializedSummary("Hello.log()", method_hash(decl), instantiated_types=("Gone",))
    store = SummaryStore({"Hello.log()": bogus})
    assert get_summary(ref, decl, running_example, store) == (extract_summary(decl), False)


def test_warm_run(running_example, tmp_path):
    path = str(tmp_path / "s.txt")
    cold = analyze(running_example, AnalysisConfig(emit_summaries_path=path))
    assert cold.diagnostics.emitted == 5
    warm = analyze(running_example, AnalysisConfig(summary_store_path=path))
    assert warm == cold
    assert warm.diagnostics.reused == 5 and warm.diagnostics.extracted == 0


def test_store_from_other_model_is_harmless(tmp_path):
    path = str(tmp_path / "s.txt")
    analyze(load("running_example"), AnalysisConfig(emit_summaries_path=path))
    other = load("thread_sleep")
    assert analyze(other, AnalysisConfig(summary_store_path=path)) == analyze(other)
