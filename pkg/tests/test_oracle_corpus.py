import pytest

from conftest import load, methods
from rtakit.corpus import MAIN, CorpusSpec, generate_model, oracle_corpus_spec
from rtakit.engine import AnalysisConfig, analyze
from rtakit.oracle import BudgetExceeded, naive_least_fixpoint
from rtakit.textformat import parse_model, serialize_model
from rtakit.validate import validate


def test_oracle_running_example(running_example):
    r = naive_least_fixpoint(running_example)
    assert r.reachable_methods == methods("Hello.main()", "Hello.log()", "Hello.foo(I)", "A.bar()", "B.bar()")
    assert r == analyze(running_example)


def test_oracle_empty_main(empty_main):
    assert naive_least_fixpoint(empty_main).reachable_methods == methods("Main.main()")


@pytest.mark.parametrize("flag", [True, False])
@pytest.mark.parametrize("name", ["thread_sleep", "thread_sleep_virtual", "embedded_constant", "static_field_read"])
def test_oracle_golden(name, flag):
    model = load(name)
    assert naive_least_fixpoint(model, flag) == analyze(model, AnalysisConfig(distinguish_special_invokes=flag))


def test_oracle_budget(running_example):
    with pytest.raises(BudgetExceeded):
        naive_least_fixpoint(running_example, max_rounds=1)


def test_generated_model_validates():
    model = generate_model(CorpusSpec(seed=1, type_count=10, method_count=30))
    assert validate(model) == []
    assert model.roots == (generate_model(CorpusSpec(seed=1, type_count=10, method_count=30)).roots)
    assert len(model.roots) == 1


def test_single_type():
    model = generate_model(CorpusSpec(seed=3, type_count=1, method_count=1))
    assert list(model.types) == [MAIN]
    assert model.method_count() == 1 and len(model.roots) == 1


def test_determinism():
    spec = CorpusSpec(seed=42, type_count=30, method_count=120, heap_object_count=15)
    assert serialize_model(generate_model(spec)) == serialize_model(generate_model(spec))
    other = CorpusSpec(seed=43, type_count=30, method_count=120, heap_object_count=15)
    assert serialize_model(generate_model(spec)) != serialize_model(generate_model(other))


@pytest.mark.parametrize("kw", [{"type_count": 0}, {"method_count": 0}, {"call_density": 1.5}, {"heap_object_count": -1}])
def test_spec_rejects_bad_parameters(kw):
    with pytest.raises(ValueError):
        CorpusSpec(**kw)


@pytest.mark.parametrize("seed", range(10))
def test_oracle_corpus_round_trip_and_equivalence(seed):
    spec = oracle_corpus_spec(seed)
    assert spec.type_count <= 100 and spec.method_count <= 400
    model = generate_model(spec)
    assert parse_model(serialize_model(model)) == model
    assert analyze(model) == naive_least_fixpoint(model)
