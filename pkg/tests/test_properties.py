import random

from hypothesis import HealthCheck, given, settings, strategies as st

from mutate import append_instruction, random_instruction
from rtakit.corpus import CorpusSpec, generate_model
from rtakit.engine import RESULT_SETS, AnalysisConfig, analyze
from rtakit.oracle import naive_least_fixpoint
from rtakit.pta import analyze_pta
from rtakit.textformat import parse_model, serialize_model
from rtakit.validate import validate

specs = st.builds(
    CorpusSpec,
    seed=st.integers(0, 10**6),
    type_count=st.integers(1, 25),
    method_count=st.integers(1, 80),
    max_hierarchy_depth=st.integers(1, 5),
    interface_density=st.sampled_from([0.0, 0.2, 0.5, 0.9]),
    call_density=st.sampled_from([0.1, 0.5, 0.9]),
    field_density=st.sampled_from([0.0, 0.3, 0.7]),
    heap_object_count=st.integers(0, 12),
)

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@SETTINGS
@given(specs)
def test_generated_models_are_valid_and_round_trip(spec):
    model = generate_model(spec)
    assert validate(model) == []
    assert parse_model(serialize_model(model)) == model


@SETTINGS
@given(specs, st.booleans())
def test_engine_equals_oracle(spec, flag):
    model = generate_model(spec)
    assert analyze(model, AnalysisConfig(distinguish_special_invokes=flag)) == naive_least_fixpoint(model, flag)


@SETTINGS
@given(specs)
def test_pta_subset_of_rta(spec):
    model = generate_model(spec)
    p, _ = analyze_pta(model)
    r = analyze(model)
    for name in RESULT_SETS:
        assert getattr(p, name) <= getattr(r, name), name


@SETTINGS
@given(specs, st.sampled_from([2, 4, 8]))
def test_thread_count_does_not_change_result(spec, threads):
    model = generate_model(spec)
    assert analyze(model, AnalysisConfig(threads=threads)) == analyze(model)


@SETTINGS
@given(specs, st.integers(0, 10**6))
def test_monotonicity(spec, seed):
    model = generate_model(spec)
    rng = random.Random(seed)
    before = analyze(model)
    target = sorted(m for m in before.reachable_methods)[rng.randrange(len(before.reachable_methods))]
    mutated = append_instruction(model, target, random_instruction(model, model.method(target), rng))
    assert validate(mutated) == []
    after = analyze(mutated)
    for name in RESULT_SETS:
        assert getattr(before, name) <= getattr(after, name), name


@SETTINGS
@given(specs)
def test_unread_field_values_do_not_matter(spec):
    from dataclasses import replace

    model = generate_model(spec)
    r = analyze(model)
    heap = {
        oid: replace(obj, field_values={f: v for f, v in obj.field_values.items() if f in r.read_fields})
        for oid, obj in model.heap.items()
    }
    assert analyze(replace(model, heap=heap)) == r
