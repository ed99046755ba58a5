import json
import random

import pytest

import oracles
from randmodels import random_model
from sortweaver.model import (
    DispatchPolicy,
    FactError,
    compute_overrides,
    lifted_calls,
    load_facts,
    load_records,
)


def lines(*records):
    return [json.dumps(r) for r in records]


TYPE = {"k": "type", "id": "T1", "name": "A", "kind": "class",
        "abstract": False, "anon": False, "encl": None, "super": []}
METHOD = {"k": "method", "id": "M1", "owner": "T1", "name": "f", "params": [],
          "ret": "void", "vis": "public", "static": False, "abstract": False,
          "ctor": False, "throws": [], "stmts": 2}


def test_empty_stream_yields_empty_model():
    model = load_facts([])
    assert not model.types and not model.methods and not model.fields and not model.calls
    assert model.lifted_edges() == frozenset()


def test_f1_has_28_call_sites_on_check_damage(command_model):
    target = command_model.resolve_method("DrawingView.checkDamage")
    calls = [c for c in command_model.calls.values() if c.static_target == target.id]
    assert len(calls) == 28


def test_unknown_owner_reference_names_id_and_line():
    with pytest.raises(FactError) as err:
        load_facts(lines(dict(METHOD, owner="T9")))
    assert "T9" in str(err.value)
    assert "line 1" in str(err.value)


def test_duplicate_id_rejected():
    with pytest.raises(FactError, match="duplicate id"):
        load_facts(lines(TYPE, TYPE))


def test_unknown_record_kind_rejected():
    with pytest.raises(FactError, match="unknown record kind"):
        load_facts(lines({"k": "mystery", "id": "X"}))


def test_unknown_keys_ignored():
    model = load_facts(lines(dict(TYPE, zzz=1), dict(METHOD, extra="x")))
    assert "T1" in model.types and "M1" in model.methods


def test_malformed_json_reports_line():
    with pytest.raises(FactError) as err:
        load_facts([json.dumps(TYPE), "{nope"])
    assert "line 2" in str(err.value)


def test_unresolved_supertype_becomes_external_opaque_type():
    model = load_facts(lines(dict(TYPE, super=["LibBase"])))
    assert model.types["LibBase"].is_external
    assert model.ancestors("T1") == {"T1", "LibBase"}


def test_supertype_cycle_reported_with_cycle():
    t1 = dict(TYPE, super=["T2"])
    t2 = dict(TYPE, id="T2", name="B", super=["T1"])
    with pytest.raises(FactError, match="cycle in supertype hierarchy"):
        load_facts(lines(t1, t2))


def test_abstract_method_with_body_rejected():
    with pytest.raises(FactError, match="abstract method with a body"):
        load_facts(lines(TYPE, dict(METHOD, abstract=True)))


def test_duplicate_signature_rejected():
    with pytest.raises(FactError, match="duplicate signature"):
        load_facts(lines(TYPE, METHOD, dict(METHOD, id="M2")))


def test_call_ordinal_must_fit_caller_body():
    call = {"k": "call", "id": "C1", "caller": "M1", "target": "M1",
            "recv": {"kind": "this"}, "ord": 3, "pass": []}
    with pytest.raises(FactError, match="ordinal"):
        load_facts(lines(TYPE, METHOD, call))


def test_caller_without_body_rejected():
    sig = dict(METHOD, id="M2", name="g", abstract=True, stmts=0)
    call = {"k": "call", "id": "C1", "caller": "M2", "target": "M1",
            "recv": {"kind": "this"}, "ord": 1, "pass": []}
    with pytest.raises(FactError, match="ordinal"):
        load_facts(lines(TYPE, METHOD, sig, call))


def test_passthrough_indices_validated():
    callee = dict(METHOD, id="M2", name="g", params=["int"], stmts=1)
    call = {"k": "call", "id": "C1", "caller": "M1", "target": "M2",
            "recv": {"kind": "this"}, "ord": 1, "pass": [[1, 0]]}
    with pytest.raises(FactError, match="pass-through argument"):
        load_facts(lines(TYPE, METHOD, callee, call))


def test_anonymous_type_requires_enclosing():
    with pytest.raises(FactError, match="anonymous"):
        load_facts(lines(dict(TYPE, anon=True)))


def test_dangling_receiver_field_rejected():
    call = {"k": "call", "id": "C1", "caller": "M1", "target": "M1",
            "recv": {"kind": "field", "field": "F9"}, "ord": 1, "pass": []}
    with pytest.raises(FactError) as err:
        load_facts(lines(TYPE, METHOD, call))
    assert "F9" in str(err.value) and "line 3" in str(err.value)


# -- overrides --------------------------------------------------------------------


def test_paste_execute_overrides_abstract_command_execute(command_model):
    paste = command_model.resolve_method("PasteCommand.execute")
    base = command_model.resolve_method("AbstractCommand.execute")
    assert (paste.id, base.id) in set(compute_overrides(command_model))


def test_same_signature_without_subtype_edge_is_not_override():
    t2 = dict(TYPE, id="T2", name="B")
    m2 = dict(METHOD, id="M2", owner="T2")
    model = load_facts(lines(TYPE, t2, METHOD, m2))
    assert compute_overrides(model) == ()


def test_interface_implementation_is_an_override(command_model):
    impl = command_model.resolve_method("AbstractCommand.execute")
    iface = command_model.resolve_method("Command.execute")
    assert (impl.id, iface.id) in set(compute_overrides(command_model))


def test_direct_pairs_skip_the_middle_of_a_three_level_chain():
    t2 = dict(TYPE, id="T2", name="B", super=["T1"])
    t3 = dict(TYPE, id="T3", name="C", super=["T2"])
    m2 = dict(METHOD, id="M2", owner="T2")
    m3 = dict(METHOD, id="M3", owner="T3")
    model = load_facts(lines(TYPE, t2, t3, METHOD, m2, m3))
    direct = set(compute_overrides(model))
    assert ("M3", "M2") in direct and ("M2", "M1") in direct
    assert ("M3", "M1") not in direct
    assert model.overrides_all("M3") == {"M2", "M1"}


def test_overrides_matches_oracle_on_random_models():
    rng = random.Random(1234)
    for _ in range(40):
        model = random_model(rng)
        assert set(compute_overrides(model)) == oracles.overrides_direct(model)
        for mid in model.methods:
            assert model.overrides_all(mid) == {
                b for a, b in oracles.overrides_full(model) if a == mid
            }


def test_overrides_irreflexive_and_acyclic():
    rng = random.Random(77)
    for _ in range(30):
        model = random_model(rng)
        full = {(a, b) for a in model.methods for b in model.overrides_all(a)}
        assert all(a != b for a, b in full)
        assert not any((b, a) in full for a, b in full)


# -- lifted calls ------------------------------------------------------------------


def test_super_call_maps_to_static_target_only(command_model):
    paste = command_model.resolve_method("PasteCommand.execute")
    base = command_model.resolve_method("AbstractCommand.execute")
    iface = command_model.resolve_method("Command.execute")
    static = lifted_calls(command_model, DispatchPolicy.STATIC_ONLY)
    assert (paste.id, base.id) in static
    assert (paste.id, iface.id) not in static


def test_lift_to_ancestors_adds_interface_declaration(command_model):
    paste = command_model.resolve_method("PasteCommand.execute")
    iface = command_model.resolve_method("Command.execute")
    lifted = lifted_calls(command_model, DispatchPolicy.LIFT_TO_ANCESTORS)
    assert (paste.id, iface.id) in lifted


def test_policy_monotonicity_on_random_models():
    rng = random.Random(999)
    for _ in range(40):
        model = random_model(rng)
        static = lifted_calls(model, DispatchPolicy.STATIC_ONLY)
        up = lifted_calls(model, DispatchPolicy.LIFT_TO_ANCESTORS)
        both = lifted_calls(model, DispatchPolicy.LIFT_BOTH)
        assert static <= up <= both
        for policy in DispatchPolicy:
            assert lifted_calls(model, policy) == oracles.lifted(model, policy.value)


def test_record_order_does_not_change_the_model(command_model):
    records = command_model.to_records()
    shuffled = list(records)
    random.Random(5).shuffle(shuffled)
    reloaded = load_records(shuffled)
    assert reloaded.to_records() == records
    assert reloaded.lifted_edges() == command_model.lifted_edges()


def test_to_records_round_trip(undo_model):
    again = load_records(undo_model.to_records())
    assert again.to_records() == undo_model.to_records()


def test_resolve_method_forms(command_model):
    by_both = command_model.resolve_method("DrawingView.checkDamage")
    assert command_model.resolve_method("checkDamage").id == by_both.id
    assert command_model.resolve_method("DrawingView.checkDamage/0").id == by_both.id
    with pytest.raises(FactError, match="ambiguous"):
        command_model.resolve_method("execute")
    with pytest.raises(FactError, match="unknown method"):
        command_model.resolve_method("DrawingView.nope")
