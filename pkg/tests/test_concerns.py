import json

import pytest

from conftest import CORPUS, corpus_model, model_from_source

from sortweaver.concerns import (
    ConcernModelError,
    Group,
    add_group,
    add_instance,
    drift_between,
    dumps_model,
    iter_instances,
    load_model,
    remove,
    rename,
    run_all,
    save_model,
    Snapshot,
)
from sortweaver.queries import QueryBinding, SortKind, execute_binding


def notify_binding():
    return QueryBinding.make(
        SortKind.CB, target="DrawingView.checkDamage", scope="Command"
    )


def test_add_group_then_instance_builds_depth_two_tree():
    root = Group("concerns")
    add_group(root, "Command support")
    add_instance(root, "Command support/notify views", notify_binding())
    paths = [path for path, _ in iter_instances(root)]
    assert paths == ["Command support/notify views"]


def test_duplicate_sibling_name_rejected():
    root = Group("concerns")
    add_group(root, "Command support")
    with pytest.raises(ConcernModelError, match="duplicate"):
        add_group(root, "Command support")
    add_instance(root, "Command support/notify views", notify_binding())
    with pytest.raises(ConcernModelError, match="duplicate"):
        add_instance(root, "Command support/notify views", notify_binding())


def test_remove_missing_path_names_the_path():
    root = Group("concerns")
    with pytest.raises(ConcernModelError, match="nothing/here"):
        remove(root, "nothing/here")


def test_rename_to_existing_sibling_rejected():
    root = Group("concerns")
    add_group(root, "a")
    add_group(root, "b")
    with pytest.raises(ConcernModelError, match="duplicate"):
        rename(root, "b", "a")
    rename(root, "b", "c")
    assert root.child("c") is not None


def test_save_load_round_trip_is_byte_identical(tmp_path):
    root = Group("concerns")
    add_group(root, "Command support")
    add_instance(root, "Command support/notify views", notify_binding(), note="demo")
    path = tmp_path / "model.json"
    save_model(root, path)
    first = path.read_text()
    save_model(load_model(path), path)
    assert path.read_text() == first


def test_bundled_demo_models_are_canonical():
    for name in ("command-model.json", "undo-model.json"):
        path = CORPUS / name
        root = load_model(path)
        assert dumps_model(root) == path.read_text()


def test_first_run_reports_all_hits_added(command_model):
    root = load_model(CORPUS / "command-model.json")
    runs = run_all(root, command_model)
    by_path = {r.path: r for r in runs}
    notify = by_path["Command support/notify views"]
    assert notify.error is None
    assert len(notify.drift.added) == 19
    assert notify.drift.removed == ()
    assert notify.drift.unchanged == 0


def test_rerun_after_commit_shows_zero_drift(command_model):
    root = load_model(CORPUS / "command-model.json")
    run_all(root, command_model, commit=True)
    runs = run_all(root, command_model)
    assert all(r.drift.clean for r in runs)


def test_new_command_subclass_adds_exactly_one_hit(command_model):
    base = (CORPUS / "command.mini").read_text()
    grown = base + """
class MirrorCommand extends AbstractCommand {
    public void execute() {
        super.execute();
        DrawingView v = view();
        v.checkDamage();
    }
}
"""
    grown_model = model_from_source(grown, "command.mini")
    root = load_model(CORPUS / "command-model.json")
    run_all(root, command_model, commit=True)
    runs = run_all(root, grown_model)
    notify = next(r for r in runs if r.path == "Command support/notify views")
    assert len(notify.drift.added) == 1
    assert "MirrorCommand.execute()" in notify.drift.added[0]
    assert notify.drift.removed == ()
    assert notify.drift.unchanged == 19


def test_run_all_without_commit_never_mutates_file(tmp_path, command_model):
    source = (CORPUS / "command-model.json").read_text()
    path = tmp_path / "model.json"
    path.write_text(source)
    root = load_model(path)
    run_all(root, command_model)
    save_model(root, path)
    assert path.read_text() == source


def test_unresolvable_binding_is_a_per_instance_error(command_model):
    root = Group("concerns")
    add_instance(root, "bad", QueryBinding.make(SortKind.CB, target="No.where", scope="*"))
    add_instance(root, "good", notify_binding())
    runs = run_all(root, command_model)
    by_path = {r.path: r for r in runs}
    assert by_path["bad"].error is not None
    assert by_path["good"].error is None
    assert len(by_path["good"].result.hits) == 19


def test_drift_is_antisymmetric(command_model):
    result = execute_binding(command_model, notify_binding())
    keys = result.keys(command_model)
    snapshot = Snapshot.of(command_model, result)
    forward = drift_between(snapshot, keys[:10])
    backward = drift_between(
        Snapshot(digest="", hits=10, items=tuple(sorted(keys[:10]))), keys
    )
    assert set(forward.removed) == set(backward.added)
    assert set(forward.added) == set(backward.removed)


def test_snapshot_keys_survive_re_extraction(command_model):
    # Re-extracting identical sources gives identical semantic keys even if
    # the opaque ids were to shift.
    again = corpus_model("command")
    first = execute_binding(command_model, notify_binding())
    second = execute_binding(again, notify_binding())
    assert first.keys(command_model) == second.keys(again)


def test_malformed_model_file_rejected(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "sort": "CB"}))
    with pytest.raises(ConcernModelError):
        load_model(bad)
