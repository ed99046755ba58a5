"""Persistent, hierarchical concern models.

A concern model is a tree of named groups whose leaves are sort instances:
re-executable query bindings plus an optional snapshot of the last committed
result.  The file format is canonical JSON (key-sorted, two-space indent) so
models diff cleanly under version control.

Snapshots and drift reporting are a tool extension on top of the query
model: each committed run stores the result digest and the per-hit keys, so
a later run can report exactly which hits appeared or disappeared and flag
stale documentation.  Hit keys use qualified signatures, not extractor ids,
so they survive re-extraction of changed sources.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ._util import digest as _digest
from ._util import pretty_json
from .model import FactError, SourceModel
from .queries import QueryBinding, QueryResult, SortKind, execute_binding

#: Version of the concern-model file schema.
MODEL_SCHEMA_VERSION = "1"


class ConcernModelError(ValueError):
    pass


@dataclass(frozen=True)
class Snapshot:
    digest: str
    hits: int
    items: tuple[str, ...]

    @staticmethod
    def of(model: SourceModel, result: QueryResult) -> "Snapshot":
        keys = sorted(result.keys(model))
        return Snapshot(digest=_digest(keys), hits=len(keys), items=tuple(keys))

    def to_json(self) -> dict:
        return {"digest": self.digest, "hits": self.hits, "items": list(self.items)}


@dataclass
class Instance:
    name: str
    binding: QueryBinding
    snapshot: Snapshot | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "sort": self.binding.sort.value,
            "params": dict(self.binding.params),
            "snapshot": self.snapshot.to_json() if self.snapshot else None,
            "note": self.note,
        }


@dataclass
class Group:
    name: str
    children: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "children": [c.to_json() for c in self.children]}

    def child(self, name: str):
        for child in self.children:
            if child.name == name:
                return child
        return None


def _node_from_json(obj: dict):
    if not isinstance(obj, dict) or "name" not in obj:
        raise ConcernModelError(f"bad concern-model node: {obj!r}")
    if "children" in obj:
        group = Group(obj["name"])
        group.children = [_node_from_json(c) for c in obj["children"]]
        return group
    if "sort" not in obj or "params" not in obj:
        raise ConcernModelError(f"instance node missing sort/params: {obj['name']!r}")
    snapshot = None
    snap = obj.get("snapshot")
    if snap is not None:
        snapshot = Snapshot(
            digest=snap["digest"], hits=snap["hits"], items=tuple(snap.get("items", ()))
        )
    binding = QueryBinding.make(SortKind(obj["sort"]), **obj["params"])
    return Instance(obj["name"], binding, snapshot, obj.get("note", ""))


def load_model(path: str | Path) -> Group:
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    root = _node_from_json(data)
    if not isinstance(root, Group):
        raise ConcernModelError("concern-model root must be a group")
    return root


def save_model(root: Group, path: str | Path):
    Path(path).write_text(dumps_model(root), encoding="utf-8")


def dumps_model(root: Group) -> str:
    return pretty_json(root.to_json()) + "\n"


# -- tree edits -----------------------------------------------------------------


def _split(path: str) -> list[str]:
    parts = [p for p in path.split("/") if p]
    if not parts:
        raise ConcernModelError("empty concern path")
    return parts


def _find(root: Group, path: str):
    node = root
    for part in _split(path):
        if not isinstance(node, Group):
            raise ConcernModelError(f"no such concern path: {path!r}")
        child = node.child(part)
        if child is None:
            raise ConcernModelError(f"no such concern path: {path!r}")
        node = child
    return node


def _parent_of(root: Group, path: str) -> tuple[Group, str]:
    parts = _split(path)
    parent = root
    for part in parts[:-1]:
        child = parent.child(part) if isinstance(parent, Group) else None
        if not isinstance(child, Group):
            raise ConcernModelError(f"no such concern path: {path!r}")
        parent = child
    return parent, parts[-1]


def add_group(root: Group, path: str) -> Group:
    parent, name = _parent_of(root, path)
    if parent.child(name) is not None:
        raise ConcernModelError(f"duplicate name at {path!r}")
    group = Group(name)
    parent.children.append(group)
    return group


def add_instance(root: Group, path: str, binding: QueryBinding, note: str = "") -> Instance:
    parent, name = _parent_of(root, path)
    if parent.child(name) is not None:
        raise ConcernModelError(f"duplicate name at {path!r}")
    instance = Instance(name, binding, None, note)
    parent.children.append(instance)
    return instance


def remove(root: Group, path: str):
    parent, name = _parent_of(root, path)
    child = parent.child(name)
    if child is None:
        raise ConcernModelError(f"no such concern path: {path!r}")
    parent.children.remove(child)


def rename(root: Group, path: str, new_name: str):
    parent, name = _parent_of(root, path)
    child = parent.child(name)
    if child is None:
        raise ConcernModelError(f"no such concern path: {path!r}")
    if parent.child(new_name) is not None:
        raise ConcernModelError(f"duplicate name {new_name!r} among siblings of {path!r}")
    child.name = new_name


def iter_instances(root: Group, prefix: str = ""):
    for child in root.children:
        path = f"{prefix}/{child.name}" if prefix else child.name
        if isinstance(child, Group):
            yield from iter_instances(child, path)
        else:
            yield path, child


# -- execution and drift -----------------------------------------------------------


@dataclass(frozen=True)
class DriftReport:
    added: tuple[str, ...]
    removed: tuple[str, ...]
    unchanged: int

    @property
    def clean(self) -> bool:
        return not self.added and not self.removed

    def to_json(self) -> dict:
        return {
            "added": list(self.added),
            "removed": list(self.removed),
            "unchanged": self.unchanged,
        }


def drift_between(snapshot: Snapshot | None, keys: tuple[str, ...]) -> DriftReport:
    now = set(keys)
    before = set(snapshot.items) if snapshot else set()
    return DriftReport(
        added=tuple(sorted(now - before)),
        removed=tuple(sorted(before - now)),
        unchanged=len(now & before),
    )


@dataclass
class InstanceRun:
    path: str
    result: QueryResult | None = None
    drift: DriftReport | None = None
    error: str | None = None

    def to_json(self, model: SourceModel) -> dict:
        out: dict = {"path": self.path}
        if self.error is not None:
            out["error"] = self.error
        else:
            out["result"] = self.result.to_json(model)
            out["drift"] = self.drift.to_json()
        return out


def run_all(root: Group, model: SourceModel, *, commit: bool = False) -> list[InstanceRun]:
    """Re-execute every instance query and report drift against snapshots.

    Never touches the tree unless ``commit`` is set, in which case each
    successful instance gets a fresh snapshot (the caller persists the
    tree).  A failing binding produces a per-instance error entry; other
    instances still run.
    """
    runs = []
    for path, instance in iter_instances(root):
        run = InstanceRun(path)
        try:
            result = execute_binding(model, instance.binding)
        except FactError as exc:
            run.error = str(exc)
            runs.append(run)
            continue
        run.result = result
        run.drift = drift_between(instance.snapshot, result.keys(model))
        if commit:
            instance.snapshot = Snapshot.of(model, result)
        runs.append(run)
    return runs
