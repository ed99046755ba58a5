"""Language-agnostic program fact model and its derived relations.

A frontend (or any external extractor) emits flat fact records for types,
methods, fields and call sites, one JSON object per line.  ``load_facts``
links those records into an immutable :class:`SourceModel` that every
downstream analysis consumes; nothing past this module ever looks at source
text again.

Derived relations, computed once at construction:

* the reflexive-transitive subtype closure over declared supertypes,
* the override relation between methods (direct pairs plus full closure),
* the call relation, liftable along the override chain under a
  configurable :class:`DispatchPolicy`.

Record schema (``facts.jsonl``, field ``k`` discriminates)::

    {"k":"type","id":"T1","name":"AbstractCommand","kind":"class",
     "abstract":false,"anon":false,"encl":null,"super":["T0"]}
    {"k":"method","id":"M7","owner":"T1","name":"execute","params":[],
     "ret":"void","vis":"public","static":false,"abstract":false,
     "ctor":false,"throws":[],"stmts":3}
    {"k":"field","id":"F2","owner":"T1","name":"fView",
     "type":"DrawingView","vis":"private"}
    {"k":"call","id":"C9","caller":"M9","target":"M7",
     "recv":{"kind":"super"},"ord":1,"pass":[[0,0]]}

Unknown keys are ignored so extractors may attach extra information; this
loader itself understands three optional keys: ``src`` (source file of the
entity), ``ext`` (entity synthesized for an unresolved reference) and, on
methods, ``raises`` (exception type names thrown directly in the body).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Iterable

from ._util import natural_key, simple_name

#: Version of the fact record schema accepted by this loader.
SCHEMA_VERSION = "1"


class FactError(ValueError):
    """Malformed record, broken reference or inconsistent fact set."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class TypeKind(str, Enum):
    CLASS = "class"
    INTERFACE = "interface"


class Visibility(str, Enum):
    PUBLIC = "public"
    PROTECTED = "protected"
    PACKAGE = "package"
    PRIVATE = "private"


class ReceiverKind(str, Enum):
    THIS = "this"
    SUPER = "super"
    FIELD = "field"
    PARAM = "param"
    LOCAL = "local"
    OTHER = "other"


class DispatchPolicy(str, Enum):
    """How a call site is attributed to methods along the override chain.

    ``static_only`` counts a call toward its declared target alone.
    ``lift_to_ancestors`` additionally counts it toward every method the
    target overrides (a call to ``AbstractCommand.execute`` also counts
    toward ``Command.execute``).  ``lift_both`` further counts it toward
    every method overriding the target.
    """

    STATIC_ONLY = "static_only"
    LIFT_TO_ANCESTORS = "lift_to_ancestors"
    LIFT_BOTH = "lift_both"


DEFAULT_POLICY = DispatchPolicy.LIFT_TO_ANCESTORS


@dataclass(frozen=True)
class TypeDecl:
    id: str
    qualified_name: str
    kind: TypeKind
    is_abstract: bool = False
    is_anonymous: bool = False
    enclosing_type: str | None = None
    supertypes: tuple[str, ...] = ()
    is_external: bool = False
    src: str = ""

    @property
    def simple_name(self) -> str:
        return simple_name(self.qualified_name)


@dataclass(frozen=True)
class MethodDecl:
    id: str
    owner: str
    name: str
    param_types: tuple[str, ...] = ()
    return_type: str = "void"
    visibility: Visibility = Visibility.PUBLIC
    is_static: bool = False
    is_abstract: bool = False
    is_constructor: bool = False
    declared_throws: tuple[str, ...] = ()
    body_stmt_count: int = 0
    direct_throws: tuple[str, ...] = ()
    is_external: bool = False
    src: str = ""

    @property
    def arity(self) -> int:
        return len(self.param_types)

    @property
    def signature(self) -> tuple[str, tuple[str, ...]]:
        return (self.name, self.param_types)


@dataclass(frozen=True)
class FieldDecl:
    id: str
    owner: str
    name: str
    declared_type: str
    visibility: Visibility = Visibility.PRIVATE
    src: str = ""


@dataclass(frozen=True)
class Receiver:
    kind: ReceiverKind
    field: str | None = None  # FieldDecl id, for kind == FIELD
    index: int | None = None  # parameter index, for kind == PARAM

    def to_json(self) -> dict:
        rec: dict = {"kind": self.kind.value}
        if self.kind is ReceiverKind.FIELD:
            rec["field"] = self.field
        if self.kind is ReceiverKind.PARAM:
            rec["index"] = self.index
        return rec


@dataclass(frozen=True)
class CallSite:
    id: str
    caller: str
    static_target: str
    receiver: Receiver
    ordinal: int
    #: (argument index in the callee, parameter index in the caller) pairs
    #: for arguments that forward a caller parameter verbatim.
    arg_passthrough: tuple[tuple[int, int], ...] = ()
    src: str = ""


class SourceModel:
    """Immutable fact database plus derived relations.

    Construction validates referential integrity and structural invariants
    and computes the subtype closure and override relation; the instance is
    safe to share across concurrent readers afterwards.
    """

    def __init__(
        self,
        types: Iterable[TypeDecl],
        methods: Iterable[MethodDecl],
        fields: Iterable[FieldDecl],
        calls: Iterable[CallSite],
        policy: DispatchPolicy = DEFAULT_POLICY,
    ):
        self._types = {t.id: t for t in sorted(types, key=lambda t: natural_key(t.id))}
        self._methods = {m.id: m for m in sorted(methods, key=lambda m: natural_key(m.id))}
        self._fields = {f.id: f for f in sorted(fields, key=lambda f: natural_key(f.id))}
        self._calls = {c.id: c for c in sorted(calls, key=lambda c: natural_key(c.id))}
        self.policy = DispatchPolicy(policy)

        self._validate_references()
        self._methods_by_owner: dict[str, tuple[MethodDecl, ...]] = _group(
            self._methods.values(), lambda m: m.owner
        )
        self._fields_by_owner: dict[str, tuple[FieldDecl, ...]] = _group(
            self._fields.values(), lambda f: f.owner
        )
        self._calls_by_caller: dict[str, tuple[CallSite, ...]] = _group(
            self._calls.values(), lambda c: c.caller
        )
        self._validate_structure()

        self._ancestors = self._compute_ancestors()
        self._descendants: dict[str, frozenset[str]] = _invert(self._ancestors)
        self._overrides_all, self._overridden_by = self._compute_overrides()
        self._lifted_cache: dict[DispatchPolicy, frozenset[tuple[str, str]]] = {}

    # -- basic access ------------------------------------------------------

    @property
    def types(self):
        return MappingProxyType(self._types)

    @property
    def methods(self):
        return MappingProxyType(self._methods)

    @property
    def fields(self):
        return MappingProxyType(self._fields)

    @property
    def calls(self):
        return MappingProxyType(self._calls)

    def methods_of(self, type_id: str) -> tuple[MethodDecl, ...]:
        return self._methods_by_owner.get(type_id, ())

    def fields_of(self, type_id: str) -> tuple[FieldDecl, ...]:
        return self._fields_by_owner.get(type_id, ())

    def calls_of(self, method_id: str) -> tuple[CallSite, ...]:
        return self._calls_by_caller.get(method_id, ())

    # -- name resolution ---------------------------------------------------

    def type_by_name(self, name: str) -> TypeDecl | None:
        """Resolve a type by qualified name, unique simple name, or id."""
        for t in self._types.values():
            if t.qualified_name == name:
                return t
        hits = [t for t in self._types.values() if t.simple_name == name]
        if len(hits) == 1:
            return hits[0]
        return self._types.get(name)

    def require_type(self, name: str) -> TypeDecl:
        t = self.type_by_name(name)
        if t is None:
            raise FactError(f"unknown type: {name!r}")
        return t

    def resolve_method(self, ref: str) -> MethodDecl:
        """Resolve ``name``, ``Type.name`` or ``Type.name/arity`` to a method.

        A bare ``name`` must be unique across the model; ``Type.name`` must
        be unique within the type's declared methods unless an ``/arity``
        suffix disambiguates overloads.
        """
        if ref in self._methods:
            return self._methods[ref]
        arity = None
        if "/" in ref:
            ref, suffix = ref.rsplit("/", 1)
            if not suffix.isdigit():
                raise FactError(f"bad arity suffix in method reference: {ref}/{suffix}")
            arity = int(suffix)
        if "." in ref:
            type_name, method_name = ref.rsplit(".", 1)
            owner = self.require_type(type_name)
            pool = [m for m in self.methods_of(owner.id) if m.name == method_name]
        else:
            method_name = ref
            pool = [m for m in self._methods.values() if m.name == method_name]
        if arity is not None:
            pool = [m for m in pool if m.arity == arity]
        if not pool:
            raise FactError(f"unknown method: {ref!r}")
        if len(pool) > 1:
            options = ", ".join(sorted(self.method_sig(m.id) for m in pool))
            raise FactError(f"ambiguous method reference {ref!r}: {options}")
        return pool[0]

    def method_sig(self, method_id: str) -> str:
        m = self._methods[method_id]
        owner = self._types[m.owner].qualified_name
        return f"{owner}.{m.name}({','.join(m.param_types)})"

    def entity_src(self, entity_id: str) -> str:
        for table in (self._types, self._methods, self._fields, self._calls):
            entity = table.get(entity_id)
            if entity is not None:
                return entity.src
        return ""

    # -- derived relations -------------------------------------------------

    def ancestors(self, type_id: str) -> frozenset[str]:
        """Reflexive-transitive supertypes of a type (subtype_of*)."""
        return self._ancestors[type_id]

    def subtree(self, type_id: str) -> frozenset[str]:
        """Reflexive-transitive subtypes of a type."""
        return self._descendants.get(type_id, frozenset((type_id,)))

    def is_subtype(self, type_id: str, ancestor_id: str) -> bool:
        return ancestor_id in self._ancestors[type_id]

    def overrides_all(self, method_id: str) -> frozenset[str]:
        """Every method the given one overrides, directly or transitively."""
        return self._overrides_all[method_id]

    def overridden_by(self, method_id: str) -> frozenset[str]:
        return self._overridden_by.get(method_id, frozenset())

    def lifted_callees(self, call: CallSite, policy: DispatchPolicy | None = None) -> tuple[str, ...]:
        """Methods a single call site contributes to under a policy."""
        policy = self.policy if policy is None else DispatchPolicy(policy)
        target = call.static_target
        out = [target]
        if policy in (DispatchPolicy.LIFT_TO_ANCESTORS, DispatchPolicy.LIFT_BOTH):
            out.extend(sorted(self._overrides_all[target], key=natural_key))
        if policy is DispatchPolicy.LIFT_BOTH:
            out.extend(sorted(self.overridden_by(target), key=natural_key))
        return tuple(out)

    def lifted_edges(self, policy: DispatchPolicy | None = None) -> frozenset[tuple[str, str]]:
        """All (caller method, callee method) pairs under a policy."""
        policy = self.policy if policy is None else DispatchPolicy(policy)
        cached = self._lifted_cache.get(policy)
        if cached is None:
            edges = set()
            for call in self._calls.values():
                for callee in self.lifted_callees(call, policy):
                    edges.add((call.caller, callee))
            cached = frozenset(edges)
            self._lifted_cache[policy] = cached
        return cached

    def callers_of(self, method_id: str, policy: DispatchPolicy | None = None) -> frozenset[str]:
        """Distinct methods with a lifted call to ``method_id``; self-calls excluded."""
        if method_id not in self._methods:
            raise FactError(f"unknown method id: {method_id!r}")
        return frozenset(
            caller
            for caller, callee in self.lifted_edges(policy)
            if callee == method_id and caller != method_id
        )

    # -- serialization -----------------------------------------------------

    def to_records(self) -> list[dict]:
        """Canonical record list; loading it again reproduces this model."""
        records: list[dict] = []
        for t in self._types.values():
            rec = {
                "k": "type",
                "id": t.id,
                "name": t.qualified_name,
                "kind": t.kind.value,
                "abstract": t.is_abstract,
                "anon": t.is_anonymous,
                "encl": t.enclosing_type,
                "super": list(t.supertypes),
            }
            if t.is_external:
                rec["ext"] = True
            if t.src:
                rec["src"] = t.src
            records.append(rec)
        for m in self._methods.values():
            rec = {
                "k": "method",
                "id": m.id,
                "owner": m.owner,
                "name": m.name,
                "params": list(m.param_types),
                "ret": m.return_type,
                "vis": m.visibility.value,
                "static": m.is_static,
                "abstract": m.is_abstract,
                "ctor": m.is_constructor,
                "throws": list(m.declared_throws),
                "stmts": m.body_stmt_count,
            }
            if m.direct_throws:
                rec["raises"] = list(m.direct_throws)
            if m.is_external:
                rec["ext"] = True
            if m.src:
                rec["src"] = m.src
            records.append(rec)
        for f in self._fields.values():
            rec = {
                "k": "field",
                "id": f.id,
                "owner": f.owner,
                "name": f.name,
                "type": f.declared_type,
                "vis": f.visibility.value,
            }
            if f.src:
                rec["src"] = f.src
            records.append(rec)
        for c in self._calls.values():
            rec = {
                "k": "call",
                "id": c.id,
                "caller": c.caller,
                "target": c.static_target,
                "recv": c.receiver.to_json(),
                "ord": c.ordinal,
                "pass": [list(p) for p in c.arg_passthrough],
            }
            if c.src:
                rec["src"] = c.src
            records.append(rec)
        return records

    def to_jsonl(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.to_records())

    # -- validation and derivation ----------------------------------------

    def _validate_references(self):
        for t in self._types.values():
            if t.enclosing_type is not None and t.enclosing_type not in self._types:
                raise FactError(f"type {t.id}: unknown enclosing type {t.enclosing_type!r}")
            for sup in t.supertypes:
                if sup not in self._types:
                    raise FactError(f"type {t.id}: unknown supertype {sup!r}")
        for m in self._methods.values():
            if m.owner not in self._types:
                raise FactError(f"method {m.id}: unknown owner {m.owner!r}")
        for f in self._fields.values():
            if f.owner not in self._types:
                raise FactError(f"field {f.id}: unknown owner {f.owner!r}")
        for c in self._calls.values():
            if c.caller not in self._methods:
                raise FactError(f"call {c.id}: unknown caller {c.caller!r}")
            if c.static_target not in self._methods:
                raise FactError(f"call {c.id}: unknown target {c.static_target!r}")
            if c.receiver.kind is ReceiverKind.FIELD and c.receiver.field not in self._fields:
                raise FactError(f"call {c.id}: unknown receiver field {c.receiver.field!r}")

    def _validate_structure(self):
        for t in self._types.values():
            if t.is_anonymous and t.enclosing_type is None:
                raise FactError(f"type {t.id}: anonymous type without enclosing type")
            seen = {t.id}
            cursor = t.enclosing_type
            while cursor is not None:
                if cursor in seen:
                    raise FactError(f"type {t.id}: cyclic enclosing-type chain")
                seen.add(cursor)
                cursor = self._types[cursor].enclosing_type
        for owner, methods in self._methods_by_owner.items():
            seen_sigs: dict[tuple, str] = {}
            for m in methods:
                if m.is_abstract and m.body_stmt_count != 0:
                    raise FactError(f"method {m.id}: abstract method with a body")
                if m.signature in seen_sigs:
                    raise FactError(
                        f"method {m.id}: duplicate signature "
                        f"{m.name}({','.join(m.param_types)}) in type {owner} "
                        f"(already declared by {seen_sigs[m.signature]})"
                    )
                seen_sigs[m.signature] = m.id
        for owner, fields in self._fields_by_owner.items():
            names: dict[str, str] = {}
            for f in fields:
                if f.name in names:
                    raise FactError(
                        f"field {f.id}: duplicate field name {f.name!r} in type {owner}"
                    )
                names[f.name] = f.id
        for c in self._calls.values():
            caller = self._methods[c.caller]
            target = self._methods[c.static_target]
            if not 1 <= c.ordinal <= caller.body_stmt_count:
                raise FactError(
                    f"call {c.id}: ordinal {c.ordinal} outside caller body "
                    f"(1..{caller.body_stmt_count})"
                )
            for arg_index, param_index in c.arg_passthrough:
                if not 0 <= arg_index < target.arity:
                    raise FactError(f"call {c.id}: pass-through argument index {arg_index} "
                                    f"outside callee arity {target.arity}")
                if not 0 <= param_index < caller.arity:
                    raise FactError(f"call {c.id}: pass-through parameter index {param_index} "
                                    f"outside caller arity {caller.arity}")
            if c.receiver.kind is ReceiverKind.PARAM and not (
                c.receiver.index is not None and 0 <= c.receiver.index < caller.arity
            ):
                raise FactError(f"call {c.id}: parameter receiver index out of range")

    def _compute_ancestors(self) -> dict[str, frozenset[str]]:
        resolved: dict[str, frozenset[str]] = {}
        in_progress: list[str] = []

        def visit(tid: str) -> frozenset[str]:
            if tid in resolved:
                return resolved[tid]
            if tid in in_progress:
                cycle = in_progress[in_progress.index(tid):] + [tid]
                names = " -> ".join(self._types[x].qualified_name for x in cycle)
                raise FactError(f"cycle in supertype hierarchy: {names}")
            in_progress.append(tid)
            acc = {tid}
            for sup in self._types[tid].supertypes:
                acc.update(visit(sup))
            in_progress.pop()
            resolved[tid] = frozenset(acc)
            return resolved[tid]

        for tid in self._types:
            visit(tid)
        return resolved

    def _compute_overrides(self):
        by_owner_sig: dict[tuple[str, tuple], str] = {
            (m.owner, m.signature): m.id for m in self._methods.values()
        }
        overrides_all: dict[str, frozenset[str]] = {}
        for m in self._methods.values():
            above = set()
            for anc in self._ancestors[m.owner]:
                if anc == m.owner:
                    continue
                found = by_owner_sig.get((anc, m.signature))
                if found is not None:
                    above.add(found)
            overrides_all[m.id] = frozenset(above)
        overridden_by: dict[str, set[str]] = {}
        for mid, above in overrides_all.items():
            for target in above:
                overridden_by.setdefault(target, set()).add(mid)
        return overrides_all, {k: frozenset(v) for k, v in overridden_by.items()}


def compute_overrides(model: SourceModel) -> tuple[tuple[str, str], ...]:
    """Direct override pairs (m, m'): m overrides m' with no method between.

    The full relation is the transitive closure of these pairs.
    """
    direct: list[tuple[str, str]] = []
    for mid in model.methods:
        above = model.overrides_all(mid)
        for target in above:
            if any(target in model.overrides_all(mid2) for mid2 in above):
                continue
            direct.append((mid, target))
    return tuple(sorted(direct, key=lambda p: (natural_key(p[0]), natural_key(p[1]))))


def lifted_calls(model: SourceModel, policy: DispatchPolicy) -> frozenset[tuple[str, str]]:
    """(caller, callee) method pairs under the given dispatch policy."""
    return model.lifted_edges(policy)


# -- loading ----------------------------------------------------------------

_VIS_VALUES = {v.value for v in Visibility}
_KIND_VALUES = {k.value for k in TypeKind}
_RECV_VALUES = {r.value for r in ReceiverKind}


def load_facts(lines: Iterable[str], *, policy: DispatchPolicy = DEFAULT_POLICY) -> SourceModel:
    """Parse a facts.jsonl stream and build a fully linked model.

    Raises :class:`FactError` with the offending line number for malformed
    records, duplicate ids and dangling references.  Supertype references
    to undeclared ids are retained as external opaque types rather than
    rejected, since real fact extracts are routinely partial.
    """
    records: list[tuple[int, dict]] = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FactError(f"invalid JSON: {exc.msg}", lineno) from None
        if not isinstance(rec, dict):
            raise FactError("record is not a JSON object", lineno)
        records.append((lineno, rec))
    return load_records(records, policy=policy)


def load_facts_path(path: str | Path, *, policy: DispatchPolicy = DEFAULT_POLICY) -> SourceModel:
    with open(path, "r", encoding="utf-8") as handle:
        return load_facts(handle, policy=policy)


def load_records(
    records: Iterable[dict] | Iterable[tuple[int, dict]],
    *,
    policy: DispatchPolicy = DEFAULT_POLICY,
) -> SourceModel:
    """Build a model from already-parsed records.

    Accepts plain dicts or (line number, dict) pairs; line numbers feed the
    error messages when present.
    """
    numbered: list[tuple[int | None, dict]] = []
    for item in records:
        if isinstance(item, tuple):
            numbered.append(item)
        else:
            numbered.append((None, item))

    types: dict[str, TypeDecl] = {}
    methods: dict[str, MethodDecl] = {}
    fields: dict[str, FieldDecl] = {}
    calls: dict[str, CallSite] = {}
    seen_ids: dict[str, int | None] = {}

    def check_id(entity_id: str, line: int | None):
        if entity_id in seen_ids:
            raise FactError(f"duplicate id {entity_id!r}", line)
        seen_ids[entity_id] = line

    for line, rec in numbered:
        kind = rec.get("k")
        if kind == "type":
            decl = _type_from_record(rec, line)
            check_id(decl.id, line)
            types[decl.id] = decl
        elif kind == "method":
            m = _method_from_record(rec, line)
            check_id(m.id, line)
            methods[m.id] = m
        elif kind == "field":
            f = _field_from_record(rec, line)
            check_id(f.id, line)
            fields[f.id] = f
        elif kind == "call":
            c = _call_from_record(rec, line)
            check_id(c.id, line)
            calls[c.id] = c
        else:
            raise FactError(f"unknown record kind {kind!r}", line)

    # Supertype references that do not resolve become external opaque types.
    known = set(types)
    for decl in list(types.values()):
        for sup in decl.supertypes:
            if sup not in known:
                types[sup] = TypeDecl(
                    id=sup, qualified_name=sup, kind=TypeKind.CLASS, is_external=True
                )
                known.add(sup)

    for line, rec in numbered:
        _check_references(rec, line, types, methods, fields)

    return SourceModel(types.values(), methods.values(), fields.values(), calls.values(), policy)


def _check_references(rec: dict, line: int | None, types, methods, fields):
    kind = rec["k"]
    if kind == "type":
        encl = rec.get("encl")
        if encl is not None and encl not in types:
            raise FactError(f"type {rec['id']}: unknown enclosing type id {encl!r}", line)
    elif kind in ("method", "field"):
        owner = rec["owner"]
        if owner not in types:
            raise FactError(f"{kind} {rec['id']}: unknown owner id {owner!r}", line)
    elif kind == "call":
        if rec["caller"] not in methods:
            raise FactError(f"call {rec['id']}: unknown caller id {rec['caller']!r}", line)
        if rec["target"] not in methods:
            raise FactError(f"call {rec['id']}: unknown target id {rec['target']!r}", line)
        recv = rec["recv"]
        if recv.get("kind") == "field" and recv.get("field") not in fields:
            raise FactError(
                f"call {rec['id']}: unknown receiver field id {recv.get('field')!r}", line
            )


def _need(rec: dict, key: str, types_: tuple, line: int | None, allow_none: bool = False):
    if key not in rec:
        raise FactError(f"missing key {key!r} in {rec.get('k', '?')} record", line)
    value = rec[key]
    if value is None and allow_none:
        return None
    if not isinstance(value, types_) or (isinstance(value, bool) and bool not in types_):
        raise FactError(f"bad value for {key!r}: {value!r}", line)
    return value


def _str_list(rec: dict, key: str, line: int | None) -> tuple[str, ...]:
    value = _need(rec, key, (list,), line)
    if not all(isinstance(v, str) for v in value):
        raise FactError(f"bad value for {key!r}: {value!r}", line)
    return tuple(value)


def _type_from_record(rec: dict, line: int | None) -> TypeDecl:
    kind = _need(rec, "kind", (str,), line)
    if kind not in _KIND_VALUES:
        raise FactError(f"bad type kind {kind!r}", line)
    return TypeDecl(
        id=_need(rec, "id", (str,), line),
        qualified_name=_need(rec, "name", (str,), line),
        kind=TypeKind(kind),
        is_abstract=_need(rec, "abstract", (bool,), line),
        is_anonymous=_need(rec, "anon", (bool,), line),
        enclosing_type=_need(rec, "encl", (str,), line, allow_none=True),
        supertypes=_str_list(rec, "super", line),
        is_external=bool(rec.get("ext", False)),
        src=str(rec.get("src", "")),
    )


def _method_from_record(rec: dict, line: int | None) -> MethodDecl:
    vis = _need(rec, "vis", (str,), line)
    if vis not in _VIS_VALUES:
        raise FactError(f"bad visibility {vis!r}", line)
    stmts = _need(rec, "stmts", (int,), line)
    if stmts < 0:
        raise FactError(f"negative statement count {stmts}", line)
    raises = rec.get("raises", [])
    if not isinstance(raises, list) or not all(isinstance(v, str) for v in raises):
        raise FactError(f"bad value for 'raises': {raises!r}", line)
    return MethodDecl(
        id=_need(rec, "id", (str,), line),
        owner=_need(rec, "owner", (str,), line),
        name=_need(rec, "name", (str,), line),
        param_types=_str_list(rec, "params", line),
        return_type=_need(rec, "ret", (str,), line),
        visibility=Visibility(vis),
        is_static=_need(rec, "static", (bool,), line),
        is_abstract=_need(rec, "abstract", (bool,), line),
        is_constructor=_need(rec, "ctor", (bool,), line),
        declared_throws=_str_list(rec, "throws", line),
        body_stmt_count=stmts,
        direct_throws=tuple(raises),
        is_external=bool(rec.get("ext", False)),
        src=str(rec.get("src", "")),
    )


def _field_from_record(rec: dict, line: int | None) -> FieldDecl:
    vis = _need(rec, "vis", (str,), line)
    if vis not in _VIS_VALUES:
        raise FactError(f"bad visibility {vis!r}", line)
    return FieldDecl(
        id=_need(rec, "id", (str,), line),
        owner=_need(rec, "owner", (str,), line),
        name=_need(rec, "name", (str,), line),
        declared_type=_need(rec, "type", (str,), line),
        visibility=Visibility(vis),
        src=str(rec.get("src", "")),
    )


def _call_from_record(rec: dict, line: int | None) -> CallSite:
    recv = _need(rec, "recv", (dict,), line)
    recv_kind = recv.get("kind")
    if recv_kind not in _RECV_VALUES:
        raise FactError(f"bad receiver kind {recv_kind!r}", line)
    receiver = Receiver(
        kind=ReceiverKind(recv_kind),
        field=recv.get("field"),
        index=recv.get("index"),
    )
    if receiver.kind is ReceiverKind.FIELD and not isinstance(receiver.field, str):
        raise FactError("field receiver without a field id", line)
    if receiver.kind is ReceiverKind.PARAM and not isinstance(receiver.index, int):
        raise FactError("param receiver without a parameter index", line)
    ord_ = _need(rec, "ord", (int,), line)
    passes = _need(rec, "pass", (list,), line)
    pairs: list[tuple[int, int]] = []
    for pair in passes:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)
        ):
            raise FactError(f"bad pass-through pair {pair!r}", line)
        pairs.append((pair[0], pair[1]))
    return CallSite(
        id=_need(rec, "id", (str,), line),
        caller=_need(rec, "caller", (str,), line),
        static_target=_need(rec, "target", (str,), line),
        receiver=receiver,
        ordinal=ord_,
        arg_passthrough=tuple(pairs),
        src=str(rec.get("src", "")),
    )


def _group(items, key) -> dict:
    grouped: dict[str, list] = {}
    for item in items:
        grouped.setdefault(key(item), []).append(item)
    return {k: tuple(v) for k, v in grouped.items()}


def _invert(ancestors: dict[str, frozenset[str]]) -> dict[str, frozenset[str]]:
    down: dict[str, set[str]] = {}
    for tid, ups in ancestors.items():
        for up in ups:
            down.setdefault(up, set()).add(tid)
    return {k: frozenset(v) for k, v in down.items()}
