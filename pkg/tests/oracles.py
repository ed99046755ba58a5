"""Brute-force relational oracles for the sort queries and mining.

Everything here is computed with nested loops straight over the entity
tables (decl fields only), independently of the library's derived
relations, so test comparisons are meaningful.  Chain enumeration recurses
over explicitly constructed edge sets and re-states the maximality rules in
the simplest possible form.
"""

from __future__ import annotations

import re
from itertools import combinations

from sortweaver.model import ReceiverKind, SourceModel

_KEYWORDS = {"if", "catch", "while", "for", "return", "throw", "new", "else", "try"}


def invocation_count(text: str) -> int:
    """Count method invocations with a text scan, independent of the parser.

    Strips comments and strings, then classifies every ``name(`` site by
    what precedes it: a dot or an expression boundary means an invocation, a
    type name means a declaration.  ``new Name(`` counts only when the file
    declares a constructor for ``Name``.
    """
    text = re.sub(r"//[^\n]*", " ", text)
    text = re.sub(r"/\*.*?\*/", " ", text, flags=re.S)
    text = re.sub(r'"[^"\n]*"', '""', text)
    ctor_names = set(re.findall(r"(?:public|protected|private)\s+(\w+)\s*\(", text))
    class_names = set(re.findall(r"class\s+(\w+)", text))
    ctor_names &= class_names
    count = 0
    for match in re.finditer(r"\b([A-Za-z_]\w*)\s*\(", text):
        name = match.group(1)
        if name in _KEYWORDS:
            continue
        before = text[: match.start()].rstrip()
        if before.endswith("."):
            count += 1
            continue
        prev_word = re.search(r"(\w+)$", before)
        if prev_word and prev_word.group(1) == "new":
            count += 1 if name in ctor_names else 0
            continue
        if prev_word and prev_word.group(1) in ("return", "throw"):
            count += 1
            continue
        if not before or before[-1] in ";{}=(,!":
            count += 1
            continue
        # otherwise a declaration: "void f(" / "Type name("
    return count


def subtype_pairs(model: SourceModel) -> set[tuple[str, str]]:
    """Reflexive-transitive (subtype, supertype) pairs by fixpoint iteration."""
    pairs = {(tid, tid) for tid in model.types}
    for tid, decl in model.types.items():
        for sup in decl.supertypes:
            pairs.add((tid, sup))
    changed = True
    while changed:
        changed = False
        for a, b in list(pairs):
            for c, d in list(pairs):
                if b == c and (a, d) not in pairs:
                    pairs.add((a, d))
                    changed = True
    return pairs


def overrides_full(model: SourceModel) -> set[tuple[str, str]]:
    pairs = subtype_pairs(model)
    out = set()
    for m1, d1 in model.methods.items():
        for m2, d2 in model.methods.items():
            if m1 == m2 or d1.owner == d2.owner:
                continue
            if (d1.owner, d2.owner) not in pairs:
                continue
            if d1.name == d2.name and d1.param_types == d2.param_types:
                out.add((m1, m2))
    return out


def overrides_direct(model: SourceModel) -> set[tuple[str, str]]:
    full = overrides_full(model)
    return {
        (a, b)
        for a, b in full
        if not any((a, mid) in full and (mid, b) in full for mid in model.methods)
    }


def lifted(model: SourceModel, policy) -> set[tuple[str, str]]:
    full = overrides_full(model)
    edges = set()
    for call in model.calls.values():
        edges.add((call.caller, call.static_target))
        if policy in ("lift_to_ancestors", "lift_both"):
            for a, b in full:
                if a == call.static_target:
                    edges.add((call.caller, b))
        if policy == "lift_both":
            for a, b in full:
                if b == call.static_target:
                    edges.add((call.caller, a))
    return edges


def fan_in(model: SourceModel, method_id: str, policy) -> int:
    return len(
        {c for c, t in lifted(model, policy) if t == method_id and c != method_id}
    )


def scope_ids(model: SourceModel, scope: str) -> set[str] | None:
    if scope in ("*", ""):
        return None
    if scope.endswith("."):
        return {t for t, d in model.types.items() if d.qualified_name.startswith(scope)}
    pairs = subtype_pairs(model)
    anchor = None
    for tid, decl in model.types.items():
        if decl.qualified_name == scope or tid == scope:
            anchor = tid
            break
    if anchor is None:
        hits = [t for t, d in model.types.items()
                if d.qualified_name.rsplit(".", 1)[-1] == scope]
        anchor = hits[0] if len(hits) == 1 else None
    if anchor is None:
        raise ValueError(f"oracle: unknown scope {scope!r}")
    return {a for a, b in pairs if b == anchor}


def cb_hits(model: SourceModel, target_id: str, scope: str, policy) -> set[str]:
    ids = scope_ids(model, scope)
    full = overrides_full(model)
    out = set()
    for call in model.calls.values():
        if call.caller == target_id:
            continue
        callees = {call.static_target}
        if policy in ("lift_to_ancestors", "lift_both"):
            callees |= {b for a, b in full if a == call.static_target}
        if policy == "lift_both":
            callees |= {a for a, b in full if b == call.static_target}
        if target_id not in callees:
            continue
        owner = model.methods[call.caller].owner
        if ids is None or owner in ids:
            out.add(call.id)
    return out


def rl_triples(model: SourceModel, red_id: str, rec_id: str) -> set[tuple[str, str, str]]:
    pairs = subtype_pairs(model)
    out = set()
    for method in model.methods.values():
        if method.owner != red_id or method.is_constructor:
            continue
        for call in model.calls.values():
            if call.caller != method.id:
                continue
            if call.receiver.kind is not ReceiverKind.FIELD:
                continue
            target = model.methods[call.static_target]
            if target.name != method.name or len(target.param_types) != len(method.param_types):
                continue
            field_decl = model.fields[call.receiver.field]
            field_type = None
            for tid, decl in model.types.items():
                if decl.qualified_name == field_decl.declared_type:
                    field_type = tid
                    break
            if field_type is None:
                named = [
                    tid for tid, decl in model.types.items()
                    if decl.qualified_name.rsplit(".", 1)[-1] == field_decl.declared_type
                ]
                field_type = named[0] if len(named) == 1 else None
            if field_type is None:
                continue
            if (rec_id, field_type) in pairs:
                out.add((method.id, call.static_target, call.id))
    return out


def _all_chains(nodes, edges, stop_at=frozenset(), min_len=2):
    """Maximal simple paths, restated: extend right until a stop node or no
    fresh successor, then keep paths long enough whose head has no fresh
    non-stop predecessor."""
    succs = {n: sorted({b for a, b in edges if a == n}) for n in nodes}
    preds = {n: sorted({a for a, b in edges if b == n}) for n in nodes}
    found = set()

    def walk(path):
        tail = path[-1]
        fresh = [] if tail in stop_at else [s for s in succs[tail] if s not in path]
        if fresh:
            for nxt in fresh:
                walk(path + [nxt])
            return
        if len(path) < min_len and tail not in stop_at:
            return
        if any(p not in path and p not in stop_at for p in preds[path[0]]):
            return
        found.add(tuple(path))

    for node in nodes:
        walk([node])
    return found


def ec_chains(model: SourceModel, context: str, scope: str) -> set[tuple[str, ...]]:
    ids = scope_ids(model, scope)

    def ctx_params(mid):
        decl = model.methods[mid]
        if ids is not None and decl.owner not in ids:
            return []
        return [i for i, p in enumerate(decl.param_types) if p == context]

    nodes = {mid for mid in model.methods if ctx_params(mid)}
    edges = set()
    for call in model.calls.values():
        if call.caller in nodes and call.static_target in nodes \
                and call.caller != call.static_target:
            for arg_index, param_index in call.arg_passthrough:
                if param_index in ctx_params(call.caller) \
                        and arg_index in ctx_params(call.static_target):
                    edges.add((call.caller, call.static_target))
    return _all_chains(nodes, edges, min_len=2)


def ep_chains(model: SourceModel, exception: str) -> set[tuple[str, ...]]:
    nodes = {
        mid for mid, decl in model.methods.items() if exception in decl.declared_throws
    }
    raisers = frozenset(
        mid for mid in nodes if exception in model.methods[mid].direct_throws
    )
    edges = set()
    for call in model.calls.values():
        if call.caller in nodes and call.static_target in nodes \
                and call.caller != call.static_target:
            edges.add((call.caller, call.static_target))
    return _all_chains(nodes, edges, stop_at=raisers, min_len=2)


def rsi_hits(model: SourceModel, role_id: str, scope: str) -> set[tuple[str, str, str]]:
    ids = scope_ids(model, scope)
    pairs = subtype_pairs(model)
    full = overrides_full(model)
    out = set()
    for tid in model.types:
        if tid == role_id or (ids is not None and tid not in ids):
            continue
        if (tid, role_id) not in pairs:
            continue
        out.add((tid, role_id, "declares_role"))
        for method in model.methods.values():
            if method.owner != tid:
                continue
            for a, b in full:
                if a == method.id and model.methods[b].owner == role_id:
                    out.add((tid, method.id, "role_member"))
    return out


def sc_hits(model: SourceModel, scope: str, role_id: str | None) -> set[tuple[str, str]]:
    ids = scope_ids(model, scope)
    pairs = subtype_pairs(model)
    out = set()
    for tid, decl in model.types.items():
        if decl.enclosing_type is None:
            continue
        if ids is not None and decl.enclosing_type not in ids:
            continue
        if role_id is not None and (tid, role_id) not in pairs:
            continue
        out.add((decl.enclosing_type, tid))
    return out


def grouped(model: SourceModel, config, policy) -> set[tuple[frozenset, frozenset]]:
    """Exponential enumeration of every callee subset; desk scale only."""
    from sortweaver.mining import is_accessor, matches_utility

    edges = lifted(model, policy)
    transactions: dict[str, set[str]] = {}
    for caller, callee in edges:
        if caller == callee:
            continue
        decl = model.methods[callee]
        if config.accessor_filter and is_accessor(decl):
            continue
        if matches_utility(model, decl, config.utility_names):
            continue
        transactions.setdefault(caller, set()).add(callee)

    pairs = subtype_pairs(model)
    universe = sorted({c for t in transactions.values() for c in t})
    out = set()
    for size in range(config.grouped_min_group, len(universe) + 1):
        for combo in combinations(universe, size):
            group = frozenset(combo)
            supporters = frozenset(
                caller for caller, callees in transactions.items() if group <= callees
            )
            if len(supporters) < config.grouped_min_callers:
                continue
            bigger = any(
                frozenset(
                    caller
                    for caller, callees in transactions.items()
                    if (group | {extra}) <= callees
                )
                == supporters
                for extra in universe
                if extra not in group
            )
            if bigger:
                continue
            owners = {model.methods[mid].owner for mid in supporters}
            shared = [
                tid
                for tid in model.types
                if all((owner, tid) in pairs for owner in owners)
            ]
            if not shared:
                continue
            out.add((group, supporters))
    return out
