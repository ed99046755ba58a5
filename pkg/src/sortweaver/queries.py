"""The six sort queries and seed expansion.

Each query evaluates one crosscutting-concern idiom over a
:class:`~sortweaver.model.SourceModel`:

CB   consistent behavior: call sites consistently invoking one method
RL   redirection layer: wrapper methods forwarding to a wrapped receiver
EC   expose context: pass-through parameter chains
RSI  role superimposition: types implementing a secondary role
SC   support classes: nested classes realizing a role for their encloser
EP   exception propagation: rethrow chains of one declared exception

Results are deduplicated, chains are maximal at both ends, and hit order is
deterministic: (source file of the primary entity, natural id order).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ._util import natural_key
from .mining import Seed
from .model import DispatchPolicy, FactError, ReceiverKind, SourceModel


class SortKind(str, Enum):
    CB = "CB"
    RL = "RL"
    EC = "EC"
    RSI = "RSI"
    SC = "SC"
    EP = "EP"


@dataclass(frozen=True)
class QueryBinding:
    """A sort query parameterized for one concrete concern.

    Params are stored by name (qualified type and method names), so a
    binding stays valid across re-extraction of the same sources.
    """

    sort: SortKind
    params: tuple[tuple[str, str], ...]

    @staticmethod
    def make(sort: SortKind | str, **params: str) -> "QueryBinding":
        items = tuple(sorted((k, v) for k, v in params.items() if v is not None))
        return QueryBinding(SortKind(sort), items)

    def param(self, key: str, default: str | None = None) -> str | None:
        for k, v in self.params:
            if k == key:
                return v
        return default

    def to_json(self) -> dict:
        return {"sort": self.sort.value, "params": dict(self.params)}


# -- hits ---------------------------------------------------------------------


@dataclass(frozen=True)
class Hit:
    """One query match; subclasses define the sort-specific payload."""

    def key(self, model: SourceModel) -> str:
        raise NotImplementedError

    def order_key(self, model: SourceModel):
        raise NotImplementedError

    def to_json(self, model: SourceModel) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class CbHit(Hit):
    call: str
    caller: str
    target: str
    ordinal: int

    def key(self, model):
        return f"{model.method_sig(self.caller)} -> {model.method_sig(self.target)} @{self.ordinal}"

    def order_key(self, model):
        return (model.entity_src(self.call), natural_key(self.call))

    def to_json(self, model):
        return {
            "call": self.call,
            "caller": model.method_sig(self.caller),
            "target": model.method_sig(self.target),
            "ordinal": self.ordinal,
        }


@dataclass(frozen=True)
class RlHit(Hit):
    redirector_method: str
    receiver_method: str
    call: str

    def key(self, model):
        return (
            f"{model.method_sig(self.redirector_method)} => "
            f"{model.method_sig(self.receiver_method)}"
        )

    def order_key(self, model):
        return (model.entity_src(self.call), natural_key(self.call))

    def to_json(self, model):
        return {
            "redirector_method": model.method_sig(self.redirector_method),
            "receiver_method": model.method_sig(self.receiver_method),
            "call": self.call,
        }


@dataclass(frozen=True)
class ChainHit(Hit):
    """A maximal chain of methods (used by EC and EP)."""

    methods: tuple[str, ...]
    calls: tuple[str, ...]  # linking call sites, len(methods) - 1
    param_indices: tuple[int, ...] = ()  # EC: context parameter per method
    root_raises: bool = False  # EP: chain ends at a direct thrower

    def key(self, model):
        return " -> ".join(model.method_sig(m) for m in self.methods)

    def order_key(self, model):
        head = self.methods[0]
        return (model.entity_src(head), tuple(natural_key(m) for m in self.methods))

    def to_json(self, model):
        out = {
            "methods": [model.method_sig(m) for m in self.methods],
            "calls": list(self.calls),
        }
        if self.param_indices:
            out["param_indices"] = list(self.param_indices)
        else:
            out["root_raises"] = self.root_raises
        return out


@dataclass(frozen=True)
class RsiHit(Hit):
    type_id: str
    member: str  # role type id for "declares_role", method id for "role_member"
    kind: str

    def key(self, model):
        if self.kind == "declares_role":
            return (
                f"{model.types[self.type_id].qualified_name} implements "
                f"{model.types[self.member].qualified_name}"
            )
        return f"{model.method_sig(self.member)} realizes role"

    def order_key(self, model):
        return (
            model.entity_src(self.type_id),
            natural_key(self.type_id),
            self.kind,
            natural_key(self.member),
        )

    def to_json(self, model):
        out = {"type": model.types[self.type_id].qualified_name, "kind": self.kind}
        if self.kind == "declares_role":
            out["role"] = model.types[self.member].qualified_name
        else:
            out["member"] = model.method_sig(self.member)
        return out


@dataclass(frozen=True)
class ScHit(Hit):
    enclosing: str
    nested: str

    def key(self, model):
        return (
            f"{model.types[self.enclosing].qualified_name} encloses "
            f"{model.types[self.nested].qualified_name}"
        )

    def order_key(self, model):
        return (model.entity_src(self.nested), natural_key(self.nested))

    def to_json(self, model):
        return {
            "enclosing": model.types[self.enclosing].qualified_name,
            "nested": model.types[self.nested].qualified_name,
        }


@dataclass(frozen=True)
class QueryResult:
    sort: SortKind
    binding: QueryBinding
    policy: DispatchPolicy
    hits: tuple[Hit, ...]

    def keys(self, model: SourceModel) -> tuple[str, ...]:
        return tuple(h.key(model) for h in self.hits)

    def to_json(self, model: SourceModel) -> dict:
        return {
            "sort": self.sort.value,
            "binding": self.binding.to_json(),
            "policy": self.policy.value,
            "hits": [h.to_json(model) for h in self.hits],
        }


def _result(model, sort, binding, hits, policy) -> QueryResult:
    unique = sorted(set(hits), key=lambda h: h.order_key(model))
    return QueryResult(sort, binding, policy, tuple(unique))


# -- scopes --------------------------------------------------------------------


def scope_type_ids(model: SourceModel, scope: str) -> frozenset[str] | None:
    """Type ids selected by a scope expression.

    ``*`` selects the whole model (returned as None); a type name selects
    the type's subtree under subtype-of*; a trailing-dot string selects
    types by qualified-name prefix.
    """
    if scope == "*" or scope == "":
        return None
    if scope.endswith("."):
        return frozenset(
            tid for tid, t in model.types.items() if t.qualified_name.startswith(scope)
        )
    scoped = model.type_by_name(scope)
    if scoped is None:
        raise FactError(f"unknown scope: {scope!r}")
    return model.subtree(scoped.id)


def _in_scope(model: SourceModel, owner: str, scope_ids: frozenset[str] | None) -> bool:
    return scope_ids is None or owner in scope_ids


# -- the six queries -------------------------------------------------------------


def query_cb(
    model: SourceModel,
    target: str,
    scope: str = "*",
    policy: DispatchPolicy | None = None,
) -> QueryResult:
    """Call sites whose lifted callee is ``target`` with callers in scope."""
    policy = model.policy if policy is None else DispatchPolicy(policy)
    target_decl = model.resolve_method(target)
    scope_ids = scope_type_ids(model, scope)
    binding = QueryBinding.make(SortKind.CB, target=model.method_sig(target_decl.id), scope=scope)
    hits = []
    for call in model.calls.values():
        if call.caller == target_decl.id:
            continue  # self-call
        if target_decl.id not in model.lifted_callees(call, policy):
            continue
        caller = model.methods[call.caller]
        if not _in_scope(model, caller.owner, scope_ids):
            continue
        hits.append(CbHit(call.id, call.caller, target_decl.id, call.ordinal))
    return _result(model, SortKind.CB, binding, hits, policy)


def query_rl(model: SourceModel, redirector: str, receiver: str) -> QueryResult:
    """(redirector method, receiver method, call) delegation triples."""
    red = model.require_type(redirector)
    rec = model.require_type(receiver)
    binding = QueryBinding.make(
        SortKind.RL, redirector=red.qualified_name, receiver=rec.qualified_name
    )
    hits = []
    for method in model.methods_of(red.id):
        if method.is_constructor:
            continue
        for call in model.calls_of(method.id):
            if call.receiver.kind is not ReceiverKind.FIELD:
                continue
            target = model.methods[call.static_target]
            if target.name != method.name or target.arity != method.arity:
                continue
            wrapped = model.fields[call.receiver.field]
            field_type = model.type_by_name(wrapped.declared_type)
            if field_type is None or not model.is_subtype(rec.id, field_type.id):
                continue
            hits.append(RlHit(method.id, call.static_target, call.id))
    return _result(model, SortKind.RL, binding, hits, model.policy)


def _canonical_edges(raw: dict[str, list]) -> dict[str, list]:
    """One edge per (node, neighbor) pair: the smallest linking call id wins."""
    out: dict[str, list] = {}
    for node, pairs in raw.items():
        best: dict[str, tuple] = {}
        for neighbor, edge in pairs:
            edge_id = edge[0] if isinstance(edge, tuple) else edge
            current = best.get(neighbor)
            current_id = current[0] if isinstance(current, tuple) else current
            if current is None or natural_key(edge_id) < natural_key(current_id):
                best[neighbor] = edge
        out[node] = [
            (neighbor, best[neighbor])
            for neighbor in sorted(best, key=natural_key)
        ]
    return out


def _maximal_chains(succ, pred, stop_at=None, min_len=2):
    """Maximal simple paths over an edge relation.

    ``succ``/``pred`` map node -> list of (neighbor, edge payload).  Stop
    nodes terminate chains (a stop tail is a valid end of any length, and a
    stop node never extends a chain leftward); otherwise a path is reported
    when it has at least ``min_len`` nodes, cannot grow right (no unvisited
    successor) and cannot grow left (no unvisited non-stop predecessor).
    """
    stop_at = stop_at or frozenset()
    succ = _canonical_edges(succ)
    pred = _canonical_edges(pred)
    chains = []

    def extend(path, edges, seen):
        tail = path[-1]
        nxt = [] if tail in stop_at else [
            (n, e) for n, e in succ.get(tail, ()) if n not in seen
        ]
        if nxt:
            for n, e in nxt:
                extend(path + [n], edges + [e], seen | {n})
            return
        if len(path) < min_len and tail not in stop_at:
            return
        head = path[0]
        grows_left = any(
            n not in seen and n not in stop_at for n, _ in pred.get(head, ())
        )
        if not grows_left:
            chains.append((tuple(path), tuple(edges)))

    for node in sorted(succ.keys() | pred.keys(), key=natural_key):
        extend([node], [], {node})
    return sorted(set(chains), key=lambda c: tuple(natural_key(m) for m in c[0]))


def query_ec(model: SourceModel, context_type: str, scope: str = "*") -> QueryResult:
    """Maximal pass-through chains of a context-typed parameter."""
    scope_ids = scope_type_ids(model, scope)
    binding = QueryBinding.make(SortKind.EC, context=context_type, scope=scope)

    def context_params(mid: str) -> list[int]:
        m = model.methods[mid]
        if not _in_scope(model, m.owner, scope_ids):
            return []
        return [i for i, p in enumerate(m.param_types) if p == context_type]

    succ: dict[str, list] = {}
    pred: dict[str, list] = {}
    for call in model.calls.values():
        src_params = context_params(call.caller)
        dst_params = context_params(call.static_target)
        if not src_params or not dst_params:
            continue
        for arg_index, param_index in call.arg_passthrough:
            if param_index in src_params and arg_index in dst_params:
                edge = (call.id, param_index, arg_index)
                succ.setdefault(call.caller, []).append((call.static_target, edge))
                pred.setdefault(call.static_target, []).append((call.caller, edge))
                break

    hits = []
    for path, edges in _maximal_chains(succ, pred, min_len=2):
        indices = [edges[0][1]] + [e[2] for e in edges]
        hits.append(
            ChainHit(
                methods=path,
                calls=tuple(e[0] for e in edges),
                param_indices=tuple(indices),
            )
        )
    return _result(model, SortKind.EC, binding, hits, model.policy)


def query_ep(model: SourceModel, exception: str, root: str | None = None) -> QueryResult:
    """Maximal rethrow chains of one declared exception type.

    Chain members declare the exception in their throws clause and call the
    next member; a chain ends at a method that throws the exception directly
    (its root), or at the deepest declarer for chains of two or more.  A
    method that neither throws directly nor reaches a thrower through calls
    of declarers can only appear mid-chain, never alone.
    """
    binding = QueryBinding.make(SortKind.EP, exception=exception, root=root)
    declarers = {
        mid for mid, m in model.methods.items() if exception in m.declared_throws
    }
    raisers = frozenset(
        mid for mid in declarers if exception in model.methods[mid].direct_throws
    )
    succ: dict[str, list] = {}
    pred: dict[str, list] = {}
    for call in model.calls.values():
        if call.caller in declarers and call.static_target in declarers \
                and call.caller != call.static_target:
            succ.setdefault(call.caller, []).append((call.static_target, call.id))
            pred.setdefault(call.static_target, []).append((call.caller, call.id))
    for mid in raisers:
        succ.setdefault(mid, [])

    hits = []
    for path, edges in _maximal_chains(succ, pred, stop_at=raisers, min_len=2):
        hits.append(ChainHit(methods=path, calls=edges, root_raises=path[-1] in raisers))
    if root is not None:
        root_decl = model.resolve_method(root)
        hits = [h for h in hits if root_decl.id in h.methods]
    return _result(model, SortKind.EP, binding, hits, model.policy)


def query_rsi(model: SourceModel, role: str, scope: str = "*") -> QueryResult:
    """Types carrying a secondary role, and their role-realizing members."""
    role_decl = model.require_type(role)
    scope_ids = scope_type_ids(model, scope)
    binding = QueryBinding.make(SortKind.RSI, role=role_decl.qualified_name, scope=scope)
    hits = []
    for tid in model.types:
        if tid == role_decl.id or not _in_scope(model, tid, scope_ids):
            continue
        if role_decl.id not in model.ancestors(tid):
            continue
        hits.append(RsiHit(tid, role_decl.id, "declares_role"))
        for method in model.methods_of(tid):
            overridden = model.overrides_all(method.id)
            if any(model.methods[m].owner == role_decl.id for m in overridden):
                hits.append(RsiHit(tid, method.id, "role_member"))
    return _result(model, SortKind.RSI, binding, hits, model.policy)


def query_sc(model: SourceModel, scope: str = "*", role: str | None = None) -> QueryResult:
    """(enclosing, nested) pairs, optionally filtered by the nested role."""
    scope_ids = scope_type_ids(model, scope)
    role_decl = model.require_type(role) if role else None
    binding = QueryBinding.make(
        SortKind.SC, scope=scope, role=role_decl.qualified_name if role_decl else None
    )
    hits = []
    for tid, t in model.types.items():
        if t.enclosing_type is None:
            continue
        if not _in_scope(model, t.enclosing_type, scope_ids):
            continue
        if role_decl is not None and role_decl.id not in model.ancestors(tid):
            continue
        hits.append(ScHit(t.enclosing_type, tid))
    return _result(model, SortKind.SC, binding, hits, model.policy)


# -- binding execution ------------------------------------------------------------


def execute_binding(model: SourceModel, binding: QueryBinding) -> QueryResult:
    """Run the query a binding describes; raises FactError on bad parameters."""
    sort = binding.sort
    if sort is SortKind.CB:
        return query_cb(model, binding.param("target"), binding.param("scope", "*"))
    if sort is SortKind.RL:
        return query_rl(model, binding.param("redirector"), binding.param("receiver"))
    if sort is SortKind.EC:
        return query_ec(model, binding.param("context"), binding.param("scope", "*"))
    if sort is SortKind.RSI:
        return query_rsi(model, binding.param("role"), binding.param("scope", "*"))
    if sort is SortKind.SC:
        return query_sc(model, binding.param("scope", "*"), binding.param("role"))
    if sort is SortKind.EP:
        return query_ep(model, binding.param("exception"), binding.param("root"))
    raise FactError(f"unknown sort: {sort!r}")


# -- seed expansion -----------------------------------------------------------------


@dataclass(frozen=True)
class BindingSuggestion:
    binding: QueryBinding
    coverage: float
    covered: int
    total: int

    def to_json(self) -> dict:
        return {
            "binding": self.binding.to_json(),
            "coverage": round(self.coverage, 6),
            "covered": self.covered,
            "total": self.total,
        }


def expand_seed(
    model: SourceModel, seed: Seed, min_coverage: float = 0.5
) -> list[BindingSuggestion]:
    """Propose query bindings that turn a mining seed into a documented concern.

    Fan-in seeds: candidate scopes are the minimal common ancestors covering
    at least ``min_coverage`` of the callers (each reported with coverage),
    plus the whole-model scope.  Redirector seeds map onto an RL binding;
    grouped seeds yield one CB binding per callee in the group.
    """
    if seed.technique == "fanin":
        return _expand_fanin(model, seed, min_coverage)
    if seed.technique == "redirect":
        binding = QueryBinding.make(
            SortKind.RL,
            redirector=seed.evidence["redirector_name"],
            receiver=seed.evidence["receiver_type_name"],
        )
        return [BindingSuggestion(binding, 1.0, len(seed.evidence["pairs"]),
                                  len(seed.evidence["pairs"]))]
    if seed.technique == "grouped":
        scope = seed.evidence["ancestor_name"]
        callers = len(seed.evidence["callers"])
        return [
            BindingSuggestion(
                QueryBinding.make(SortKind.CB, target=model.method_sig(callee), scope=scope),
                1.0,
                callers,
                callers,
            )
            for callee in seed.evidence["group"]
        ]
    raise FactError(f"cannot expand seeds of technique {seed.technique!r}")


def _expand_fanin(model, seed, min_coverage):
    target = seed.evidence["method"]
    callers = list(seed.evidence["callers"])
    total = len(callers)
    covered_by: dict[str, frozenset[str]] = {}
    for tid in model.types:
        subtree = model.subtree(tid)
        covered = frozenset(c for c in callers if model.methods[c].owner in subtree)
        if covered and len(covered) / total >= min_coverage:
            covered_by[tid] = covered
    # Drop an ancestor when a proper subtype covers the same caller set.
    keep = {}
    for tid, covered in covered_by.items():
        redundant = any(
            other != tid and model.is_subtype(other, tid) and covered_by[other] == covered
            for other in covered_by
        )
        if not redundant:
            keep[tid] = covered
    suggestions = [
        BindingSuggestion(
            QueryBinding.make(
                SortKind.CB,
                target=model.method_sig(target),
                scope=model.types[tid].qualified_name,
            ),
            len(covered) / total,
            len(covered),
            total,
        )
        for tid, covered in keep.items()
    ]
    suggestions.append(
        BindingSuggestion(
            QueryBinding.make(SortKind.CB, target=model.method_sig(target), scope="*"),
            1.0,
            total,
            total,
        )
    )
    suggestions.sort(key=lambda s: (-s.coverage, s.binding.param("scope")))
    return suggestions
