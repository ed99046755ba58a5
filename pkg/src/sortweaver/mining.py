"""Idiom-driven mining of crosscutting-concern seeds.

Three techniques over a :class:`~sortweaver.model.SourceModel`:

* fan-in analysis: methods invoked by many distinct callers,
* grouped-calls analysis: maximal callee sets shared by enough callers that
  sit in one hierarchy,
* redirection-layer detection: types whose methods consistently forward to
  same-named methods of one wrapped field.

Each result is a scored :class:`Seed` carrying technique-specific evidence;
all output orders are deterministic for a given (model, config, policy).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fnmatch import fnmatchcase

from ._util import natural_key
from .model import DispatchPolicy, MethodDecl, ReceiverKind, SourceModel

_ACCESSOR_NAME = re.compile(r"^(get|set|is)([A-Z_].*)?$")


@dataclass(frozen=True)
class MiningConfig:
    fanin_threshold: int = 10
    accessor_filter: bool = True
    utility_names: tuple[str, ...] = ()
    grouped_min_callers: int = 3
    grouped_min_group: int = 2
    redirect_coverage: float = 0.5
    redirect_min_methods: int = 2

    def __post_init__(self):
        if self.fanin_threshold < 1 or self.grouped_min_callers < 1 \
                or self.grouped_min_group < 1 or self.redirect_min_methods < 1:
            raise ValueError("mining thresholds must be >= 1")
        if not 0 < self.redirect_coverage <= 1:
            raise ValueError("redirect_coverage must be in (0, 1]")


@dataclass(frozen=True)
class Seed:
    """A scored set of program elements suspected to form one concern."""

    sort_hint: str  # CB | RL | EC | RSI | SC | EP
    elements: frozenset[str]
    score: float
    evidence: dict
    technique: str
    policy: DispatchPolicy

    def to_json(self) -> dict:
        return {
            "sort_hint": self.sort_hint,
            "technique": self.technique,
            "policy": self.policy.value,
            "score": self.score,
            "elements": sorted(self.elements, key=natural_key),
            "evidence": self.evidence,
        }


def is_accessor(method: MethodDecl) -> bool:
    """Name looks like get*/set*/is* and the body is at most one statement."""
    return bool(_ACCESSOR_NAME.match(method.name)) and method.body_stmt_count <= 1


def matches_utility(model: SourceModel, method: MethodDecl, patterns: tuple[str, ...]) -> bool:
    qualified = f"{model.types[method.owner].qualified_name}.{method.name}"
    return any(
        fnmatchcase(method.name, pat) or fnmatchcase(qualified, pat) for pat in patterns
    )


def _kept(model: SourceModel, method: MethodDecl, config: MiningConfig) -> bool:
    if config.accessor_filter and is_accessor(method):
        return False
    return not matches_utility(model, method, config.utility_names)


def fan_in(model: SourceModel, method_id: str, policy: DispatchPolicy | None = None) -> int:
    """Distinct callers contributing a lifted call to the method."""
    return len(model.callers_of(method_id, policy))


def fan_in_analysis(
    model: SourceModel,
    config: MiningConfig = MiningConfig(),
    policy: DispatchPolicy | None = None,
) -> list[Seed]:
    """One CB-hinted seed per method whose filtered fan-in meets the threshold.

    Sorted by fan-in descending, ties by qualified method name ascending.
    """
    policy = model.policy if policy is None else DispatchPolicy(policy)
    seeds = []
    for mid in model.methods:
        method = model.methods[mid]
        if not _kept(model, method, config):
            continue
        callers = model.callers_of(mid, policy)
        if len(callers) < config.fanin_threshold:
            continue
        seeds.append(
            Seed(
                sort_hint="CB",
                elements=frozenset(callers) | {mid},
                score=len(callers),
                evidence={
                    "method": mid,
                    "method_sig": model.method_sig(mid),
                    "fan_in": len(callers),
                    "callers": sorted(callers, key=natural_key),
                },
                technique="fanin",
                policy=policy,
            )
        )
    seeds.sort(key=lambda s: (-s.score, s.evidence["method_sig"]))
    return seeds


def grouped_calls_analysis(
    model: SourceModel,
    config: MiningConfig = MiningConfig(),
    policy: DispatchPolicy | None = None,
) -> list[Seed]:
    """Maximal shared-callee groups whose supporting callers share an ancestor.

    Each caller is a transaction of its distinct lifted callees (accessor and
    utility filters applied).  A group G is reported when |G| >= min_group,
    its supporter set S has |S| >= min_callers, S sits under one common
    ancestor type, and no superset of G has the same supporters.
    """
    policy = model.policy if policy is None else DispatchPolicy(policy)
    transactions: dict[str, frozenset[str]] = {}
    for caller, callee in sorted(model.lifted_edges(policy)):
        if caller == callee:
            continue
        if not _kept(model, model.methods[callee], config):
            continue
        transactions.setdefault(caller, frozenset())
        transactions[caller] |= {callee}

    # Closed callee sets are exactly the intersections of transaction subsets.
    closed: set[frozenset[str]] = set(transactions.values())
    worklist = list(closed)
    while worklist:
        current = worklist.pop()
        for other in list(closed):
            meet = current & other
            if len(meet) >= config.grouped_min_group and meet not in closed:
                closed.add(meet)
                worklist.append(meet)

    seeds = []
    for group in closed:
        if len(group) < config.grouped_min_group:
            continue
        supporters = frozenset(
            caller for caller, callees in transactions.items() if group <= callees
        )
        if len(supporters) < config.grouped_min_callers:
            continue
        meet = frozenset.intersection(*(transactions[c] for c in supporters))
        if meet != group:
            continue  # a superset has the same supporters
        ancestor = common_ancestor(model, supporters)
        if ancestor is None:
            continue
        seeds.append(
            Seed(
                sort_hint="CB",
                elements=group | supporters,
                score=len(supporters),
                evidence={
                    "group": sorted(group, key=natural_key),
                    "group_sigs": sorted(model.method_sig(m) for m in group),
                    "callers": sorted(supporters, key=natural_key),
                    "ancestor": ancestor,
                    "ancestor_name": model.types[ancestor].qualified_name,
                    # this technique is a concretization: closed shared-callee
                    # sets with a hierarchy-coherence constraint on callers
                    "definition": "closed-itemset grouped calls",
                },
                technique="grouped",
                policy=policy,
            )
        )
    seeds.sort(key=lambda s: (-s.score, s.evidence["group_sigs"]))
    return seeds


def common_ancestor(model: SourceModel, method_ids: frozenset[str]) -> str | None:
    """Most specific type whose subtree contains every method's owner."""
    owners = [model.methods[mid].owner for mid in method_ids]
    shared = None
    for owner in owners:
        ups = model.ancestors(owner)
        shared = ups if shared is None else shared & ups
    if not shared:
        return None
    return min(shared, key=lambda tid: (len(model.subtree(tid)),
                                        model.types[tid].qualified_name))


def find_redirectors(model: SourceModel, config: MiningConfig = MiningConfig()) -> list[Seed]:
    """Types that forward enough of their methods to one wrapped field.

    A method redirects when its body calls a same-named, same-arity method
    through a field receiver; the field must be the same across the type's
    redirecting methods ("pair methods in receiver").
    """
    seeds = []
    for tid, type_decl in model.types.items():
        candidates = [m for m in model.methods_of(tid) if not m.is_constructor]
        if not candidates:
            continue
        by_field: dict[str, list[tuple[str, str, str]]] = {}
        for method in candidates:
            for call in model.calls_of(method.id):
                if call.receiver.kind is not ReceiverKind.FIELD:
                    continue
                target = model.methods[call.static_target]
                if target.name != method.name or target.arity != method.arity:
                    continue
                by_field.setdefault(call.receiver.field, []).append(
                    (method.id, call.static_target, call.id)
                )
        if not by_field:
            continue
        field_id = max(
            by_field,
            key=lambda f: (len({m for m, _, _ in by_field[f]}), natural_key(f)),
        )
        pairs = sorted(set(by_field[field_id]), key=lambda p: natural_key(p[2]))
        redirecting = {m for m, _, _ in pairs}
        coverage = len(redirecting) / len(candidates)
        if len(redirecting) < config.redirect_min_methods:
            continue
        if coverage < config.redirect_coverage:
            continue
        wrapped = model.fields[field_id]
        receiver_type = model.type_by_name(wrapped.declared_type)
        seeds.append(
            Seed(
                sort_hint="RL",
                elements=frozenset({tid, field_id})
                | redirecting
                | {t for _, t, _ in pairs},
                score=coverage,
                evidence={
                    "redirector": tid,
                    "redirector_name": type_decl.qualified_name,
                    "field": field_id,
                    "receiver_type": receiver_type.id if receiver_type else None,
                    "receiver_type_name": wrapped.declared_type,
                    "pairs": [list(p) for p in pairs],
                    "coverage": coverage,
                },
                technique="redirect",
                policy=model.policy,
            )
        )
    seeds.sort(key=lambda s: (-s.score, s.evidence["redirector_name"]))
    return seeds
