"""Sort-specific refactoring plans: aspect text, source edits, risk warnings.

Each ``plan_*`` function turns one query result into a
:class:`RefactoringPlan`: a renderable aspect document, a machine-readable
edit list against the fact model, and every triggered warning from the risk
catalog.  Edits are not applied to source text; ``apply_edits`` replays the
deletion edits on the fact model so closure properties can be checked
(a consistent-behavior plan drives its originating query to empty).
"""

from __future__ import annotations

from dataclasses import dataclass

from .._util import lower_first, natural_key, upper_first
from ..model import ReceiverKind, SourceModel, Visibility, load_records
from ..queries import CbHit, ChainHit, QueryResult, RsiHit, ScHit, SortKind
from .aspect_text import (
    Advice,
    AndExpr,
    Args,
    AspectDoc,
    CallPattern,
    Cflow,
    CommentStanza,
    DeclareParents,
    DeclareSoft,
    Execution,
    IntroMethod,
    MovedClass,
    NotExpr,
    OrExpr,
    PointcutDef,
    PointcutRef,
    ThisBinding,
    Within,
    render_doc,
)


class PlanError(ValueError):
    pass


#: Stable risk catalog: code -> (severity, message).
WARNING_CATALOG: dict[str, tuple[str, str]] = {
    "ANON_CALLERS": (
        "caution",
        "anonymous classes cannot be referred to consistently; the generic "
        "pointcut excludes their enclosing context",
    ),
    "TANGLED": (
        "caution",
        "matched calls sit mid-body; a high degree of tangling may prevent "
        "automatic refactoring",
    ),
    "SUPER_CALL": (
        "caution",
        "calls to superclass functionality cannot be migrated into advice; "
        "the advice body must inline the behavior",
    ),
    "ENCAPSULATION": (
        "caution",
        "the advice needs access to non-public members; requires a privileged "
        "aspect or weaker encapsulation",
    ),
    "OMISSION_CHECK": (
        "info",
        "methods matched by the pointcut never perform the action; check that "
        "the omissions are not on purpose",
    ),
    "REDIR_EXTRA_ROLES": (
        "caution",
        "the redirector implements members beyond the delegated pairs; "
        "replacing it drops those roles",
    ),
    "REDIR_CLIENTS": (
        "caution",
        "the receiver is also called directly; advised calls must be filtered "
        "to those previously routed through the redirector",
    ),
    "REDIR_NEW_METHODS": (
        "info",
        "receiver methods without a redirecting pair; new receiver methods "
        "are not covered by the aspect automatically",
    ),
    "VISIBILITY_CHANGE": (
        "caution",
        "a non-public role member cannot be introduced with its original "
        "visibility; it is introduced as public",
    ),
    "INTRO_CONFLICT": (
        "blocker",
        "a role member also overrides a non-role member; introducing it from "
        "the aspect would clash",
    ),
    "SC_NOT_INTRODUCIBLE": (
        "caution",
        "nested classes cannot be introduced; the support class is moved "
        "into the aspect, weakening its tie to the enclosing class",
    ),
    "SC_BROKEN_DEPS": (
        "caution",
        "the moved support class uses private members of its enclosing "
        "class; the enclosing interface must widen",
    ),
    "EP_TYPE_LOST": (
        "caution",
        "softening loses the declared exception type; top-of-chain handlers "
        "must unwrap the soft exception",
    ),
    "EP_OVERRIDES": (
        "caution",
        "override-related methods declare the same exception outside the "
        "chain; their throws clauses need refactoring too",
    ),
    "PRECEDENCE": (
        "info",
        "plans advise overlapping join points; advice precedence is "
        "unspecified and may interfere",
    ),
}

EDIT_KINDS = (
    "delete_call_site",
    "delete_throws_clause",
    "move_member_to_aspect",
    "move_nested_class_to_aspect",
    "replace_type_removal",
    "remove_param",
)


@dataclass(frozen=True)
class RiskWarning:
    code: str
    severity: str
    message: str
    evidence: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "message": self.message,
            "evidence": list(self.evidence),
        }


def warn(code: str, evidence=()) -> RiskWarning:
    severity, message = WARNING_CATALOG[code]
    return RiskWarning(code, severity, message, tuple(sorted(evidence, key=natural_key)))


@dataclass(frozen=True)
class SourceEdit:
    kind: str
    target: str
    description: str
    detail: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise PlanError(f"unknown edit kind {self.kind!r}")

    def detail_value(self, key: str) -> str | None:
        for k, v in self.detail:
            if k == key:
                return v
        return None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "description": self.description,
            "detail": dict(self.detail),
        }


@dataclass(frozen=True)
class AspectTemplate:
    """Per-sort template slots; rendering demands every slot be filled."""

    sort: str
    slots: tuple[tuple[str, str | None], ...]

    def unfilled(self) -> list[str]:
        return [name for name, value in self.slots if value is None]


@dataclass(frozen=True)
class RefactoringPlan:
    instance_path: str
    aspect_name: str
    sort: str
    template: AspectTemplate | None
    doc: AspectDoc
    edits: tuple[SourceEdit, ...]
    warnings: tuple[RiskWarning, ...]
    notes: tuple[str, ...] = ()
    advised_methods: frozenset[str] = frozenset()

    @property
    def aspect_text(self) -> str:
        return render_aspect(self)

    def to_json(self) -> dict:
        return {
            "instance_path": self.instance_path,
            "aspect_name": self.aspect_name,
            "sort": self.sort,
            "aspect_text": self.aspect_text,
            "edits": [e.to_json() for e in self.edits],
            "warnings": [w.to_json() for w in self.warnings],
            "notes": list(self.notes),
        }


def render_aspect(plan: RefactoringPlan) -> str:
    """Deterministic aspect text; refuses to render with unfilled slots."""
    if plan.template is not None:
        missing = plan.template.unfilled()
        if missing:
            raise PlanError(f"unfilled template slots: {', '.join(missing)}")
    return render_doc(plan.doc)


def _sorted_warnings(warnings) -> tuple[RiskWarning, ...]:
    return tuple(sorted(set(warnings), key=lambda w: w.code))


# -- consistent behavior ---------------------------------------------------------


def plan_cb(
    model: SourceModel,
    result: QueryResult,
    *,
    advice: str | None = None,
    enumerate_callers: bool = False,
    aspect_name: str | None = None,
    instance_path: str = "",
) -> RefactoringPlan:
    """Pointcut-and-advice plan for a consistent-behavior result.

    The advice kind is proposed from hit positions (all first -> before,
    all last -> after, otherwise around) and can be overridden.  The default
    pointcut is generic over the scope type with subtree ``+`` and
    ``!within`` exclusions for anonymous callers; ``enumerate_callers``
    switches to one execution term per caller.
    """
    hits = [h for h in result.hits if isinstance(h, CbHit)]
    if not hits:
        raise PlanError("cannot plan an empty consistent-behavior result")
    target = model.methods[hits[0].target]
    target_sig = model.method_sig(target.id)
    scope_name = result.binding.param("scope", "*")
    callers = sorted({h.caller for h in hits}, key=natural_key)
    named = [c for c in callers if not model.types[model.methods[c].owner].is_anonymous]
    anonymous = [c for c in callers if model.types[model.methods[c].owner].is_anonymous]

    warnings: list[RiskWarning] = []
    notes: list[str] = []

    proposed = _advice_kind(model, hits)
    if proposed == "around":
        tangled = [h.call for h in hits if not _first_or_last(model, h)]
        warnings.append(warn("TANGLED", tangled or [h.call for h in hits]))
    kind = advice or (result.binding.param("advice") or proposed)
    if kind not in ("before", "after", "around"):
        raise PlanError(f"unknown advice kind {kind!r}")

    if any(model.calls[h.call].receiver.kind is ReceiverKind.SUPER for h in hits):
        warnings.append(
            warn("SUPER_CALL", [h.call for h in hits
                                if model.calls[h.call].receiver.kind is ReceiverKind.SUPER])
        )
    encapsulation = []
    if target.visibility is not Visibility.PUBLIC:
        encapsulation.append(target.id)
    for h in hits:
        recv = model.calls[h.call].receiver
        if recv.kind is ReceiverKind.FIELD \
                and model.fields[recv.field].visibility is Visibility.PRIVATE:
            encapsulation.append(recv.field)
    if encapsulation:
        warnings.append(warn("ENCAPSULATION", encapsulation))
    if anonymous:
        warnings.append(warn("ANON_CALLERS", anonymous))

    scope_type = None
    if scope_name not in ("", "*") and not scope_name.endswith("."):
        scope_type = model.type_by_name(scope_name)

    shared = _shared_signature(model, callers)
    advised: set[str] = set(named)

    if enumerate_callers or scope_type is None or shared is None:
        if not enumerate_callers:
            notes.append(
                "callers do not share a scope type and signature; "
                "emitted an enumerated pointcut"
            )
        if anonymous:
            notes.append("anonymous callers cannot be enumerated and are left out")
        pointcut_name = f"{target.name}Callers"
        terms = tuple(
            Execution(
                model.methods[c].return_type,
                model.types[model.methods[c].owner].qualified_name,
                model.methods[c].name,
                ",".join(model.methods[c].param_types),
            )
            for c in named
        )
        if not terms:
            raise PlanError("no named callers to enumerate")
        pointcut = PointcutDef(pointcut_name, (), terms[0] if len(terms) == 1 else OrExpr(terms))
        advice_params: tuple[tuple[str, str], ...] = ()
        ref = PointcutRef(pointcut_name, ())
    else:
        name, params, ret = shared
        var = lower_first(scope_type.simple_name)
        pointcut_name = f"{name}{upper_first(scope_type.simple_name)}"
        subtypes = any(model.methods[c].owner != scope_type.id for c in callers)
        terms = [
            ThisBinding(var),
            Execution(ret, scope_type.qualified_name, name, ",".join(params), subtypes),
        ]
        for encl in sorted({
            model.types[model.types[model.methods[c].owner].enclosing_type].simple_name
            for c in anonymous
        }):
            terms.append(NotExpr(Within(f"*..{encl}.*")))
        pointcut = PointcutDef(pointcut_name, ((scope_type.qualified_name, var),),
                               AndExpr(tuple(terms)))
        advice_params = ((scope_type.qualified_name, var),)
        ref = PointcutRef(pointcut_name, (var,))
        omissions = _omissions(model, scope_type, shared, callers, target.id)
        if omissions:
            warnings.append(warn("OMISSION_CHECK", omissions))
        advised = {
            m for m in _matching_methods(model, scope_type, shared)
            if not model.types[model.methods[m].owner].is_anonymous
        }

    body = [f"// crosscut action: invoke {target_sig}"]
    if kind == "around":
        body.append("proceed();")
    stanzas = (pointcut, Advice(kind, "void" if kind == "around" else None,
                                advice_params, ref, tuple(body)))

    edits = tuple(
        SourceEdit(
            "delete_call_site",
            h.call,
            f"delete the call to {target_sig} in {model.method_sig(h.caller)}",
        )
        for h in hits
    )
    template = AspectTemplate(
        "CB",
        (
            ("advice_kind", kind),
            ("crosscut_action", target_sig),
            ("callers_pointcut", pointcut_name),
        ),
    )
    return RefactoringPlan(
        instance_path=instance_path,
        aspect_name=aspect_name or f"{upper_first(target.name)}Aspect",
        sort="CB",
        template=template,
        doc=AspectDoc(aspect_name or f"{upper_first(target.name)}Aspect", stanzas),
        edits=edits,
        warnings=_sorted_warnings(warnings),
        notes=tuple(notes),
        advised_methods=frozenset(advised),
    )


def _advice_kind(model: SourceModel, hits) -> str:
    if all(h.ordinal == 1 for h in hits):
        return "before"
    if all(h.ordinal == model.methods[h.caller].body_stmt_count for h in hits):
        return "after"
    return "around"


def _first_or_last(model: SourceModel, hit: CbHit) -> bool:
    return hit.ordinal in (1, model.methods[hit.caller].body_stmt_count)


def _shared_signature(model: SourceModel, callers) -> tuple | None:
    sigs = {
        (model.methods[c].name, model.methods[c].param_types, model.methods[c].return_type)
        for c in callers
    }
    return next(iter(sigs)) if len(sigs) == 1 else None


def _matching_methods(model: SourceModel, scope_type, shared) -> list[str]:
    name, params, ret = shared
    return [
        m.id
        for tid in model.subtree(scope_type.id)
        for m in model.methods_of(tid)
        if m.name == name and m.param_types == params and m.return_type == ret
    ]


def _omissions(model: SourceModel, scope_type, shared, callers, target_id) -> list[str]:
    caller_set = set(callers)
    return [
        mid
        for mid in _matching_methods(model, scope_type, shared)
        if mid not in caller_set
        and mid != target_id
        and model.methods[mid].body_stmt_count > 0
    ]


# -- redirection layer --------------------------------------------------------------


def plan_rl(
    model: SourceModel,
    result: QueryResult,
    *,
    aspect_name: str | None = None,
    instance_path: str = "",
) -> RefactoringPlan:
    """Around-advice per delegation pair; the redirector type is retired."""
    hits = list(result.hits)
    if not hits:
        raise PlanError("cannot plan an empty redirection-layer result")
    redirector = model.require_type(result.binding.param("redirector"))
    receiver = model.require_type(result.binding.param("receiver"))

    pairs = sorted(
        {(h.redirector_method, h.receiver_method) for h in hits},
        key=lambda p: (natural_key(p[0]), natural_key(p[1])),
    )
    delegating = {r for r, _ in pairs}
    receiver_methods = {r for _, r in pairs}

    filtered = PointcutDef(
        "filteredCallers", (), NotExpr(Within(redirector.qualified_name))
    )
    stanzas: list = [filtered]
    for _, receiver_mid in pairs:
        m = model.methods[receiver_mid]
        owner = model.types[m.owner].qualified_name
        stanzas.append(
            Advice(
                "around",
                m.return_type,
                (),
                AndExpr(
                    (
                        CallPattern(m.return_type, owner, m.name, ",".join(m.param_types)),
                        PointcutRef("filteredCallers", ()),
                    )
                ),
                (
                    f"// addBehavior1: what {redirector.simple_name} did before redirecting",
                    "proceed();",
                    "// addBehavior2: what it did after redirecting",
                ),
            )
        )

    warnings: list[RiskWarning] = []
    extra = [
        m.id
        for m in model.methods_of(redirector.id)
        if not m.is_constructor and m.id not in delegating
    ]
    if extra:
        warnings.append(warn("REDIR_EXTRA_ROLES", extra))
    direct = [
        call.id
        for call in model.calls.values()
        if call.static_target in receiver_methods
        and model.methods[call.caller].owner != redirector.id
    ]
    if direct:
        warnings.append(warn("REDIR_CLIENTS", direct))
    uncovered = [
        m.id
        for m in model.methods_of(receiver.id)
        if not m.is_constructor
        and m.visibility is Visibility.PUBLIC
        and m.id not in receiver_methods
    ]
    if uncovered:
        warnings.append(warn("REDIR_NEW_METHODS", uncovered))

    edits = (
        SourceEdit(
            "replace_type_removal",
            redirector.id,
            f"retire redirector type {redirector.qualified_name}; its behavior "
            "moves into around advice",
        ),
    )
    template = AspectTemplate(
        "RL",
        (
            ("receiver_methods", ",".join(sorted(model.method_sig(r) for r in receiver_methods))),
            ("add_behavior1", "before redirection"),
            ("add_behavior2", "after redirection"),
        ),
    )
    name = aspect_name or f"{redirector.simple_name}Layer"
    return RefactoringPlan(
        instance_path=instance_path,
        aspect_name=name,
        sort="RL",
        template=template,
        doc=AspectDoc(name, tuple(stanzas)),
        edits=edits,
        warnings=_sorted_warnings(warnings),
        advised_methods=frozenset(receiver_methods),
    )


# -- expose context -------------------------------------------------------------------


def plan_ec(
    model: SourceModel,
    result: QueryResult,
    *,
    aspect_name: str | None = None,
    instance_path: str = "",
) -> RefactoringPlan:
    """Wormhole plan: caller-space and callee-space pointcuts replace the
    threaded parameter; intermediate signatures lose the parameter."""
    chains = [h for h in result.hits if isinstance(h, ChainHit)]
    if not chains:
        raise PlanError("cannot plan an empty expose-context result")
    context = result.binding.param("context")

    heads: dict[str, int] = {}
    tails: list[str] = []
    for chain in chains:
        heads.setdefault(chain.methods[0], chain.param_indices[0])
        tails.append(chain.methods[-1])

    def execution_of(mid: str) -> Execution:
        m = model.methods[mid]
        return Execution(
            m.return_type,
            model.types[m.owner].qualified_name,
            m.name,
            ",".join(m.param_types),
        )

    head_terms = []
    for mid in sorted(heads, key=natural_key):
        m = model.methods[mid]
        slots = ["*"] * m.arity
        slots[heads[mid]] = "ctx"
        head_terms.append(AndExpr((execution_of(mid), Args(", ".join(slots)))))
    caller_space = PointcutDef(
        "callerSpace",
        ((context, "ctx"),),
        head_terms[0] if len(head_terms) == 1 else OrExpr(tuple(head_terms)),
    )
    tail_terms = tuple(execution_of(mid) for mid in sorted(set(tails), key=natural_key))
    callee_space = PointcutDef(
        "calleeSpace", (), tail_terms[0] if len(tail_terms) == 1 else OrExpr(tail_terms)
    )
    advice = Advice(
        "around",
        "void",
        ((context, "ctx"),),
        AndExpr((Cflow(PointcutRef("callerSpace", ("ctx",))), PointcutRef("calleeSpace", ()))),
        ("// the context flows from the caller space; the parameter chain is gone",),
    )

    intermediates: dict[str, int] = {}
    edits: list[SourceEdit] = []
    notes: list[str] = []
    seen = set()
    for chain in chains:
        if len(chain.methods) == 2:
            notes.append(
                "chain "
                + " -> ".join(model.method_sig(m) for m in chain.methods)
                + " has no intermediate methods; no signature edits"
            )
        for position in range(1, len(chain.methods) - 1):
            intermediates.setdefault(chain.methods[position], chain.param_indices[position])
        for position, call_id in enumerate(chain.calls):
            caller, callee = chain.methods[position], chain.methods[position + 1]
            if callee in dict(intermediates) or caller in intermediates:
                key = ("call", call_id)
                if key not in seen:
                    seen.add(key)
                    edits.append(
                        SourceEdit(
                            "remove_param",
                            call_id,
                            f"drop the {context} argument from the call "
                            f"{model.method_sig(caller)} -> {model.method_sig(callee)}",
                            (("arg_index", str(chain.param_indices[position + 1])),),
                        )
                    )
    for mid in sorted(intermediates, key=natural_key):
        edits.append(
            SourceEdit(
                "remove_param",
                mid,
                f"drop the pass-through {context} parameter from {model.method_sig(mid)}",
                (("param_index", str(intermediates[mid])),),
            )
        )

    template = AspectTemplate(
        "EC",
        (
            ("caller_space", "callerSpace"),
            ("callee_space", "calleeSpace"),
            ("caller_context", context),
            ("callee_context", context),
        ),
    )
    name = aspect_name or f"{context.rsplit('.', 1)[-1]}Wormhole"
    return RefactoringPlan(
        instance_path=instance_path,
        aspect_name=name,
        sort="EC",
        template=template,
        doc=AspectDoc(name, (caller_space, callee_space, advice)),
        edits=tuple(edits),
        warnings=(),
        notes=tuple(notes),
        advised_methods=frozenset(heads) | frozenset(tails),
    )


# -- role superimposition -----------------------------------------------------------


def plan_rsi(
    model: SourceModel,
    result: QueryResult,
    *,
    aspect_name: str | None = None,
    instance_path: str = "",
) -> RefactoringPlan:
    """Declare-parents plus inter-type members for a secondary role."""
    hits = [h for h in result.hits if isinstance(h, RsiHit)]
    if not hits:
        raise PlanError("cannot plan an empty role-superimposition result")
    role = model.require_type(result.binding.param("role"))

    stanzas: list = []
    edits: list[SourceEdit] = []
    warnings: list[RiskWarning] = []
    altered: list[str] = []
    conflicts: list[str] = []

    for hit in hits:
        if hit.kind != "declares_role":
            continue
        stanzas.append(
            DeclareParents(model.types[hit.type_id].qualified_name, role.qualified_name)
        )
    for hit in hits:
        if hit.kind != "role_member":
            continue
        member = model.methods[hit.member]
        owner = model.types[member.owner].qualified_name
        if member.visibility is not Visibility.PUBLIC:
            altered.append(member.id)
        for overridden in model.overrides_all(member.id):
            if model.methods[overridden].owner not in model.ancestors(role.id):
                conflicts.append(member.id)
                break
        stanzas.append(
            IntroMethod(
                "public",
                member.return_type,
                owner,
                member.name,
                ",".join(member.param_types),
                (f"// moved from {model.method_sig(member.id)}",),
            )
        )
        edits.append(
            SourceEdit(
                "move_member_to_aspect",
                member.id,
                f"move role member {model.method_sig(member.id)} into the aspect",
            )
        )

    if altered:
        warnings.append(warn("VISIBILITY_CHANGE", altered))
    if conflicts:
        warnings.append(warn("INTRO_CONFLICT", conflicts))

    template = AspectTemplate(
        "RSI",
        (
            ("role", role.qualified_name),
            ("declare_parents", ",".join(
                s.type_name for s in stanzas if isinstance(s, DeclareParents)
            ) or None),
            ("intro_members", str(len(edits))),
        ),
    )
    name = aspect_name or f"{role.simple_name}Role"
    return RefactoringPlan(
        instance_path=instance_path,
        aspect_name=name,
        sort="RSI",
        template=template,
        doc=AspectDoc(name, tuple(stanzas)),
        edits=tuple(edits),
        warnings=_sorted_warnings(warnings),
    )


# -- support classes -------------------------------------------------------------------


def plan_sc(
    model: SourceModel,
    result: QueryResult,
    *,
    aspect_name: str | None = None,
    instance_path: str = "",
) -> RefactoringPlan:
    """Move nested support classes into the aspect (no introduction exists)."""
    hits = [h for h in result.hits if isinstance(h, ScHit)]
    if not hits:
        raise PlanError("cannot plan an empty support-class result")

    stanzas: list = []
    edits: list[SourceEdit] = []
    broken: list[str] = []
    moved: list[str] = []
    for hit in hits:
        nested = model.types[hit.nested]
        enclosing = model.types[hit.enclosing]
        supertype = None
        if nested.supertypes:
            supertype = model.types[nested.supertypes[0]].qualified_name
        stanzas.append(
            MovedClass(
                nested.simple_name,
                supertype,
                (f"// moved from {nested.qualified_name}",),
            )
        )
        moved.append(nested.id)
        edits.append(
            SourceEdit(
                "move_nested_class_to_aspect",
                nested.id,
                f"move support class {nested.qualified_name} into the aspect",
            )
        )
        for method in model.methods_of(nested.id):
            for call in model.calls_of(method.id):
                recv = call.receiver
                if recv.kind is ReceiverKind.FIELD:
                    fld = model.fields[recv.field]
                    if fld.owner == enclosing.id and fld.visibility is Visibility.PRIVATE:
                        broken.append(fld.id)
                target = model.methods[call.static_target]
                if target.owner == enclosing.id and target.visibility is Visibility.PRIVATE:
                    broken.append(target.id)

    warnings = [warn("SC_NOT_INTRODUCIBLE", moved)]
    if broken:
        warnings.append(warn("SC_BROKEN_DEPS", broken))

    enclosing_name = model.types[hits[0].enclosing].simple_name
    template = AspectTemplate("SC", (("support_classes", str(len(moved))),))
    name = aspect_name or f"{enclosing_name}Support"
    return RefactoringPlan(
        instance_path=instance_path,
        aspect_name=name,
        sort="SC",
        template=template,
        doc=AspectDoc(name, tuple(stanzas)),
        edits=tuple(edits),
        warnings=_sorted_warnings(warnings),
    )


# -- exception propagation ----------------------------------------------------------------


def plan_ep(
    model: SourceModel,
    result: QueryResult,
    *,
    aspect_name: str | None = None,
    instance_path: str = "",
) -> RefactoringPlan:
    """Declare-soft keyed on the chain roots; non-root throws clauses go."""
    chains = [h for h in result.hits if isinstance(h, ChainHit)]
    if not chains:
        raise PlanError("cannot plan an empty exception-propagation result")
    exception = result.binding.param("exception")

    roots = sorted({c.methods[-1] for c in chains}, key=natural_key)
    members = sorted({m for c in chains for m in c.methods}, key=natural_key)
    non_roots = [m for m in members if m not in roots]

    stanzas: list = []
    for root in roots:
        m = model.methods[root]
        stanzas.append(
            DeclareSoft(
                exception,
                CallPattern(
                    "*", model.types[m.owner].qualified_name, m.name, "..", exception
                ),
            )
        )

    catch_notes: list[str] = []
    heads = sorted({c.methods[0] for c in chains}, key=natural_key)
    for head in heads:
        catchers = sorted(
            {
                call.caller
                for call in model.calls.values()
                if call.static_target == head
                and exception not in model.methods[call.caller].declared_throws
            },
            key=natural_key,
        )
        for catcher in catchers:
            catch_notes.append(
                f"capture SoftException at the top of the call chain: rewrite "
                f"the {exception} catch in {model.method_sig(catcher)}"
            )
        if not catchers:
            catch_notes.append(
                f"no catch site found above {model.method_sig(head)}; the soft "
                "exception surfaces to callers"
            )
    stanzas.append(CommentStanza(tuple(catch_notes)))

    edits = tuple(
        SourceEdit(
            "delete_throws_clause",
            mid,
            f"remove {exception} from the throws clause of {model.method_sig(mid)}",
            (("exception", exception),),
        )
        for mid in non_roots
    )
    notes = list(catch_notes)
    if any(len(c.methods) == 1 for c in chains):
        notes.append("single-method chain: nothing to unthread, only the root remains")

    warnings = [warn("EP_TYPE_LOST", [exception])]
    related: list[str] = []
    member_set = set(members)
    for mid in members:
        for other in model.overrides_all(mid) | model.overridden_by(mid):
            if other not in member_set \
                    and exception in model.methods[other].declared_throws:
                related.append(other)
    if related:
        warnings.append(warn("EP_OVERRIDES", related))

    template = AspectTemplate(
        "EP",
        (
            ("exception", exception),
            ("root_pattern", ",".join(model.method_sig(r) for r in roots)),
            ("catch_sites", str(len(catch_notes))),
        ),
    )
    name = aspect_name or f"{exception.rsplit('.', 1)[-1]}Softening"
    return RefactoringPlan(
        instance_path=instance_path,
        aspect_name=name,
        sort="EP",
        template=template,
        doc=AspectDoc(name, tuple(stanzas)),
        edits=edits,
        warnings=_sorted_warnings(warnings),
        notes=tuple(notes),
    )


# -- composition, application, interference ------------------------------------------------


def plan_for(
    model: SourceModel,
    result: QueryResult,
    *,
    advice: str | None = None,
    enumerate_callers: bool = False,
    aspect_name: str | None = None,
    instance_path: str = "",
) -> RefactoringPlan:
    """Dispatch to the sort-specific planner for a query result."""
    sort = result.sort
    if sort is SortKind.CB:
        return plan_cb(
            model,
            result,
            advice=advice,
            enumerate_callers=enumerate_callers,
            aspect_name=aspect_name,
            instance_path=instance_path,
        )
    builders = {
        SortKind.RL: plan_rl,
        SortKind.EC: plan_ec,
        SortKind.RSI: plan_rsi,
        SortKind.SC: plan_sc,
        SortKind.EP: plan_ep,
    }
    return builders[sort](
        model, result, aspect_name=aspect_name, instance_path=instance_path
    )


def combine_plans(
    aspect_name: str, plans: list[RefactoringPlan], instance_path: str = ""
) -> RefactoringPlan:
    """Merge several plans into one aspect (e.g. an undo aspect holding the
    moved support class, the role introductions and the execute advice)."""
    if not plans:
        raise PlanError("nothing to combine")
    stanzas: list = []
    for plan in plans:
        for stanza in plan.doc.stanzas:
            if stanza not in stanzas:
                stanzas.append(stanza)
    edits: list[SourceEdit] = []
    for plan in plans:
        for edit in plan.edits:
            if edit not in edits:
                edits.append(edit)
    warnings = _sorted_warnings(w for plan in plans for w in plan.warnings)
    notes = tuple(dict.fromkeys(note for plan in plans for note in plan.notes))
    advised = frozenset().union(*(plan.advised_methods for plan in plans))
    return RefactoringPlan(
        instance_path=instance_path,
        aspect_name=aspect_name,
        sort="+".join(dict.fromkeys(p.sort for p in plans)),
        template=None,
        doc=AspectDoc(aspect_name, tuple(stanzas)),
        edits=tuple(edits),
        warnings=warnings,
        notes=notes,
        advised_methods=advised,
    )


def apply_edits(model: SourceModel, edits) -> SourceModel:
    """Replay deletion edits on the fact model and rebuild it.

    ``delete_call_site`` removes the call record; ``delete_throws_clause``
    removes the named exception from the method's throws list.  Structural
    move edits change no facts (the moved member still exists, now aspect
    side), so they are accepted and ignored here.
    """
    drop_calls = {e.target for e in edits if e.kind == "delete_call_site"}
    unthrow: dict[str, set[str]] = {}
    for e in edits:
        if e.kind == "delete_throws_clause":
            unthrow.setdefault(e.target, set()).add(e.detail_value("exception"))
    records = []
    for rec in model.to_records():
        if rec["k"] == "call" and rec["id"] in drop_calls:
            continue
        if rec["k"] == "method" and rec["id"] in unthrow:
            rec = dict(rec)
            rec["throws"] = [t for t in rec["throws"] if t not in unthrow[rec["id"]]]
        records.append(rec)
    return load_records(records, policy=model.policy)


def check_precedence(plans: list[RefactoringPlan]) -> list[RiskWarning]:
    """Pairwise interference: plans whose advice shares join points."""
    warnings = []
    for i, first in enumerate(plans):
        for second in plans[i + 1:]:
            overlap = first.advised_methods & second.advised_methods
            if overlap:
                warnings.append(
                    RiskWarning(
                        "PRECEDENCE",
                        WARNING_CATALOG["PRECEDENCE"][0],
                        f"aspects {first.aspect_name} and {second.aspect_name} advise "
                        "overlapping join points; advice precedence is unspecified",
                        tuple(sorted(overlap, key=natural_key)),
                    )
                )
    return warnings
