"""Fact extraction from MiniLang syntax trees.

Walks parsed compilation units and emits ``facts.jsonl`` records (see
:mod:`sortweaver.model`).  Extraction is deterministic: ids, statement
ordinals and record order depend only on the input text and file order, so
the same sources always produce byte-identical output.

Conventions:

* Statement ordinals number every statement in lexical pre-order, nested
  blocks included; a call inside an ``if`` condition carries the ``if``
  statement's ordinal.
* Anonymous classes get synthesized names ``<Encl>$anon<N>`` (N counts per
  enclosing type, in lexical order).
* Declared type names (params, returns, fields, throws) are stored fully
  qualified whenever they resolve; unresolved names are kept as written.
* ``new T(...)`` emits a call to T's constructor when one is declared;
  otherwise the implicit default constructor produces no record.
* A call whose target cannot be resolved is recorded against a synthesized
  external method stub (owned by the receiver's type when that type is
  itself external, else by the external ``$unresolved`` type) and reported
  as a warning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    Assign,
    BinaryExpr,
    CallExpr,
    CompilationUnit,
    Diagnostic,
    ExprStmt,
    IfStmt,
    LocalDecl,
    MethodNode,
    Name,
    NewExpr,
    Position,
    ReturnStmt,
    Stmt,
    Super,
    This,
    ThrowStmt,
    TryStmt,
    TypeNode,
)


@dataclass
class _TypeInfo:
    id: str
    qualified_name: str
    kind: str
    is_anonymous: bool
    encl: "_TypeInfo | None"
    supertype_names: list[str]
    src: str
    node: TypeNode | None = None
    supertypes: list["_TypeInfo"] = field(default_factory=list)
    children: dict[str, "_TypeInfo"] = field(default_factory=dict)
    fields: list["_FieldInfo"] = field(default_factory=list)
    methods: list["_MethodInfo"] = field(default_factory=list)
    is_external: bool = False
    anon_counter: int = 0

    @property
    def simple_name(self) -> str:
        return self.qualified_name.rsplit(".", 1)[-1]

    @property
    def is_abstract(self) -> bool:
        if self.kind == "interface":
            return True
        return any(m.is_abstract for m in self.methods)


@dataclass
class _FieldInfo:
    id: str
    owner: _TypeInfo
    name: str
    declared_type: str
    visibility: str


@dataclass
class _MethodInfo:
    id: str
    owner: _TypeInfo
    name: str
    params: list[tuple[str, str]]  # (resolved type name, parameter name)
    return_type: str
    visibility: str
    is_static: bool
    is_abstract: bool
    is_constructor: bool
    throws: list[str]
    body: list[Stmt] | None
    body_stmt_count: int = 0
    raises: list[str] = field(default_factory=list)
    is_external: bool = False

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass
class ExtractResult:
    records: list[dict]
    warnings: list[Diagnostic]

    def to_jsonl(self) -> str:
        import json

        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.records)


def extract_facts(units: CompilationUnit | list[CompilationUnit]) -> ExtractResult:
    """Emit fact records for one or more diagnostics-free compilation units."""
    if isinstance(units, CompilationUnit):
        units = [units]
    return _Extractor(units).run()


def count_statements(body: list[Stmt] | None) -> int:
    """Pre-order statement count, nested blocks included."""
    if not body:
        return 0
    total = 0
    for stmt in body:
        total += 1
        if isinstance(stmt, IfStmt):
            total += count_statements(stmt.then_body)
            total += count_statements(stmt.else_body or [])
        elif isinstance(stmt, TryStmt):
            total += count_statements(stmt.body)
            total += count_statements(stmt.handler)
    return total


class _Extractor:
    def __init__(self, units: list[CompilationUnit]):
        self.units = units
        self.types: list[_TypeInfo] = []
        self.by_qname: dict[str, _TypeInfo] = {}
        self.by_simple: dict[str, list[_TypeInfo]] = {}
        self.anon_of_new: dict[int, _TypeInfo] = {}
        self.externals: dict[str, _TypeInfo] = {}
        self.external_order: list[_TypeInfo] = []
        self.external_methods: list[_MethodInfo] = []
        self.calls: list[dict] = []
        self.warnings: list[Diagnostic] = []
        self.counters = {"T": 0, "M": 0, "F": 0, "C": 0, "XT": 0, "XM": 0}

    def fresh(self, prefix: str) -> str:
        self.counters[prefix] += 1
        return f"{prefix}{self.counters[prefix]}"

    def warn(self, pos: Position, message: str):
        self.warnings.append(Diagnostic("warning", pos, message))

    # -- phase 1: registration ----------------------------------------------

    def run(self) -> ExtractResult:
        for unit in self.units:
            for node in unit.types:
                self.register_type(node, encl=None, src=unit.source)
        self.link_supertypes()
        for info in self.types:
            if info.is_anonymous:
                continue  # walked from its new-expression site
            for method in info.methods:
                if method.body is not None:
                    _BodyWalker(self, info, method).walk()
        return ExtractResult(self.emit(), self.warnings)

    def register_type(self, node: TypeNode, encl: _TypeInfo | None, src: str,
                      anon_supertype: str | None = None) -> _TypeInfo:
        if anon_supertype is not None:
            encl.anon_counter += 1
            qname = f"{encl.qualified_name}$anon{encl.anon_counter}"
            supers = [anon_supertype]
            kind = "class"
            anonymous = True
        else:
            qname = f"{encl.qualified_name}.{node.name}" if encl else node.name
            supers = node.supertype_names
            kind = node.kind
            anonymous = False
        info = _TypeInfo(
            id=self.fresh("T"),
            qualified_name=qname,
            kind=kind,
            is_anonymous=anonymous,
            encl=encl,
            supertype_names=list(supers),
            src=src,
            node=node,
        )
        if qname in self.by_qname:
            self.warn(node.pos, f"duplicate type name {qname!r}; later declaration shadows")
        else:
            self.by_qname[qname] = info
        self.by_simple.setdefault(info.simple_name, []).append(info)
        if encl is not None and not anonymous:
            encl.children[node.name] = info
        self.types.append(info)

        for fld in node.fields:
            info.fields.append(
                _FieldInfo(
                    id=self.fresh("F"),
                    owner=info,
                    name=fld.name,
                    declared_type=fld.declared_type,
                    visibility=fld.visibility,
                )
            )
        for method in node.methods:
            self.register_method(info, method, src)
        for nested in node.nested:
            self.register_type(nested, encl=info, src=src)
        return info

    def register_method(self, info: _TypeInfo, node: MethodNode, src: str) -> _MethodInfo:
        method = _MethodInfo(
            id=self.fresh("M"),
            owner=info,
            name=node.name,
            params=[(p.declared_type, p.name) for p in node.params],
            return_type=node.return_type,
            visibility=node.visibility,
            is_static=node.is_static,
            is_abstract=node.is_abstract,
            is_constructor=node.is_constructor,
            throws=list(node.throws),
            body=node.body,
            body_stmt_count=count_statements(node.body),
        )
        info.methods.append(method)
        # Anonymous classes nested in this body register now, in lexical order.
        if node.body is not None:
            self.register_anons_in(node.body, info, src)
        return method

    def register_anons_in(self, stmts: list[Stmt], encl: _TypeInfo, src: str):
        for stmt in stmts:
            for expr in _stmt_exprs(stmt):
                self.register_anons_in_expr(expr, encl, src)
            if isinstance(stmt, IfStmt):
                self.register_anons_in(stmt.then_body, encl, src)
                if stmt.else_body:
                    self.register_anons_in(stmt.else_body, encl, src)
            elif isinstance(stmt, TryStmt):
                self.register_anons_in(stmt.body, encl, src)
                self.register_anons_in(stmt.handler, encl, src)

    def register_anons_in_expr(self, expr, encl: _TypeInfo, src: str):
        if expr is None:
            return
        if isinstance(expr, NewExpr):
            for arg in expr.args:
                self.register_anons_in_expr(arg, encl, src)
            if expr.body is not None:
                holder: TypeNode = expr.body[0]
                info = self.register_type(
                    holder, encl=encl, src=src, anon_supertype=expr.type_name
                )
                self.anon_of_new[id(expr)] = info
        elif isinstance(expr, CallExpr):
            self.register_anons_in_expr(expr.receiver, encl, src)
            for arg in expr.args:
                self.register_anons_in_expr(arg, encl, src)
        elif isinstance(expr, BinaryExpr):
            self.register_anons_in_expr(expr.left, encl, src)
            self.register_anons_in_expr(expr.right, encl, src)

    def link_supertypes(self):
        for info in self.types:
            for name in info.supertype_names:
                resolved = self.resolve_type_name(name, info.encl or info)
                if resolved is None:
                    resolved = self.external_type(name)
                info.supertypes.append(resolved)

    # -- name resolution -----------------------------------------------------

    def resolve_type_name(self, name: str, context: _TypeInfo | None) -> _TypeInfo | None:
        if name in self.by_qname:
            return self.by_qname[name]
        cursor = context
        while cursor is not None:
            if cursor.simple_name == name:
                return cursor
            if name in cursor.children:
                return cursor.children[name]
            cursor = cursor.encl
        candidates = self.by_simple.get(name, [])
        if len(candidates) == 1:
            return candidates[0]
        return None

    def resolve_type_text(self, name: str, context: _TypeInfo | None) -> str:
        info = self.resolve_type_name(name, context)
        return info.qualified_name if info is not None else name

    def external_type(self, name: str) -> _TypeInfo:
        if name not in self.externals:
            info = _TypeInfo(
                id=self.fresh("XT"),
                qualified_name=name,
                kind="class",
                is_anonymous=False,
                encl=None,
                supertype_names=[],
                src="",
                is_external=True,
            )
            self.externals[name] = info
            self.external_order.append(info)
        return self.externals[name]

    def external_stub(self, owner: _TypeInfo, name: str, arity: int) -> _MethodInfo:
        for stub in self.external_methods:
            if stub.owner is owner and stub.name == name and stub.arity == arity:
                return stub
        stub = _MethodInfo(
            id=self.fresh("XM"),
            owner=owner,
            name=name,
            params=[("Object", f"a{i}") for i in range(arity)],
            return_type="Object",
            visibility="public",
            is_static=False,
            is_abstract=False,
            is_constructor=False,
            throws=[],
            body=None,
            is_external=True,
        )
        self.external_methods.append(stub)
        return stub

    def hierarchy(self, start: _TypeInfo) -> list[_TypeInfo]:
        """Breadth-first walk of a type and its supertypes, without repeats."""
        out: list[_TypeInfo] = []
        queue = [start]
        seen = set()
        while queue:
            info = queue.pop(0)
            if id(info) in seen:
                continue
            seen.add(id(info))
            out.append(info)
            queue.extend(info.supertypes)
        return out

    def find_method(self, start: _TypeInfo, name: str, arity: int) -> _MethodInfo | None:
        for info in self.hierarchy(start):
            for method in info.methods:
                if method.name == name and method.arity == arity and not method.is_constructor:
                    return method
        return None

    def find_field(self, start: _TypeInfo, name: str) -> _FieldInfo | None:
        for info in self.hierarchy(start):
            for fld in info.fields:
                if fld.name == name:
                    return fld
        return None

    # -- emission -------------------------------------------------------------

    def emit(self) -> list[dict]:
        records: list[dict] = []
        for info in self.types + self.external_order:
            rec = {
                "k": "type",
                "id": info.id,
                "name": info.qualified_name,
                "kind": info.kind,
                "abstract": info.is_abstract,
                "anon": info.is_anonymous,
                "encl": info.encl.id if info.encl else None,
                "super": [s.id for s in info.supertypes],
            }
            if info.is_external:
                rec["ext"] = True
            if info.src:
                rec["src"] = info.src
            records.append(rec)
            for fld in info.fields:
                records.append(
                    {
                        "k": "field",
                        "id": fld.id,
                        "owner": info.id,
                        "name": fld.name,
                        "type": self.resolve_type_text(fld.declared_type, info),
                        "vis": fld.visibility,
                        **({"src": info.src} if info.src else {}),
                    }
                )
            for method in info.methods + [
                m for m in self.external_methods if m.owner is info
            ]:
                rec = {
                    "k": "method",
                    "id": method.id,
                    "owner": info.id,
                    "name": method.name,
                    "params": [self.resolve_type_text(p, info) for p, _ in method.params],
                    "ret": self.resolve_type_text(method.return_type, info),
                    "vis": method.visibility,
                    "static": method.is_static,
                    "abstract": method.is_abstract,
                    "ctor": method.is_constructor,
                    "throws": [self.resolve_type_text(t, info) for t in method.throws],
                    "stmts": method.body_stmt_count,
                }
                if method.raises:
                    rec["raises"] = list(dict.fromkeys(method.raises))
                if method.is_external:
                    rec["ext"] = True
                if info.src:
                    rec["src"] = info.src
                records.append(rec)
        records.extend(self.calls)
        return records


def _stmt_exprs(stmt: Stmt):
    if isinstance(stmt, ExprStmt):
        return [stmt.expr]
    if isinstance(stmt, LocalDecl):
        return [stmt.init]
    if isinstance(stmt, Assign):
        return [stmt.value]
    if isinstance(stmt, ReturnStmt):
        return [stmt.value] if stmt.value is not None else []
    if isinstance(stmt, ThrowStmt):
        return [stmt.value]
    if isinstance(stmt, IfStmt):
        return [stmt.cond]
    return []


class _BodyWalker:
    """Resolves one method body: ordinals, receivers, call targets."""

    def __init__(self, extractor: _Extractor, owner: _TypeInfo, method: _MethodInfo):
        self.ex = extractor
        self.owner = owner
        self.method = method
        self.locals: dict[str, str] = {}
        self.ordinal = 0

    def walk(self):
        self.walk_block(self.method.body)

    def walk_block(self, stmts: list[Stmt]):
        for stmt in stmts:
            self.ordinal += 1
            at = self.ordinal
            if isinstance(stmt, IfStmt):
                self.walk_expr(stmt.cond, at)
                self.walk_block(stmt.then_body)
                if stmt.else_body:
                    self.walk_block(stmt.else_body)
            elif isinstance(stmt, TryStmt):
                self.walk_block(stmt.body)
                self.locals[stmt.exc_name] = stmt.exc_type
                self.walk_block(stmt.handler)
            elif isinstance(stmt, LocalDecl):
                self.walk_expr(stmt.init, at)
                self.locals[stmt.name] = stmt.declared_type
            elif isinstance(stmt, ThrowStmt):
                self.walk_expr(stmt.value, at)
                if isinstance(stmt.value, NewExpr):
                    self.method.raises.append(
                        self.ex.resolve_type_text(stmt.value.type_name, self.owner)
                    )
            else:
                for expr in _stmt_exprs(stmt):
                    self.walk_expr(expr, at)

    # -- expressions, post-order --------------------------------------------

    def walk_expr(self, expr, ordinal: int) -> str | None:
        """Emit call records inside ``expr``; returns its static type name."""
        if expr is None:
            return None
        if isinstance(expr, BinaryExpr):
            self.walk_expr(expr.left, ordinal)
            self.walk_expr(expr.right, ordinal)
            return "boolean"
        if isinstance(expr, NewExpr):
            for arg in expr.args:
                self.walk_expr(arg, ordinal)
            self.emit_ctor_call(expr, ordinal)
            anon = self.ex.anon_of_new.get(id(expr))
            if anon is not None:
                for method in anon.methods:
                    if method.body is not None:
                        _BodyWalker(self.ex, anon, method).walk()
                return anon.qualified_name
            return expr.type_name
        if isinstance(expr, CallExpr):
            return self.emit_call(expr, ordinal)
        if isinstance(expr, Name):
            kind, _, type_name = self.classify_name(expr.value)
            return type_name if kind != "unknown" else None
        if isinstance(expr, This):
            return self.owner.qualified_name
        if isinstance(expr, Super):
            sup = self.owner.supertypes[0] if self.owner.supertypes else None
            return sup.qualified_name if sup else None
        return None

    def type_or_external(self, type_name: str | None, context: _TypeInfo | None = None):
        """Resolve a declared type name; unresolved names become external types."""
        if type_name is None:
            return None
        info = self.ex.resolve_type_name(type_name, context or self.owner)
        return info if info is not None else self.ex.external_type(type_name)

    def classify_name(self, name: str):
        """Classify an identifier: parameter, local, field, type, or unknown."""
        for index, (ptype, pname) in enumerate(self.method.params):
            if pname == name:
                return "param", index, ptype
        if name in self.locals:
            return "local", None, self.locals[name]
        cursor: _TypeInfo | None = self.owner
        while cursor is not None:
            fld = self.ex.find_field(cursor, name)
            if fld is not None:
                return "field", fld, fld.declared_type
            cursor = cursor.encl
        info = self.ex.resolve_type_name(name, self.owner)
        if info is not None:
            return "type", info, info.qualified_name
        return "unknown", None, None

    def emit_ctor_call(self, expr: NewExpr, ordinal: int):
        target_type = self.ex.resolve_type_name(expr.type_name, self.owner)
        if target_type is None:
            self.ex.external_type(expr.type_name)
            return
        ctor = None
        for method in target_type.methods:
            if method.is_constructor and method.arity == len(expr.args):
                ctor = method
                break
        if ctor is None:
            return
        self.append_call(expr, ctor, {"kind": "other"}, ordinal)

    def emit_call(self, expr: CallExpr, ordinal: int) -> str | None:
        recv = expr.receiver
        receiver_json: dict
        lookup_start: _TypeInfo | None
        lexical_fallback = False

        if recv is None:
            receiver_json = {"kind": "this"}
            lookup_start = self.owner
            lexical_fallback = True
        elif isinstance(recv, This):
            receiver_json = {"kind": "this"}
            lookup_start = self.owner
        elif isinstance(recv, Super):
            receiver_json = {"kind": "super"}
            lookup_start = None  # search starts at supertypes
        elif isinstance(recv, Name):
            kind, payload, type_name = self.classify_name(recv.value)
            if kind == "param":
                receiver_json = {"kind": "param", "index": payload}
                lookup_start = self.type_or_external(type_name)
            elif kind == "local":
                receiver_json = {"kind": "local"}
                lookup_start = self.type_or_external(type_name)
            elif kind == "field":
                receiver_json = {"kind": "field", "field": payload.id}
                lookup_start = self.type_or_external(type_name, context=payload.owner)
            elif kind == "type":
                receiver_json = {"kind": "other"}
                lookup_start = payload
            else:
                receiver_json = {"kind": "other"}
                lookup_start = None
                self.ex.warn(expr.pos, f"unknown receiver {recv.value!r}")
        else:
            # Chained or constructed receiver: resolve it first for its type.
            type_name = self.walk_expr(recv, ordinal)
            receiver_json = {"kind": "other"}
            lookup_start = self.type_or_external(type_name)

        for arg in expr.args:
            self.walk_expr(arg, ordinal)

        target = self.resolve_target(expr, lookup_start, recv, lexical_fallback)
        self.append_call(expr, target, receiver_json, ordinal)
        return target.return_type

    def resolve_target(
        self,
        expr: CallExpr,
        lookup_start: _TypeInfo | None,
        recv,
        lexical_fallback: bool,
    ) -> _MethodInfo:
        arity = len(expr.args)
        if isinstance(recv, Super):
            for sup in self.owner.supertypes:
                found = self.ex.find_method(sup, expr.name, arity)
                if found is not None:
                    return found
        elif lookup_start is not None:
            found = self.ex.find_method(lookup_start, expr.name, arity)
            if found is not None:
                return found
            if lexical_fallback:
                cursor = self.owner.encl
                while cursor is not None:
                    found = self.ex.find_method(cursor, expr.name, arity)
                    if found is not None:
                        return found
                    cursor = cursor.encl

        owner_name = lookup_start.qualified_name if lookup_start else "<unknown>"
        self.ex.warn(
            expr.pos,
            f"cannot resolve method {expr.name}/{arity} on {owner_name}; "
            "recording an external stub",
        )
        stub_owner = (
            lookup_start
            if lookup_start is not None and lookup_start.is_external
            else self.ex.external_type("$unresolved")
        )
        return self.ex.external_stub(stub_owner, expr.name, arity)

    def append_call(self, expr, target: _MethodInfo, receiver_json: dict, ordinal: int):
        passes = []
        if isinstance(expr, (CallExpr, NewExpr)):
            for arg_index, arg in enumerate(expr.args):
                if isinstance(arg, Name):
                    for param_index, (_, pname) in enumerate(self.method.params):
                        if pname == arg.value:
                            passes.append([arg_index, param_index])
                            break
        rec = {
            "k": "call",
            "id": self.ex.fresh("C"),
            "caller": self.method.id,
            "target": target.id,
            "recv": receiver_json,
            "ord": ordinal,
            "pass": passes,
        }
        if self.owner.src:
            rec["src"] = self.owner.src
        self.ex.calls.append(rec)
