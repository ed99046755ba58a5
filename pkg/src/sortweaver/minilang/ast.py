"""Syntax tree for the MiniLang frontend.

MiniLang is a compact Java-like language: classes and interfaces with
single-name types, fields, methods with throws clauses, nested and
anonymous classes, and a statement set just rich enough to express
delegation, pass-through parameters, guarded bodies and exception
propagation.  Every node carries its source position.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Position:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    pos: Position
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.pos}: {self.message}"


# -- expressions -------------------------------------------------------------


@dataclass
class Expr:
    pos: Position


@dataclass
class Name(Expr):
    value: str


@dataclass
class This(Expr):
    pass


@dataclass
class Super(Expr):
    pass


@dataclass
class NullLit(Expr):
    pass


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class StrLit(Expr):
    value: str


@dataclass
class CallExpr(Expr):
    receiver: Expr | None  # None for a bare call
    name: str
    args: list[Expr] = field(default_factory=list)


@dataclass
class NewExpr(Expr):
    type_name: str
    args: list[Expr] = field(default_factory=list)
    body: list | None = None  # anonymous class members, when present


@dataclass
class BinaryExpr(Expr):
    op: str  # "==" | "!="
    left: Expr = None
    right: Expr = None


# -- statements ---------------------------------------------------------------


@dataclass
class Stmt:
    pos: Position


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class LocalDecl(Stmt):
    declared_type: str
    name: str
    init: Expr


@dataclass
class Assign(Stmt):
    name: str
    value: Expr


@dataclass
class ReturnStmt(Stmt):
    value: Expr | None


@dataclass
class ThrowStmt(Stmt):
    value: Expr


@dataclass
class IfStmt(Stmt):
    cond: Expr
    then_body: list[Stmt] = field(default_factory=list)
    else_body: list[Stmt] | None = None


@dataclass
class TryStmt(Stmt):
    body: list[Stmt] = field(default_factory=list)
    exc_type: str = ""
    exc_name: str = ""
    handler: list[Stmt] = field(default_factory=list)


# -- declarations --------------------------------------------------------------


@dataclass
class Param:
    declared_type: str
    name: str


@dataclass
class FieldNode:
    pos: Position
    visibility: str
    declared_type: str
    name: str
    is_static: bool = False


@dataclass
class MethodNode:
    pos: Position
    visibility: str
    return_type: str
    name: str
    params: list[Param] = field(default_factory=list)
    throws: list[str] = field(default_factory=list)
    body: list[Stmt] | None = None  # None for abstract methods and signatures
    is_static: bool = False
    is_abstract: bool = False
    is_constructor: bool = False


@dataclass
class TypeNode:
    pos: Position
    name: str
    kind: str  # "class" | "interface"
    extends: list[str] = field(default_factory=list)
    implements: list[str] = field(default_factory=list)
    fields: list[FieldNode] = field(default_factory=list)
    methods: list[MethodNode] = field(default_factory=list)
    nested: list["TypeNode"] = field(default_factory=list)

    @property
    def supertype_names(self) -> list[str]:
        return list(self.extends) + list(self.implements)


@dataclass
class CompilationUnit:
    types: list[TypeNode] = field(default_factory=list)
    source: str = ""  # file name the unit was parsed from


@dataclass
class ParseResult:
    unit: CompilationUnit | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.unit is not None and not any(
            d.severity == "error" for d in self.diagnostics
        )
