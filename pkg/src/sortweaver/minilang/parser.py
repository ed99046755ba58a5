"""Recursive-descent parser for MiniLang.

The grammar is deliberately small: no generics, no lambdas, overloads
distinguished by arity only.  Parsing either yields a full tree or a single
error diagnostic at the first offending token; it never raises on arbitrary
input.
"""

from __future__ import annotations

from .ast import (
    Assign,
    BinaryExpr,
    BoolLit,
    CallExpr,
    CompilationUnit,
    Diagnostic,
    ExprStmt,
    FieldNode,
    IfStmt,
    IntLit,
    LocalDecl,
    MethodNode,
    Name,
    NewExpr,
    NullLit,
    Param,
    ParseResult,
    Position,
    ReturnStmt,
    StrLit,
    Stmt,
    Super,
    This,
    ThrowStmt,
    TryStmt,
    TypeNode,
)
from .lexer import LexError, Token, tokenize

_VISIBILITIES = ("public", "protected", "private")


class ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        super().__init__(str(diagnostic))


def parse(text: str, source: str = "") -> ParseResult:
    """Parse MiniLang source into a tree, or report the first error."""
    try:
        tokens = tokenize(text)
    except LexError as exc:
        return ParseResult(None, [exc.diagnostic])
    parser = _Parser(tokens)
    try:
        unit = parser.parse_unit()
    except ParseError as exc:
        return ParseResult(None, [exc.diagnostic])
    except RecursionError:
        diag = Diagnostic("error", Position(1, 1), "input nests too deeply")
        return ParseResult(None, [diag])
    unit.source = source
    return ParseResult(unit, [])


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.index = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.index += 1
        return tok

    def at(self, value: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.value == value and tok.kind in ("keyword", "punct", "op")

    def expect(self, value: str) -> Token:
        tok = self.peek()
        if not self.at(value):
            raise ParseError(
                Diagnostic("error", tok.pos, f"expected {value!r}, found {tok.value!r}")
            )
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise ParseError(
                Diagnostic("error", tok.pos, f"expected {what}, found {tok.value!r}")
            )
        return self.next()

    def fail(self, message: str) -> ParseError:
        return ParseError(Diagnostic("error", self.peek().pos, message))

    # -- declarations ------------------------------------------------------

    def parse_unit(self) -> CompilationUnit:
        unit = CompilationUnit()
        while not self.peek().kind == "eof":
            unit.types.append(self.parse_type_decl())
        return unit

    def parse_type_decl(self) -> TypeNode:
        # Top-level visibility on a type is accepted and ignored.
        if self.peek().value in _VISIBILITIES and self.peek().kind == "keyword":
            self.next()
        if self.at("class"):
            return self.parse_class()
        if self.at("interface"):
            return self.parse_interface()
        raise self.fail(f"expected type declaration, found {self.peek().value!r}")

    def parse_class(self) -> TypeNode:
        start = self.expect("class")
        name = self.expect_ident("class name")
        node = TypeNode(pos=start.pos, name=name.value, kind="class")
        if self.at("extends"):
            self.next()
            node.extends.append(self.expect_ident("superclass name").value)
        if self.at("implements"):
            self.next()
            node.implements.append(self.expect_ident("interface name").value)
            while self.at(","):
                self.next()
                node.implements.append(self.expect_ident("interface name").value)
        self.expect("{")
        while not self.at("}"):
            self.parse_member(node)
        self.expect("}")
        return node

    def parse_interface(self) -> TypeNode:
        start = self.expect("interface")
        name = self.expect_ident("interface name")
        node = TypeNode(pos=start.pos, name=name.value, kind="interface")
        if self.at("extends"):
            self.next()
            node.extends.append(self.expect_ident("interface name").value)
            while self.at(","):
                self.next()
                node.extends.append(self.expect_ident("interface name").value)
        self.expect("{")
        while not self.at("}"):
            member = self.parse_method_like(node.name, in_interface=True)
            node.methods.append(member)
        self.expect("}")
        return node

    def parse_member(self, node: TypeNode):
        if self.peek().value in _VISIBILITIES and self.peek().kind == "keyword":
            vis_tok = self.peek()
            if self.at("class", 1) or self.at("interface", 1):
                self.next()
                node.nested.append(self.parse_class() if self.at("class") else self.parse_interface())
                return
            vis = vis_tok.value
            self.next()
        elif self.at("class") or self.at("interface"):
            node.nested.append(self.parse_class() if self.at("class") else self.parse_interface())
            return
        else:
            vis = "package"

        is_static = False
        is_abstract = False
        while self.at("static") or self.at("abstract"):
            if self.at("static"):
                is_static = True
            else:
                is_abstract = True
            self.next()

        first = self.expect_ident("type or constructor name")
        if self.at("("):
            if first.value != node.name:
                raise ParseError(
                    Diagnostic(
                        "error",
                        first.pos,
                        f"constructor name {first.value!r} does not match class {node.name!r}",
                    )
                )
            method = self.finish_method(
                pos=first.pos,
                visibility=vis,
                return_type="void",
                name=first.value,
                is_static=is_static,
                is_abstract=is_abstract,
                is_constructor=True,
                in_interface=False,
            )
            node.methods.append(method)
            return

        second = self.expect_ident("member name")
        if self.at("("):
            method = self.finish_method(
                pos=first.pos,
                visibility=vis,
                return_type=first.value,
                name=second.value,
                is_static=is_static,
                is_abstract=is_abstract,
                is_constructor=False,
                in_interface=False,
            )
            node.methods.append(method)
            return
        self.expect(";")
        node.fields.append(
            FieldNode(
                pos=first.pos,
                visibility=vis,
                declared_type=first.value,
                name=second.value,
                is_static=is_static,
            )
        )

    def parse_method_like(self, owner_name: str, in_interface: bool) -> MethodNode:
        # Interface member: optional visibility then a plain signature.
        if self.peek().value in _VISIBILITIES and self.peek().kind == "keyword":
            vis = self.next().value
        else:
            vis = "public"
        ret = self.expect_ident("return type")
        name = self.expect_ident("method name")
        return self.finish_method(
            pos=name.pos,
            visibility=vis,
            return_type=ret.value,
            name=name.value,
            is_static=False,
            is_abstract=True,
            is_constructor=False,
            in_interface=True,
        )

    def finish_method(
        self,
        pos: Position,
        visibility: str,
        return_type: str,
        name: str,
        is_static: bool,
        is_abstract: bool,
        is_constructor: bool,
        in_interface: bool,
    ) -> MethodNode:
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            while True:
                ptype = self.expect_ident("parameter type")
                pname = self.expect_ident("parameter name")
                params.append(Param(ptype.value, pname.value))
                if not self.at(","):
                    break
                self.next()
        self.expect(")")
        throws: list[str] = []
        if self.at("throws"):
            self.next()
            throws.append(self.expect_ident("exception name").value)
            while self.at(","):
                self.next()
                throws.append(self.expect_ident("exception name").value)
        if self.at(";"):
            self.next()
            body = None
            is_abstract = True
        else:
            if in_interface:
                raise self.fail("interface methods cannot have bodies")
            body = self.parse_block()
        return MethodNode(
            pos=pos,
            visibility=visibility,
            return_type=return_type,
            name=name,
            params=params,
            throws=throws,
            body=body,
            is_static=is_static,
            is_abstract=is_abstract,
            is_constructor=is_constructor,
        )

    # -- statements --------------------------------------------------------

    def parse_block(self) -> list[Stmt]:
        self.expect("{")
        body: list[Stmt] = []
        while not self.at("}"):
            body.append(self.parse_stmt())
        self.expect("}")
        return body

    def parse_stmt(self) -> Stmt:
        tok = self.peek()
        if self.at("return"):
            self.next()
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return ReturnStmt(tok.pos, value)
        if self.at("throw"):
            self.next()
            value = self.parse_expr()
            self.expect(";")
            return ThrowStmt(tok.pos, value)
        if self.at("if"):
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then_body = self.parse_block()
            else_body = None
            if self.at("else"):
                self.next()
                else_body = self.parse_block()
            return IfStmt(tok.pos, cond, then_body, else_body)
        if self.at("try"):
            self.next()
            body = self.parse_block()
            self.expect("catch")
            self.expect("(")
            exc_type = self.expect_ident("exception type").value
            exc_name = self.expect_ident("exception variable").value
            self.expect(")")
            handler = self.parse_block()
            return TryStmt(tok.pos, body, exc_type, exc_name, handler)
        if tok.kind == "ident" and self.peek(1).kind == "ident" and self.at("=", 2):
            declared_type = self.next().value
            name = self.next().value
            self.expect("=")
            init = self.parse_expr()
            self.expect(";")
            return LocalDecl(tok.pos, declared_type, name, init)
        if tok.kind == "ident" and self.at("=", 1):
            name = self.next().value
            self.expect("=")
            value = self.parse_expr()
            self.expect(";")
            return Assign(tok.pos, name, value)
        expr = self.parse_expr()
        self.expect(";")
        return ExprStmt(tok.pos, expr)

    # -- expressions --------------------------------------------------------

    def parse_expr(self):
        left = self.parse_postfix()
        if self.at("==") or self.at("!="):
            op = self.next().value
            right = self.parse_postfix()
            return BinaryExpr(left.pos, op, left, right)
        return left

    def parse_postfix(self):
        expr = self.parse_primary()
        while self.at("."):
            self.next()
            name = self.expect_ident("method name")
            self.expect("(")
            args = self.parse_args()
            self.expect(")")
            expr = CallExpr(name.pos, expr, name.value, args)
        return expr

    def parse_args(self):
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_expr())
                if not self.at(","):
                    break
                self.next()
        return args

    def parse_primary(self):
        tok = self.peek()
        if self.at("new"):
            self.next()
            type_name = self.expect_ident("type name")
            self.expect("(")
            args = self.parse_args()
            self.expect(")")
            body = None
            if self.at("{"):
                body = self.parse_anon_body(type_name.value)
            return NewExpr(tok.pos, type_name.value, args, body)
        if self.at("this"):
            self.next()
            return This(tok.pos)
        if self.at("super"):
            self.next()
            return Super(tok.pos)
        if self.at("null"):
            self.next()
            return NullLit(tok.pos)
        if self.at("true") or self.at("false"):
            word = self.next()
            return BoolLit(tok.pos, word.value == "true")
        if tok.kind == "int":
            self.next()
            return IntLit(tok.pos, int(tok.value))
        if tok.kind == "string":
            self.next()
            return StrLit(tok.pos, tok.value)
        if self.at("("):
            self.next()
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.kind == "ident":
            self.next()
            if self.at("("):
                self.next()
                args = self.parse_args()
                self.expect(")")
                return CallExpr(tok.pos, None, tok.value, args)
            return Name(tok.pos, tok.value)
        raise self.fail(f"expected expression, found {tok.value!r}")

    def parse_anon_body(self, supertype: str) -> list:
        """Members of an anonymous ``new T() { ... }`` class."""
        holder = TypeNode(pos=self.peek().pos, name="", kind="class")
        self.expect("{")
        while not self.at("}"):
            self.parse_member(holder)
        self.expect("}")
        if holder.nested:
            raise self.fail("anonymous classes cannot declare nested types")
        return [holder]
