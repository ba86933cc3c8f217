"""IMPX: a small imperative language with Java-like syntax.

Only int scalars and int arrays exist.  Every executable statement sits on
its own source line, which is what lets line spectra and statement spectra
coincide.  The module provides a lexer, a recursive-descent parser, a static
checker (declarations, types, reachability) and a line-preserving pretty
printer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

INT = "int"
INT_ARRAY = "int[]"

BUILTINS = {"len": ((INT_ARRAY,), INT)}


class ImpxError(Exception):
    """Base class for errors located in IMPX source."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)


class ImpxSyntaxError(ImpxError):
    pass


class ImpxStaticError(ImpxError):
    pass


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class ArrayLit:
    items: tuple


@dataclass(frozen=True)
class NewArray:
    size: "Expr"


@dataclass(frozen=True)
class Index:
    array: str
    index: "Expr"


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IncDec:
    op: str  # "++" or "--"
    prefix: bool
    name: str


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Var, ArrayLit, NewArray, Index, Unary, Binary, IncDec, Call]


@dataclass(frozen=True)
class VarDecl:
    type: str
    name: str
    init: Expr
    line: int
    kind = "decl-assign"


@dataclass(frozen=True)
class Assign:
    name: str
    op: str  # "=", "+=", "-=", "*="
    value: Expr
    line: int
    kind = "assign"


@dataclass(frozen=True)
class ArrayStore:
    array: str
    index: Expr
    op: str
    value: Expr
    line: int
    kind = "array-store"


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple
    orelse: Optional[tuple]
    line: int

    @property
    def kind(self) -> str:
        return "if" if self.orelse is None else "if-else"


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple
    line: int
    kind = "while"


@dataclass(frozen=True)
class Return:
    value: Expr
    line: int
    kind = "return"


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    line: int
    kind = "expr-stmt"


Statement = Union[VarDecl, Assign, ArrayStore, If, While, Return, ExprStmt]


@dataclass(frozen=True)
class Param:
    name: str
    type: str


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple
    body: tuple
    signature_line: int

    def statements(self) -> list[Statement]:
        """All statements in source order, nested ones included."""
        return list(walk_statements(self.body))


@dataclass(frozen=True)
class Program:
    functions: tuple
    source_path: str = "<string>"

    def function(self, name: str) -> Function:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(f"unknown function {name!r}")

    @property
    def function_names(self) -> list[str]:
        return [fn.name for fn in self.functions]


def walk_statements(stmts: Sequence[Statement]) -> Iterator[Statement]:
    for stmt in stmts:
        yield stmt
        if isinstance(stmt, If):
            yield from walk_statements(stmt.then)
            if stmt.orelse is not None:
                yield from walk_statements(stmt.orelse)
        elif isinstance(stmt, While):
            yield from walk_statements(stmt.body)


def executable_lines(program: Program, function: str) -> list[int]:
    fn = program.function(function)
    return sorted(stmt.line for stmt in fn.statements())


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\+\+|--|\+=|-=|\*=|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){}\[\];,])
    """,
    re.VERBOSE | re.DOTALL,
)

KEYWORDS = {"int", "if", "else", "while", "return", "new"}


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "kw", "op", "eof"
    text: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ImpxSyntaxError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "block":
            newlines = text.count("\n")
            if newlines:
                line += newlines
                line_start = pos + text.rfind("\n") + 1
        elif kind in ("num", "op"):
            tokens.append(Token(kind, text, line, col))
        elif kind == "ident":
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("expected identifier")
        return self.advance()

    def error(self, message: str):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ImpxSyntaxError(f"{message}, found {found}", tok.line, tok.column)

    # -- declarations --

    def program(self) -> list[Function]:
        functions = []
        while self.tok.kind != "eof":
            functions.append(self.function())
        return functions

    def type_(self) -> str:
        self.expect("int")
        if self.at("["):
            self.advance()
            self.expect("]")
            return INT_ARRAY
        return INT

    def function(self) -> Function:
        sig = self.tok
        ret = self.type_()
        if ret != INT:
            raise ImpxSyntaxError("functions must return int", sig.line, sig.column)
        name = self.expect_ident().text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                ptype = self.type_()
                params.append(Param(self.expect_ident().text, ptype))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        body = self.block()
        return Function(name, tuple(params), tuple(body), sig.line)

    def block(self) -> list[Statement]:
        opening = self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise ImpxSyntaxError(
                    f"unbalanced '{{' opened on line {opening.line}", self.tok.line, self.tok.column
                )
            stmts.append(self.statement())
        self.advance()
        return stmts

    def body(self) -> list[Statement]:
        if self.at("{"):
            return self.block()
        return [self.statement()]

    # -- statements --

    def statement(self) -> Statement:
        tok = self.tok
        line = tok.line
        if self.at("int"):
            vtype = self.type_()
            name = self.expect_ident().text
            if not self.at("="):
                self.error("declarations need an initializer")
            self.advance()
            init = self.expr()
            self.expect(";")
            return VarDecl(vtype, name, init, line)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.body()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = tuple(self.body())
            return If(cond, tuple(then), orelse, line)
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, tuple(self.body()), line)
        if self.at("return"):
            self.advance()
            value = self.expr()
            self.expect(";")
            return Return(value, line)
        if self.at("{"):
            self.error("nested blocks are only allowed as if/while bodies")
        if tok.kind == "ident" and self.peek().text in ("=", "+=", "-=", "*="):
            self.advance()
            op = self.advance().text
            value = self.expr()
            self.expect(";")
            return Assign(tok.text, op, value, line)
        if tok.kind == "ident" and self.peek().text == "[":
            # Either an array store or an expression statement starting with an index.
            save = self.pos
            self.advance()
            self.advance()
            index = self.expr()
            self.expect("]")
            if self.tok.text in ("=", "+=", "-=", "*="):
                op = self.advance().text
                value = self.expr()
                self.expect(";")
                return ArrayStore(tok.text, index, op, value, line)
            self.pos = save
        expr = self.expr()
        if not isinstance(expr, (IncDec, Call)):
            raise ImpxSyntaxError("expression statement must be an increment, decrement or call", line, tok.column)
        self.expect(";")
        return ExprStmt(expr, line)

    # -- expressions --

    def expr(self, level: int = 0) -> Expr:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_LEVELS[level]:
            op = self.advance().text
            right = self.expr(level + 1)
            left = Binary(op, left, right)
        return left

    def unary(self) -> Expr:
        if self.at("-") or self.at("!"):
            op = self.advance().text
            operand = self.unary()
            if op == "-" and isinstance(operand, Num):
                return Num(-operand.value)
            return Unary(op, operand)
        if self.at("++") or self.at("--"):
            op = self.advance().text
            return IncDec(op, True, self.expect_ident().text)
        return self.postfix()

    def postfix(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(int(tok.text))
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        if self.at("["):
            self.advance()
            items = []
            if not self.at("]"):
                while True:
                    items.append(self.expr())
                    if not self.at(","):
                        break
                    self.advance()
            self.expect("]")
            return ArrayLit(tuple(items))
        if self.at("new"):
            self.advance()
            self.expect("int")
            self.expect("[")
            size = self.expr()
            self.expect("]")
            return NewArray(size)
        if tok.kind != "ident":
            self.error("expected expression")
        self.advance()
        if self.at("("):
            self.advance()
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.expr())
                    if not self.at(","):
                        break
                    self.advance()
            self.expect(")")
            return Call(tok.text, tuple(args))
        if self.at("["):
            self.advance()
            index = self.expr()
            self.expect("]")
            return Index(tok.text, index)
        if self.at("++") or self.at("--"):
            return IncDec(self.advance().text, False, tok.text)
        return Var(tok.text)


# ---------------------------------------------------------------------------
# Static checks
# ---------------------------------------------------------------------------


class _Checker:
    def __init__(self, functions: Sequence[Function]):
        self.signatures = {}
        for fn in functions:
            if fn.name in self.signatures or fn.name in BUILTINS:
                raise ImpxStaticError(f"duplicate function name {fn.name!r}", fn.signature_line, 1)
            self.signatures[fn.name] = (tuple(p.type for p in fn.params), INT)

    def check_function(self, fn: Function) -> None:
        scope: dict[str, str] = {}
        for p in fn.params:
            if p.name in scope:
                raise ImpxStaticError(f"duplicate parameter {p.name!r}", fn.signature_line, 1)
            scope[p.name] = p.type
        lines: dict[int, Statement] = {}
        for stmt in fn.statements():
            if stmt.line in lines:
                raise ImpxStaticError("more than one executable statement on this line", stmt.line, 1)
            lines[stmt.line] = stmt
        self.check_block(fn.body, [scope])

    def lookup(self, scopes, name: str, line: int) -> str:
        for scope in reversed(scopes):
            if name in scope:
                return scope[name]
        raise ImpxStaticError(f"use of undeclared variable {name!r}", line, 1)

    def check_block(self, stmts, scopes) -> bool:
        """Check a statement list; return whether it can complete normally."""
        scopes = scopes + [{}]
        live = True
        for stmt in stmts:
            if not live:
                raise ImpxStaticError("unreachable statement", stmt.line, 1)
            live = self.check_stmt(stmt, scopes)
        return live

    def check_stmt(self, stmt: Statement, scopes) -> bool:
        line = stmt.line
        if isinstance(stmt, VarDecl):
            self.expect_type(stmt.init, stmt.type, scopes, line)
            for scope in scopes:
                if stmt.name in scope:
                    raise ImpxStaticError(f"variable {stmt.name!r} is already declared", line, 1)
            scopes[-1][stmt.name] = stmt.type
            return True
        if isinstance(stmt, Assign):
            vtype = self.lookup(scopes, stmt.name, line)
            if stmt.op != "=" and vtype != INT:
                raise ImpxStaticError(f"compound assignment to array {stmt.name!r}", line, 1)
            self.expect_type(stmt.value, vtype, scopes, line)
            return True
        if isinstance(stmt, ArrayStore):
            if self.lookup(scopes, stmt.array, line) != INT_ARRAY:
                raise ImpxStaticError(f"{stmt.array!r} is not an array", line, 1)
            self.expect_type(stmt.index, INT, scopes, line)
            self.expect_type(stmt.value, INT, scopes, line)
            return True
        if isinstance(stmt, If):
            self.expect_type(stmt.cond, INT, scopes, line)
            then_live = self.check_block(stmt.then, scopes)
            else_live = True if stmt.orelse is None else self.check_block(stmt.orelse, scopes)
            return then_live or else_live
        if isinstance(stmt, While):
            self.expect_type(stmt.cond, INT, scopes, line)
            self.check_block(stmt.body, scopes)
            return True
        if isinstance(stmt, Return):
            self.expect_type(stmt.value, INT, scopes, line)
            return False
        self.type_of(stmt.expr, scopes, line)
        return True

    def expect_type(self, expr: Expr, want: str, scopes, line: int) -> None:
        got = self.type_of(expr, scopes, line)
        if got != want:
            raise ImpxStaticError(f"expected {want} expression, got {got}", line, 1)

    def type_of(self, expr: Expr, scopes, line: int) -> str:
        if isinstance(expr, Num):
            return INT
        if isinstance(expr, Var):
            return self.lookup(scopes, expr.name, line)
        if isinstance(expr, ArrayLit):
            for item in expr.items:
                self.expect_type(item, INT, scopes, line)
            return INT_ARRAY
        if isinstance(expr, NewArray):
            self.expect_type(expr.size, INT, scopes, line)
            return INT_ARRAY
        if isinstance(expr, Index):
            if self.lookup(scopes, expr.array, line) != INT_ARRAY:
                raise ImpxStaticError(f"{expr.array!r} is not an array", line, 1)
            self.expect_type(expr.index, INT, scopes, line)
            return INT
        if isinstance(expr, IncDec):
            if self.lookup(scopes, expr.name, line) != INT:
                raise ImpxStaticError(f"{expr.op} applies only to int variables", line, 1)
            return INT
        if isinstance(expr, Unary):
            self.expect_type(expr.operand, INT, scopes, line)
            return INT
        if isinstance(expr, Binary):
            self.expect_type(expr.left, INT, scopes, line)
            self.expect_type(expr.right, INT, scopes, line)
            return INT
        if isinstance(expr, Call):
            sig = self.signatures.get(expr.name) or BUILTINS.get(expr.name)
            if sig is None:
                raise ImpxStaticError(f"call to unknown function {expr.name!r}", line, 1)
            ptypes, ret = sig
            if len(ptypes) != len(expr.args):
                raise ImpxStaticError(
                    f"{expr.name!r} takes {len(ptypes)} arguments, got {len(expr.args)}", line, 1
                )
            for arg, ptype in zip(expr.args, ptypes):
                self.expect_type(arg, ptype, scopes, line)
            return ret
        raise TypeError(expr)


def parse(source: str, source_path: str = "<string>") -> Program:
    """Parse and statically check IMPX source."""
    functions = _Parser(tokenize(source)).program()
    checker = _Checker(functions)
    for fn in functions:
        checker.check_function(fn)
    return Program(tuple(functions), source_path)


def parse_file(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), str(path))


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

_PRECEDENCE = {op: i for i, ops in enumerate(_BINARY_LEVELS) for op in ops}


def format_expr(expr: Expr, parent: int = -1) -> str:
    if isinstance(expr, Num):
        return str(expr.value) if expr.value >= 0 else f"({expr.value})"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, ArrayLit):
        return "[" + ", ".join(format_expr(i) for i in expr.items) + "]"
    if isinstance(expr, NewArray):
        return f"new int[{format_expr(expr.size)}]"
    if isinstance(expr, Index):
        return f"{expr.array}[{format_expr(expr.index)}]"
    if isinstance(expr, IncDec):
        return f"{expr.op}{expr.name}" if expr.prefix else f"{expr.name}{expr.op}"
    if isinstance(expr, Unary):
        return f"{expr.op}({format_expr(expr.operand)})"
    if isinstance(expr, Call):
        return f"{expr.name}(" + ", ".join(format_expr(a) for a in expr.args) + ")"
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        # Left-associative: the right operand needs parentheses at equal precedence.
        text = f"{format_expr(expr.left, prec - 1)} {expr.op} {format_expr(expr.right, prec)}"
        return f"({text})" if prec <= parent else text
    raise TypeError(expr)


class _Printer:
    """Emit text so that each statement lands on its original line."""

    def __init__(self):
        self.lines: list[str] = [""]

    def goto(self, line: int) -> None:
        while len(self.lines) < line:
            self.lines.append("")

    def emit(self, text: str) -> None:
        cur = self.lines[-1]
        self.lines[-1] = f"{cur} {text}" if cur.strip() else cur + text

    def stmt(self, stmt: Statement, depth: int) -> None:
        self.goto(stmt.line)
        if not self.lines[-1]:
            self.lines[-1] = "  " * depth
        if isinstance(stmt, VarDecl):
            self.emit(f"{stmt.type} {stmt.name} = {format_expr(stmt.init)};")
        elif isinstance(stmt, Assign):
            self.emit(f"{stmt.name} {stmt.op} {format_expr(stmt.value)};")
        elif isinstance(stmt, ArrayStore):
            self.emit(f"{stmt.array}[{format_expr(stmt.index)}] {stmt.op} {format_expr(stmt.value)};")
        elif isinstance(stmt, Return):
            self.emit(f"return {format_expr(stmt.value)};")
        elif isinstance(stmt, ExprStmt):
            self.emit(f"{format_expr(stmt.expr)};")
        elif isinstance(stmt, If):
            self.emit(f"if ({format_expr(stmt.cond)}) {{")
            self.body(stmt.then, depth)
            if stmt.orelse is not None:
                self.emit("} else {")
                self.body(stmt.orelse, depth)
            self.emit("}")
        elif isinstance(stmt, While):
            self.emit(f"while ({format_expr(stmt.cond)}) {{")
            self.body(stmt.body, depth)
            self.emit("}")

    def body(self, stmts, depth: int) -> None:
        for s in stmts:
            self.stmt(s, depth + 1)

    def function(self, fn: Function) -> None:
        self.goto(fn.signature_line)
        params = ", ".join(f"{p.type} {p.name}" for p in fn.params)
        self.emit(f"int {fn.name}({params}) {{")
        self.body(fn.body, 0)
        self.emit("}")


def pretty(program: Program) -> str:
    """Render a program; parsing the result yields an identical AST."""
    printer = _Printer()
    for fn in program.functions:
        printer.function(fn)
    return "\n".join(printer.lines) + "\n"
