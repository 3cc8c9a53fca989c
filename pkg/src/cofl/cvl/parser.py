"""Recursive-descent parser for CVL and extraction of the program model.

Parsing happens in two passes. The first builds a syntax tree in which every
statement carries a source-ordered id and the stack of guard literals active
at its position. The second resolves names and derives def/use facts,
producing a :class:`~cofl.model.ProgramModel`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..model import (
    GLOBAL,
    DefKind,
    Entity,
    FeatureLiteral,
    ProgramModel,
    Span,
    Statement,
)
from . import ast as A
from .lexer import LexError, Token, tokenize
from .printer import _PREC, header_str

ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>=".split())
_COND = re.compile(r"^(!)?\s*(?:defined\s*\(\s*(\w+)\s*\)|defined\s+(\w+)|(\w+))$")


@dataclass(frozen=True)
class SourceUnit:
    path: str
    text: str


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    file: str
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.severity}: {self.message}"


class ParseError(Exception):
    """Raised when a source unit has error diagnostics; no model is built."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class _Abort(Exception):
    pass


@dataclass
class _Guard:
    literal: FeatureLiteral
    line: int
    in_else: bool = False


class _Parser:
    def __init__(self, path: str, tokens: list[Token], first_sid: int):
        self.path = path
        self.toks = tokens
        self.i = 0
        self.sid = first_sid
        self.guards: list[_Guard] = []
        self.floors: list[int] = [0]
        self.loop_depth = 0
        self.switch_depth = 0
        self.declared: list[FeatureLiteral] = []
        self.diags: list[Diagnostic] = []

    # -- token helpers ---------------------------------------------------
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, value: str, kind: str | None = None) -> bool:
        t = self.peek()
        return t.value == value and (kind is None or t.kind == kind) and t.kind in ("op", "kw")

    def error(self, tok: Token, message: str) -> _Abort:
        self.diags.append(Diagnostic("error", self.path, tok.line, tok.col, message))
        return _Abort()

    def unexpected(self, tok: Token, wanted: str) -> _Abort:
        if tok.kind == "pp":
            return self.error(tok, "preprocessor directive inside a statement")
        if tok.kind == "eof":
            return self.error(tok, f"expected {wanted}, found end of file")
        if tok.kind == "end_define":
            return self.error(tok, f"expected {wanted}, found end of #define")
        return self.error(tok, f"expected {wanted}, found {tok.value!r}")

    def expect(self, value: str) -> Token:
        t = self.peek()
        if t.kind in ("op", "kw") and t.value == value:
            return self.advance()
        raise self.unexpected(t, repr(value))

    def ident(self) -> Token:
        t = self.peek()
        if t.kind != "id":
            raise self.unexpected(t, "identifier")
        return self.advance()

    def stamp(self, node: A.Node, first: Token, last: Token | None = None) -> A.Node:
        last = last or self.toks[self.i - 1]
        node.sid = self.sid
        self.sid += 1
        node.line_start = first.line
        node.line_end = max(first.line, last.line)
        node.pc_stack = tuple(g.literal for g in self.guards)
        return node

    # -- units and statement lists ----------------------------------------
    def unit(self) -> list[A.Node]:
        body: list[A.Node] = []
        self.items(body, top=True)
        t = self.peek()
        if t.kind != "eof":
            raise self.unexpected(t, "declaration")
        if self.guards:
            g = self.guards[-1]
            raise self.error(Token("pp", "", g.line, 1), f"unterminated conditional for {g.literal.option}")
        return body

    def items(self, out: list[A.Node], *, top: bool = False) -> None:
        while True:
            t = self.peek()
            if t.kind == "pp":
                self.directive(out, top)
            elif t.kind == "eof" or (t.kind == "op" and t.value == "}"):
                return
            elif t.kind == "kw" and t.value in ("case", "default") and self.switch_depth:
                return
            elif top:
                self.top_item(out)
            else:
                self.statement(out)

    def directive(self, out: list[A.Node], top: bool) -> None:
        tok = self.advance()
        word, _, rest = tok.value.partition(" ")
        rest = rest.strip()
        if word == "define":
            if not top:
                raise self.error(tok, "#define is only allowed at file scope")
            name = self.ident().value
            if self.peek().kind == "end_define":
                raise self.error(self.peek(), f"#define {name} has no value")
            value = self.expr()
            end = self.peek()
            if end.kind != "end_define":
                raise self.unexpected(end, "end of #define")
            self.advance()
            node = A.Define(name=name, value=value)
            self.stamp(node, tok, tok)
            out.append(node)
        elif word in ("ifdef", "ifndef", "if"):
            lit = self._guard_literal(tok, word, rest)
            for g in self.guards:
                if g.literal.option == lit.option and g.literal.polarity != lit.polarity:
                    raise self.error(tok, f"contradictory nested guard on {lit.option}")
            self.guards.append(_Guard(lit, tok.line))
            self.declared.append(lit)
        elif word == "else":
            if len(self.guards) <= self.floors[-1]:
                raise self.error(tok, "#else without matching conditional in this block")
            g = self.guards[-1]
            if g.in_else:
                raise self.error(tok, "duplicate #else")
            lit = g.literal.negated()
            for other in self.guards[:-1]:
                if other.literal.option == lit.option and other.literal.polarity != lit.polarity:
                    raise self.error(tok, f"contradictory nested guard on {lit.option}")
            self.guards[-1] = _Guard(lit, g.line, True)
            self.declared.append(lit)
        elif word == "endif":
            if len(self.guards) <= self.floors[-1]:
                raise self.error(tok, "#endif without matching conditional in this block")
            self.guards.pop()
        else:
            raise self.error(tok, f"unsupported directive #{word}")

    def _guard_literal(self, tok: Token, word: str, rest: str) -> FeatureLiteral:
        if word in ("ifdef", "ifndef"):
            if not re.fullmatch(r"[A-Za-z_]\w*", rest):
                raise self.error(tok, f"#{word} needs a single option name")
            return FeatureLiteral(rest, word == "ifdef")
        m = _COND.match(rest)
        if not m:
            raise self.error(tok, f"unsupported #if condition {rest!r}")
        name = m.group(2) or m.group(3) or m.group(4)
        return FeatureLiteral(name, m.group(1) is None)

    def body(self) -> list[A.Node]:
        if self.at("{"):
            return self.block_checked()
        out: list[A.Node] = []
        self.statement(out)
        return out

    def block_checked(self) -> list[A.Node]:
        depth = len(self.guards)
        self.expect("{")
        self.floors.append(depth)
        body: list[A.Node] = []
        self.items(body)
        close = self.expect("}")
        self.floors.pop()
        if len(self.guards) != depth:
            raise self.error(close, "conditional region crosses a block boundary")
        return body

    # -- top level -------------------------------------------------------
    def top_item(self, out: list[A.Node]) -> None:
        t = self.peek()
        if not (t.kind == "kw" and t.value in ("int", "void")):
            raise self.unexpected(t, "declaration")
        if self.peek(1).kind == "id" and self.peek(2).kind == "op" and self.peek(2).value == "(":
            out.append(self.function())
            return
        if t.value == "void":
            raise self.error(t, "variables cannot have type void")
        node = self.declaration()
        self.expect(";")
        self.stamp(node, t)
        out.append(node)

    def function(self) -> A.FuncDef:
        first = self.advance()
        name = self.ident().value
        self.expect("(")
        params: list[str] = []
        if self.at("void") and self.peek(1).value == ")":
            self.advance()
        elif not self.at(")"):
            while True:
                self.expect("int")
                params.append(self.ident().value)
                if not self.at(","):
                    break
                self.advance()
        if len(set(params)) != len(params):
            raise self.error(first, f"duplicate parameter in {name}")
        self.expect(")")
        node = A.FuncDef(ret=first.value, name=name, params=params)
        self.stamp(node, first)
        node.body = self.block_checked()
        return node

    def declaration(self) -> A.Decl:
        self.expect("int")
        name = self.ident().value
        node = A.Decl(name=name)
        if self.at("["):
            self.advance()
            node.size = self.expr()
            self.expect("]")
        if self.at("="):
            self.advance()
            node.init = self.expr()
        return node

    # -- statements ------------------------------------------------------
    def statement(self, out: list[A.Node]) -> None:
        t = self.peek()
        if t.kind == "pp":
            raise self.unexpected(t, "statement")
        if t.kind == "op" and t.value == "{":
            out.extend(self.block_checked())
            return
        if t.kind == "op" and t.value == ";":
            self.advance()
            return
        if t.kind == "kw":
            handler = getattr(self, f"stmt_{t.value}", None)
            if handler is None:
                raise self.error(t, f"unexpected {t.value!r}")
            out.append(handler())
            return
        node = self.simple()
        self.expect(";")
        self.stamp(node, t)
        out.append(node)

    def stmt_int(self) -> A.Node:
        first = self.peek()
        node = self.declaration()
        self.expect(";")
        return self.stamp(node, first)

    def stmt_if(self) -> A.Node:
        first = self.advance()
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        node = A.If(cond=cond)
        self.stamp(node, first)
        node.then = self.body()
        if self.at("else"):
            self.advance()
            if self.at("if"):
                node.orelse = [self.stmt_if()]
            else:
                node.orelse = self.body()
        return node

    def _loop_body(self) -> list[A.Node]:
        self.loop_depth += 1
        try:
            return self.body()
        finally:
            self.loop_depth -= 1

    def stmt_while(self) -> A.Node:
        first = self.advance()
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        node = A.While(cond=cond)
        self.stamp(node, first)
        node.body = self._loop_body()
        return node

    def stmt_do(self) -> A.Node:
        self.advance()
        body = self._loop_body()
        first = self.expect("while")
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        self.expect(";")
        node = A.DoWhile(body=body, cond=cond)
        return self.stamp(node, first)

    def stmt_for(self) -> A.Node:
        first = self.advance()
        self.expect("(")
        node = A.For()
        if not self.at(";"):
            node.init = self.simple(allow_decl=True)
        self.expect(";")
        if not self.at(";"):
            node.cond = self.expr()
        self.expect(";")
        if not self.at(")"):
            node.step = self.simple()
        self.expect(")")
        self.stamp(node, first)
        node.body = self._loop_body()
        return node

    def stmt_switch(self) -> A.Node:
        first = self.advance()
        self.expect("(")
        expr = self.expr()
        self.expect(")")
        node = A.Switch(expr=expr)
        self.stamp(node, first)
        self.expect("{")
        depth = len(self.guards)
        self.floors.append(depth)
        self.switch_depth += 1
        self.loop_depth += 1  # break is legal inside a switch
        seen: set = set()
        try:
            while not self.at("}"):
                t = self.peek()
                if t.kind == "pp":
                    self.directive([], False)
                    continue
                if len(self.guards) != depth:
                    raise self.error(t, "case label inside a conditional region")
                if self.at("case"):
                    self.advance()
                    neg = self.at("-")
                    if neg:
                        self.advance()
                    num = self.peek()
                    if num.kind != "num":
                        raise self.unexpected(num, "integer case label")
                    self.advance()
                    value = -int(num.value, 0) if neg else int(num.value, 0)
                elif self.at("default"):
                    self.advance()
                    value = None
                else:
                    raise self.unexpected(t, "case label")
                if value in seen:
                    raise self.error(t, "duplicate case label")
                seen.add(value)
                self.expect(":")
                case = A.Case(value)
                self.items(case.body)
                node.cases.append(case)
        finally:
            self.switch_depth -= 1
            self.loop_depth -= 1
        close = self.expect("}")
        self.floors.pop()
        if len(self.guards) != depth:
            raise self.error(close, "conditional region crosses a block boundary")
        return node

    def stmt_return(self) -> A.Node:
        first = self.advance()
        value = None if self.at(";") else self.expr()
        self.expect(";")
        return self.stamp(A.Return(value=value), first)

    def stmt_break(self) -> A.Node:
        first = self.advance()
        if not self.loop_depth:
            raise self.error(first, "break outside loop or switch")
        self.expect(";")
        return self.stamp(A.Break(), first)

    def stmt_continue(self) -> A.Node:
        first = self.advance()
        if self.loop_depth <= self.switch_depth:
            raise self.error(first, "continue outside loop")
        self.expect(";")
        return self.stamp(A.Continue(), first)

    def simple(self, allow_decl: bool = False) -> A.Node:
        t = self.peek()
        if allow_decl and t.kind == "kw" and t.value == "int":
            return self.declaration()
        if t.kind == "op" and t.value in ("++", "--"):
            self.advance()
            target = self.lvalue(self.postfix())
            return A.IncDec(target=target, op=t.value)
        e = self.expr()
        nxt = self.peek()
        if nxt.kind == "op" and nxt.value in ASSIGN_OPS:
            target = self.lvalue(e, nxt)
            self.advance()
            return A.Assign(target=target, op=nxt.value, value=self.expr())
        if nxt.kind == "op" and nxt.value in ("++", "--"):
            target = self.lvalue(e, nxt)
            self.advance()
            return A.IncDec(target=target, op=nxt.value)
        return A.ExprStmt(expr=e)

    def lvalue(self, e: A.Expr, tok: Token | None = None):
        if isinstance(e, (A.Name, A.Index)):
            return e
        raise self.error(tok or self.peek(), "assignment target must be a variable or array element")

    # -- expressions -----------------------------------------------------
    def expr(self) -> A.Expr:
        cond = self.binary(1)
        if self.at("?"):
            self.advance()
            then = self.expr()
            self.expect(":")
            return A.Ternary(cond, then, self.expr())
        return cond

    def binary(self, min_prec: int) -> A.Expr:
        left = self.unary()
        while True:
            t = self.peek()
            p = _PREC.get(t.value) if t.kind == "op" else None
            if p is None or p < min_prec:
                return left
            self.advance()
            left = A.Binary(t.value, left, self.binary(p + 1))

    def unary(self) -> A.Expr:
        t = self.peek()
        if t.kind == "op" and t.value in ("!", "-", "~", "+"):
            self.advance()
            return A.Unary(t.value, self.unary())
        return self.postfix()

    def postfix(self) -> A.Expr:
        t = self.peek()
        if t.kind == "num":
            self.advance()
            return A.Num(int(t.value, 0))
        if t.kind == "op" and t.value == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind != "id":
            raise self.unexpected(t, "expression")
        self.advance()
        name = A.Name(t.value)
        if self.at("("):
            self.advance()
            args: list[A.Expr] = []
            if not self.at(")"):
                args.append(self.expr())
                while self.at(","):
                    self.advance()
                    args.append(self.expr())
            self.expect(")")
            return A.Call(name, args)
        if self.at("["):
            self.advance()
            idx = self.expr()
            self.expect("]")
            return A.Index(name, idx)
        return name


# -- model extraction -----------------------------------------------------

_KIND = {
    A.Define: "define", A.Decl: "decl", A.Assign: "assign", A.IncDec: "incdec",
    A.ExprStmt: "expr", A.If: "if", A.While: "while", A.DoWhile: "do", A.For: "for",
    A.Switch: "switch", A.Return: "return", A.Break: "break", A.Continue: "continue",
    A.FuncDef: "function",
}


def _expr_names(e: A.Expr | None, called: set[str] | None = None) -> Iterable[str]:
    if e is None:
        return
    if isinstance(e, A.Name):
        yield e.name
    elif isinstance(e, A.Index):
        yield e.base.name
        yield from _expr_names(e.index, called)
    elif isinstance(e, A.Call):
        if called is not None:
            called.add(e.func.name)
        yield e.func.name
        for a in e.args:
            yield from _expr_names(a, called)
    elif isinstance(e, A.Unary):
        yield from _expr_names(e.operand, called)
    elif isinstance(e, A.Binary):
        yield from _expr_names(e.left, called)
        yield from _expr_names(e.right, called)
    elif isinstance(e, A.Ternary):
        for sub in (e.cond, e.then, e.other):
            yield from _expr_names(sub, called)


def _node_exprs(n: A.Node) -> list:
    """Expressions read by a statement, excluding assignment targets."""
    if isinstance(n, A.Define):
        return [n.value]
    if isinstance(n, A.Decl):
        return [n.size, n.init]
    if isinstance(n, A.Assign):
        out = [n.value]
        if isinstance(n.target, A.Index):
            out.append(n.target.index)
        if n.op != "=":
            out.append(n.target.base if isinstance(n.target, A.Index) else n.target)
        return out
    if isinstance(n, A.IncDec):
        out = [n.target.base if isinstance(n.target, A.Index) else n.target]
        if isinstance(n.target, A.Index):
            out.append(n.target.index)
        return out
    if isinstance(n, A.ExprStmt):
        return [n.expr]
    if isinstance(n, (A.If, A.While, A.DoWhile)):
        return [n.cond]
    if isinstance(n, A.For):
        out = [n.cond]
        for part in (n.init, n.step):
            if part is not None:
                out.extend(_node_exprs(part))
        return out
    if isinstance(n, A.Switch):
        return [n.expr]
    if isinstance(n, A.Return):
        return [n.value]
    return []


def _target_name(n: A.Node) -> tuple[str, DefKind] | None:
    if isinstance(n, A.Decl):
        return n.name, (DefKind.VALUE if n.init is not None else DefKind.UNINIT)
    if isinstance(n, (A.Assign, A.IncDec)):
        t = n.target
        return (t.base.name if isinstance(t, A.Index) else t.name), DefKind.VALUE
    return None


@dataclass
class _Scopes:
    functions: set[str] = field(default_factory=set)
    globals_: set[str] = field(default_factory=set)
    macros: set[str] = field(default_factory=set)
    called: set[str] = field(default_factory=set)
    locals_: dict[str, set[str]] = field(default_factory=dict)

    def kind(self, name: str) -> str:
        if name in self.functions:
            return "function"
        if name in self.macros:
            return "macro"
        if name in self.globals_:
            return "variable"
        return "function" if name in self.called else "variable"

    def resolve(self, name: str, fn: str | None) -> Entity:
        if fn is not None and name in self.locals_.get(fn, ()):
            return Entity(fn, name, "variable")
        return Entity(GLOBAL, name, self.kind(name))


def _collect_scopes(units: Sequence[A.Unit]) -> _Scopes:
    sc = _Scopes()
    for u in units:
        for n in u.body:
            if isinstance(n, A.FuncDef):
                sc.functions.add(n.name)
                names = sc.locals_.setdefault(n.name, set())
                names.update(n.params)
                for m in A.walk(n.body):
                    if isinstance(m, A.Decl):
                        names.add(m.name)
                    elif isinstance(m, A.For) and isinstance(m.init, A.Decl):
                        names.add(m.init.name)
            elif isinstance(n, A.Define):
                sc.macros.add(n.name)
            elif isinstance(n, A.Decl):
                sc.globals_.add(n.name)
        for m in A.walk(u.body):
            for e in _node_exprs(m):
                for _ in _expr_names(e, sc.called):
                    pass
    return sc


def _statement(n: A.Node, path: str, sc: _Scopes, fn: str | None, parent: int | None) -> Statement:
    defs: set[tuple[Entity, DefKind]] = set()
    uses: set[Entity] = set()
    if isinstance(n, A.FuncDef):
        defs.add((Entity(GLOBAL, n.name, "function"), DefKind.BODY))
        for p in n.params:
            defs.add((Entity(n.name, p, "variable"), DefKind.VALUE))
    elif isinstance(n, A.Define):
        defs.add((Entity(GLOBAL, n.name, "macro"), DefKind.VALUE))
    else:
        parts = [n]
        if isinstance(n, A.For):
            parts += [p for p in (n.init, n.step) if p is not None]
        for part in parts:
            target = _target_name(part)
            if target is not None:
                defs.add((sc.resolve(target[0], fn), target[1]))
    for e in _node_exprs(n):
        for name in _expr_names(e):
            uses.add(sc.resolve(name, fn))
    if fn is not None and not isinstance(n, A.FuncDef):
        defs.add((Entity(GLOBAL, fn, "function"), DefKind.BODY))
    return Statement(
        id=n.sid,
        span=Span(path, n.line_start, n.line_end),
        pc=frozenset(n.pc_stack),
        defs=frozenset(defs),
        uses=frozenset(uses),
        parent=parent,
        kind=_KIND[type(n)],
        text=header_str(n),
        function=fn if not isinstance(n, A.FuncDef) else n.name,
    )


def build_model(units: Sequence[A.Unit], features: Iterable[FeatureLiteral] = ()) -> ProgramModel:
    """Derive statements with presence conditions and def/use facts."""
    sc = _collect_scopes(units)
    stmts: list[Statement] = []

    def visit(nodes: list[A.Node], path: str, fn: str | None, parent: int | None) -> None:
        for n in nodes:
            if isinstance(n, A.FuncDef):
                stmts.append(_statement(n, path, sc, None, None))
                visit(n.body, path, n.name, None)
                continue
            stmts.append(_statement(n, path, sc, fn, parent))
            for block in A.children(n):
                visit(block, path, fn, n.sid)

    for u in units:
        visit(u.body, u.path, None, None)
    return ProgramModel(stmts, features=features)


@dataclass
class Program:
    """Parsed syntax trees together with the extracted model."""

    units: list[A.Unit]
    model: ProgramModel


def _as_units(sources) -> list[SourceUnit]:
    if isinstance(sources, str):
        return [SourceUnit("<input>", sources)]
    if isinstance(sources, SourceUnit):
        return [sources]
    out = []
    for s in sources:
        out.append(s if isinstance(s, SourceUnit) else SourceUnit(*s))
    return out


def parse_program(sources) -> Program:
    """Parse one or more source units.

    ``sources`` may be a string, a :class:`SourceUnit`, or a sequence of
    units or ``(path, text)`` pairs. Statement ids run in source order
    across units. Raises :class:`ParseError` if any unit has errors.
    """
    units: list[A.Unit] = []
    diags: list[Diagnostic] = []
    declared: list[FeatureLiteral] = []
    sid = 1
    for su in _as_units(sources):
        try:
            tokens = tokenize(su.text)
        except LexError as exc:
            diags.append(Diagnostic("error", su.path, exc.line, exc.col, str(exc)))
            continue
        p = _Parser(su.path, tokens, sid)
        try:
            body = p.unit()
        except _Abort:
            diags.extend(p.diags)
            continue
        sid = p.sid
        declared.extend(p.declared)
        units.append(A.Unit(su.path, body))
    if diags:
        raise ParseError(diags)
    return Program(units, build_model(units, declared))


def parse(sources) -> ProgramModel:
    return parse_program(sources).model


def parse_files(paths: Iterable[str]) -> Program:
    units = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            units.append(SourceUnit(str(path), fh.read()))
    return parse_program(units)


def lint_model(model: ProgramModel) -> list[Diagnostic]:
    """Warn about entities used but never defined and guards enclosing nothing."""
    warnings: list[Diagnostic] = []
    for e in sorted(model.use, key=str):
        if not model.defines(e):
            first = model[min(model.uses(e))]
            warnings.append(Diagnostic(
                "warning", first.span.file, first.span.line_start, 1,
                f"{e} is used but never defined",
            ))
    for f in sorted(model.features):
        if not model.phi_of(f):
            warnings.append(Diagnostic("warning", "<model>", 0, 0, f"feature {f} guards no statements"))
    return warnings
