"""Syntax tree for CVL, the small C subset with preprocessor feature guards."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..model import FeatureLiteral


# -- expressions ------------------------------------------------------------

@dataclass
class Num:
    value: int


@dataclass
class Name:
    name: str


@dataclass
class Index:
    base: Name
    index: "Expr"


@dataclass
class Call:
    func: Name
    args: list["Expr"]


@dataclass
class Unary:
    op: str
    operand: "Expr"


@dataclass
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"


Expr = Union[Num, Name, Index, Call, Unary, Binary, Ternary]


# -- statements -------------------------------------------------------------

@dataclass
class Node:
    sid: int = field(default=0, init=False)
    line_start: int = field(default=0, init=False)
    line_end: int = field(default=0, init=False)
    pc_stack: tuple[FeatureLiteral, ...] = field(default=(), init=False)


@dataclass
class Define(Node):
    name: str = ""
    value: Optional[Expr] = None


@dataclass
class Decl(Node):
    name: str = ""
    size: Optional[Expr] = None
    init: Optional[Expr] = None


@dataclass
class Assign(Node):
    target: Union[Name, Index, None] = None
    op: str = "="
    value: Optional[Expr] = None


@dataclass
class IncDec(Node):
    target: Union[Name, Index, None] = None
    op: str = "++"


@dataclass
class ExprStmt(Node):
    expr: Optional[Expr] = None


@dataclass
class If(Node):
    cond: Optional[Expr] = None
    then: list[Node] = field(default_factory=list)
    orelse: Optional[list[Node]] = None


@dataclass
class While(Node):
    cond: Optional[Expr] = None
    body: list[Node] = field(default_factory=list)


@dataclass
class DoWhile(Node):
    body: list[Node] = field(default_factory=list)
    cond: Optional[Expr] = None


@dataclass
class For(Node):
    init: Union[Decl, Assign, IncDec, ExprStmt, None] = None
    cond: Optional[Expr] = None
    step: Union[Assign, IncDec, ExprStmt, None] = None
    body: list[Node] = field(default_factory=list)


@dataclass
class Case:
    value: Optional[int]
    body: list[Node] = field(default_factory=list)


@dataclass
class Switch(Node):
    expr: Optional[Expr] = None
    cases: list[Case] = field(default_factory=list)


@dataclass
class Return(Node):
    value: Optional[Expr] = None


@dataclass
class Break(Node):
    pass


@dataclass
class Continue(Node):
    pass


@dataclass
class FuncDef(Node):
    ret: str = "int"
    name: str = ""
    params: list[str] = field(default_factory=list)
    body: list[Node] = field(default_factory=list)


@dataclass
class Unit:
    path: str
    body: list[Node] = field(default_factory=list)


def children(node: Node) -> list[list[Node]]:
    """Nested statement lists of a compound statement."""
    if isinstance(node, If):
        return [node.then] + ([node.orelse] if node.orelse is not None else [])
    if isinstance(node, (While, DoWhile, For, FuncDef)):
        return [node.body]
    if isinstance(node, Switch):
        return [c.body for c in node.cases]
    return []


def walk(nodes: list[Node]):
    """Yield every statement node in source order (pre-order)."""
    for n in nodes:
        if isinstance(n, DoWhile):
            yield from walk(n.body)
            yield n
            continue
        yield n
        for block in children(n):
            yield from walk(block)
