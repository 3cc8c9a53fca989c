"""Pretty printer for CVL syntax trees.

Re-emits guards from each statement's presence-condition stack, so the
printed text parses back to an isomorphic program (same statement order,
presence conditions and def/use facts; line numbers may move).
"""

from __future__ import annotations

from . import ast as A

_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "<": 7, ">": 7, "<=": 7, ">=": 7,
    "<<": 8, ">>": 8, "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}


def expr_str(e: A.Expr, parent_prec: int = 0) -> str:
    if isinstance(e, A.Num):
        return str(e.value)
    if isinstance(e, A.Name):
        return e.name
    if isinstance(e, A.Index):
        return f"{e.base.name}[{expr_str(e.index)}]"
    if isinstance(e, A.Call):
        return f"{e.func.name}({', '.join(expr_str(a) for a in e.args)})"
    if isinstance(e, A.Unary):
        inner = expr_str(e.operand, 11)
        if isinstance(e.operand, A.Unary):
            inner = f"({inner})"  # keep "- -x" from lexing as "--x"
        return f"{e.op}{inner}"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        s = f"{expr_str(e.left, p)} {e.op} {expr_str(e.right, p + 1)}"
        return f"({s})" if p < parent_prec else s
    if isinstance(e, A.Ternary):
        s = f"{expr_str(e.cond, 1)} ? {expr_str(e.then)} : {expr_str(e.other)}"
        return f"({s})" if parent_prec > 0 else s
    raise TypeError(f"not an expression: {e!r}")


def _target(t) -> str:
    return expr_str(t)


def simple_str(n: A.Node) -> str:
    """Render a simple statement without its trailing semicolon."""
    if isinstance(n, A.Decl):
        s = f"int {n.name}"
        if n.size is not None:
            s += f"[{expr_str(n.size)}]"
        if n.init is not None:
            s += f" = {expr_str(n.init)}"
        return s
    if isinstance(n, A.Assign):
        return f"{_target(n.target)} {n.op} {expr_str(n.value)}"
    if isinstance(n, A.IncDec):
        return f"{_target(n.target)}{n.op}"
    if isinstance(n, A.ExprStmt):
        return expr_str(n.expr)
    raise TypeError(f"not a simple statement: {n!r}")


def header_str(n: A.Node) -> str:
    """One-line text of the statement that ``n`` contributes to the model."""
    if isinstance(n, A.Define):
        return f"#define {n.name} {expr_str(n.value)}"
    if isinstance(n, (A.Decl, A.Assign, A.IncDec, A.ExprStmt)):
        return simple_str(n) + ";"
    if isinstance(n, A.If):
        return f"if ({expr_str(n.cond)})"
    if isinstance(n, A.While):
        return f"while ({expr_str(n.cond)})"
    if isinstance(n, A.DoWhile):
        return f"do ... while ({expr_str(n.cond)});"
    if isinstance(n, A.For):
        init = simple_str(n.init) if n.init is not None else ""
        cond = expr_str(n.cond) if n.cond is not None else ""
        step = simple_str(n.step) if n.step is not None else ""
        return f"for ({init}; {cond}; {step})"
    if isinstance(n, A.Switch):
        return f"switch ({expr_str(n.expr)})"
    if isinstance(n, A.Return):
        return "return;" if n.value is None else f"return {expr_str(n.value)};"
    if isinstance(n, A.Break):
        return "break;"
    if isinstance(n, A.Continue):
        return "continue;"
    if isinstance(n, A.FuncDef):
        params = ", ".join(f"int {p}" for p in n.params)
        return f"{n.ret} {n.name}({params})"
    raise TypeError(f"unknown statement {n!r}")


class _Emitter:
    def __init__(self) -> None:
        self.lines: list[str] = []

    def put(self, indent: int, text: str) -> None:
        self.lines.append("    " * indent + text)

    def guard(self, current: list, target: tuple, base: int) -> None:
        common = 0
        while common < min(len(current), len(target)) and current[common] == target[common]:
            common += 1
        common = max(common, base)
        while len(current) > common:
            current.pop()
            self.lines.append("#endif")
        for lit in target[len(current):]:
            self.lines.append(f"#ifdef {lit.option}" if lit.polarity else f"#ifndef {lit.option}")
            current.append(lit)

    def block(self, nodes: list[A.Node], base: tuple, indent: int) -> None:
        current = list(base)
        for n in nodes:
            self.guard(current, n.pc_stack, len(base))
            self.node(n, indent)
        self.guard(current, base, len(base))

    def node(self, n: A.Node, indent: int) -> None:
        if isinstance(n, A.Define):
            self.lines.append(header_str(n))
        elif isinstance(n, A.FuncDef):
            self.put(indent, header_str(n) + " {")
            self.block(n.body, n.pc_stack, indent + 1)
            self.put(indent, "}")
        elif isinstance(n, A.If):
            self.put(indent, header_str(n) + " {")
            self.block(n.then, n.pc_stack, indent + 1)
            if n.orelse is not None:
                self.put(indent, "} else {")
                self.block(n.orelse, n.pc_stack, indent + 1)
            self.put(indent, "}")
        elif isinstance(n, (A.While, A.For)):
            self.put(indent, header_str(n) + " {")
            self.block(n.body, n.pc_stack, indent + 1)
            self.put(indent, "}")
        elif isinstance(n, A.DoWhile):
            self.put(indent, "do {")
            self.block(n.body, n.pc_stack, indent + 1)
            self.put(indent, f"}} while ({expr_str(n.cond)});")
        elif isinstance(n, A.Switch):
            self.put(indent, header_str(n) + " {")
            for case in n.cases:
                label = "default:" if case.value is None else f"case {case.value}:"
                self.put(indent, label)
                self.block(case.body, n.pc_stack, indent + 1)
            self.put(indent, "}")
        else:
            self.put(indent, header_str(n))


def format_unit(unit: A.Unit) -> str:
    em = _Emitter()
    em.block(unit.body, (), 0)
    return "\n".join(em.lines) + "\n"
