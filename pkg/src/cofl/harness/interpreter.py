"""Tree-walking interpreter for CVL with statement coverage.

Statements whose presence condition fails under the configuration are
skipped as if the preprocessor had removed them. Arithmetic is 32-bit
two's complement; division truncates toward zero. Runtime faults (array
bounds, division by zero, unknown names, step or recursion limits) end the
run with an error message instead of a value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..cvl import Program
from ..cvl import ast as A

STEP_LIMIT = 200_000
DEPTH_LIMIT = 200


class RuntimeFault(Exception):
    pass


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Return(Exception):
    def __init__(self, value: int):
        self.value = value


@dataclass(frozen=True)
class FuncRef:
    name: str


@dataclass(frozen=True)
class RunResult:
    value: int | None
    executed: tuple[int, ...]
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _wrap(v: int) -> int:
    v &= 0xFFFFFFFF
    return v - (1 << 32) if v >= (1 << 31) else v


def _div(a: int, b: int) -> int:
    if b == 0:
        raise RuntimeFault("division by zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _mod(a: int, b: int) -> int:
    return a - b * _div(a, b)


def _shift(a: int, b: int, left: bool) -> int:
    if b < 0 or b > 31:
        raise RuntimeFault(f"shift count {b} out of range")
    return a << b if left else a >> b


_BIN = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "%": _mod,
    "<<": lambda a, b: _shift(a, b, True),
    ">>": lambda a, b: _shift(a, b, False),
    "&": lambda a, b: a & b,
    "|": lambda a, b: a | b,
    "^": lambda a, b: a ^ b,
    "<": lambda a, b: int(a < b),
    ">": lambda a, b: int(a > b),
    "<=": lambda a, b: int(a <= b),
    ">=": lambda a, b: int(a >= b),
    "==": lambda a, b: int(a == b),
    "!=": lambda a, b: int(a != b),
}


class Interpreter:
    """Runs one program under one configuration; reusable across test inputs."""

    def __init__(self, program: Program, selections: Mapping[str, bool]):
        self.selections = dict(selections)
        self.units = program.units
        self.enabled: set[int] = set()
        for u in self.units:
            for n in A.walk(u.body):
                if all(self.selections.get(l.option, False) == l.polarity for l in n.pc_stack):
                    self.enabled.add(n.sid)
        self.functions: dict[str, A.FuncDef] = {}
        self.locals_of: dict[str, frozenset[str]] = {}
        for u in self.units:
            for n in u.body:
                if isinstance(n, A.FuncDef) and n.sid in self.enabled:
                    if n.name in self.functions:
                        raise RuntimeFault(f"function {n.name} defined twice")
                    self.functions[n.name] = n
                    names = set(n.params)
                    for m in A.walk(n.body):
                        if isinstance(m, A.Decl):
                            names.add(m.name)
                        elif isinstance(m, A.For) and isinstance(m.init, A.Decl):
                            names.add(m.init.name)
                    self.locals_of[n.name] = frozenset(names)

    # -- entry ------------------------------------------------------------
    def run(self, entry: str = "main", args: Sequence[int] = ()) -> RunResult:
        self.globals: dict[str, object] = {}
        self.executed: dict[int, None] = {}
        self.steps = 0
        self.depth = 0
        try:
            for u in self.units:
                for n in u.body:
                    if n.sid not in self.enabled or isinstance(n, A.FuncDef):
                        continue
                    self.exec(n, None, self.globals)
            if entry not in self.functions:
                raise RuntimeFault(f"entry function {entry} is not defined")
            value = self.call(entry, list(args))
            if not isinstance(value, int):
                raise RuntimeFault("entry function returned a non-integer")
            return RunResult(value, tuple(self.executed))
        except RuntimeFault as exc:
            return RunResult(None, tuple(self.executed), str(exc))
        except RecursionError:
            return RunResult(None, tuple(self.executed), "recursion limit")

    # -- helpers ----------------------------------------------------------
    def mark(self, n: A.Node) -> None:
        self.steps += 1
        if self.steps > STEP_LIMIT:
            raise RuntimeFault("step limit exceeded")
        self.executed.setdefault(n.sid, None)

    def scope(self, name: str, fn: str | None, frame: dict) -> dict:
        if fn is not None and name in self.locals_of[fn]:
            return frame
        return self.globals

    def load(self, name: str, fn: str | None, frame: dict):
        sc = self.scope(name, fn, frame)
        if name in sc:
            return sc[name]
        if sc is frame:
            return 0  # declared local read before assignment
        if name in self.functions:
            return FuncRef(name)
        raise RuntimeFault(f"undefined name {name}")

    def int_value(self, v) -> int:
        if not isinstance(v, int):
            raise RuntimeFault("expected an integer value")
        return v

    def call(self, name: str, args: list) -> object:
        f = self.functions.get(name)
        if f is None:
            raise RuntimeFault(f"undefined function {name}")
        if len(args) != len(f.params):
            raise RuntimeFault(f"{name} expects {len(f.params)} arguments, got {len(args)}")
        self.depth += 1
        if self.depth > DEPTH_LIMIT:
            raise RuntimeFault("call depth limit exceeded")
        self.mark(f)
        frame: dict[str, object] = dict(zip(f.params, args))
        try:
            self.block(f.body, f.name, frame)
            result: object = 0
        except _Return as r:
            result = r.value
        except (_Break, _Continue):
            raise RuntimeFault("break or continue escaped a function")
        finally:
            self.depth -= 1
        return result

    # -- expressions ------------------------------------------------------
    def eval(self, e: A.Expr, fn: str | None, frame: dict):
        if isinstance(e, A.Num):
            return _wrap(e.value)
        if isinstance(e, A.Name):
            return self.load(e.name, fn, frame)
        if isinstance(e, A.Index):
            arr = self.load(e.base.name, fn, frame)
            i = self.int_value(self.eval(e.index, fn, frame))
            if not isinstance(arr, list):
                raise RuntimeFault(f"{e.base.name} is not an array")
            if not 0 <= i < len(arr):
                raise RuntimeFault(f"index {i} out of bounds for {e.base.name}[{len(arr)}]")
            return arr[i]
        if isinstance(e, A.Call):
            target = self.load(e.func.name, fn, frame)
            if not isinstance(target, FuncRef):
                raise RuntimeFault(f"{e.func.name} is not callable")
            args = [self.eval(a, fn, frame) for a in e.args]
            return self.call(target.name, args)
        if isinstance(e, A.Unary):
            v = self.int_value(self.eval(e.operand, fn, frame))
            if e.op == "-":
                return _wrap(-v)
            if e.op == "!":
                return int(v == 0)
            if e.op == "~":
                return _wrap(~v)
            return v
        if isinstance(e, A.Binary):
            if e.op == "&&":
                return int(bool(self.int_value(self.eval(e.left, fn, frame)))
                           and bool(self.int_value(self.eval(e.right, fn, frame))))
            if e.op == "||":
                return int(bool(self.int_value(self.eval(e.left, fn, frame)))
                           or bool(self.int_value(self.eval(e.right, fn, frame))))
            a = self.int_value(self.eval(e.left, fn, frame))
            b = self.int_value(self.eval(e.right, fn, frame))
            return _wrap(_BIN[e.op](a, b))
        if isinstance(e, A.Ternary):
            c = self.int_value(self.eval(e.cond, fn, frame))
            return self.eval(e.then if c else e.other, fn, frame)
        raise RuntimeFault(f"cannot evaluate {e!r}")

    def store(self, target, value, op: str, fn: str | None, frame: dict) -> None:
        if op != "=":
            cur = self.int_value(self.eval(target, fn, frame))
            value = _wrap(_BIN[op[:-1]](cur, self.int_value(value)))
        if isinstance(target, A.Name):
            self.scope(target.name, fn, frame)[target.name] = value
            return
        arr = self.load(target.base.name, fn, frame)
        i = self.int_value(self.eval(target.index, fn, frame))
        if not isinstance(arr, list):
            raise RuntimeFault(f"{target.base.name} is not an array")
        if not 0 <= i < len(arr):
            raise RuntimeFault(f"index {i} out of bounds for {target.base.name}[{len(arr)}]")
        arr[i] = self.int_value(value)

    # -- statements -------------------------------------------------------
    def block(self, nodes: list[A.Node], fn: str | None, frame: dict) -> None:
        for n in nodes:
            if n.sid in self.enabled:
                self.exec(n, fn, frame)

    def simple(self, n: A.Node, fn: str | None, frame: dict) -> None:
        if isinstance(n, A.Decl):
            sc = self.scope(n.name, fn, frame)
            if n.size is not None:
                size = self.int_value(self.eval(n.size, fn, frame))
                if not 0 <= size <= 100_000:
                    raise RuntimeFault(f"invalid array size {size} for {n.name}")
                if n.init is not None:
                    raise RuntimeFault("array initializers are not supported")
                sc[n.name] = [0] * size
            else:
                sc[n.name] = self.eval(n.init, fn, frame) if n.init is not None else 0
        elif isinstance(n, A.Assign):
            self.store(n.target, self.eval(n.value, fn, frame), n.op, fn, frame)
        elif isinstance(n, A.IncDec):
            self.store(n.target, 1, "+=" if n.op == "++" else "-=", fn, frame)
        elif isinstance(n, A.ExprStmt):
            self.eval(n.expr, fn, frame)

    def truth(self, e: A.Expr | None, fn: str | None, frame: dict) -> bool:
        return True if e is None else bool(self.int_value(self.eval(e, fn, frame)))

    def loop_body(self, body: list[A.Node], fn: str | None, frame: dict) -> bool:
        """Run one iteration; False means the loop was broken out of."""
        try:
            self.block(body, fn, frame)
        except _Break:
            return False
        except _Continue:
            pass
        return True

    def exec(self, n: A.Node, fn: str | None, frame: dict) -> None:
        self.mark(n)
        if isinstance(n, A.Define):
            self.globals[n.name] = self.eval(n.value, None, self.globals)
        elif isinstance(n, (A.Decl, A.Assign, A.IncDec, A.ExprStmt)):
            self.simple(n, fn, frame)
        elif isinstance(n, A.If):
            if self.truth(n.cond, fn, frame):
                self.block(n.then, fn, frame)
            elif n.orelse is not None:
                self.block(n.orelse, fn, frame)
        elif isinstance(n, A.While):
            while self.truth(n.cond, fn, frame):
                if not self.loop_body(n.body, fn, frame):
                    break
                self.mark(n)
        elif isinstance(n, A.DoWhile):
            while True:
                if not self.loop_body(n.body, fn, frame):
                    break
                self.mark(n)
                if not self.truth(n.cond, fn, frame):
                    break
        elif isinstance(n, A.For):
            if n.init is not None:
                self.simple(n.init, fn, frame)
            while self.truth(n.cond, fn, frame):
                if not self.loop_body(n.body, fn, frame):
                    break
                self.mark(n)
                if n.step is not None:
                    self.simple(n.step, fn, frame)
        elif isinstance(n, A.Switch):
            v = self.int_value(self.eval(n.expr, fn, frame))
            start = next((i for i, c in enumerate(n.cases) if c.value == v), None)
            if start is None:
                start = next((i for i, c in enumerate(n.cases) if c.value is None), None)
            if start is not None:
                try:
                    for case in n.cases[start:]:
                        self.block(case.body, fn, frame)
                except _Break:
                    pass
        elif isinstance(n, A.Return):
            raise _Return(self.int_value(self.eval(n.value, fn, frame)) if n.value is not None else 0)
        elif isinstance(n, A.Break):
            raise _Break()
        elif isinstance(n, A.Continue):
            raise _Continue()
        else:
            raise RuntimeFault(f"cannot execute {type(n).__name__}")


def run(program: Program, selections: Mapping[str, bool], entry: str = "main", args: Sequence[int] = ()) -> RunResult:
    try:
        interp = Interpreter(program, selections)
    except RuntimeFault as exc:
        return RunResult(None, (), str(exc))
    return interp.run(entry, args)
