"""Random configurable CVL programs and configuration-dependent bug seeding.

Each option owns two globals: a *parameter* ``p_<opt>`` that its block sets
and other features read, and a *state* ``s_<opt>`` that its blocks
accumulate into and that feeds the program output. Parameters default to 0,
so a feature reading another feature's parameter only changes behaviour when
both are selected. Seeded bugs sit on such cross-feature reads and writes.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field

MAX_OPTIONS = 16
MAX_FUNCTIONS = 40

OPTION_NAMES = (
    "CACHE", "LOCKS", "NUMA", "DEBUG", "STATS", "TRACE", "SMP", "COMPAT",
    "HUGEPAGE", "SWAP", "AUDIT", "CRYPTO", "NET", "IPV6", "USB", "ACPI",
)

BUG_KINDS = ("off-by-one", "wrong-initializer", "inverted-guard", "wrong-entity")
_SITE_KIND = {
    "off-by-one": "loop",
    "wrong-initializer": "produce",
    "inverted-guard": "guard",
    "wrong-entity": "add",
}
_WEIGHTS = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59)


class GenerationError(ValueError):
    pass


@dataclass
class Motif:
    kind: str                # produce | add | guard | loop
    guards: tuple[int, ...]  # options guarding the block, owner first
    func: int
    src: int | None = None   # option whose parameter is read
    target: int = 0          # option whose parameter/state is written
    const: int = 1
    mutated: bool = False

    @property
    def owner(self) -> int:
        return self.guards[0]


@dataclass
class GeneratedProgram:
    seed: int
    options: tuple[str, ...]
    functions: int
    limit: int
    table_step: int
    offsets: tuple[int, ...]
    motifs: list[Motif] = field(default_factory=list)
    path: str = "gen.cvl"

    def var(self, kind: str, i: int) -> str:
        return f"{kind}_{self.options[i].lower()}"

    def render(self) -> tuple[str, dict[int, int]]:
        """Source text plus a map from motif index to the line of its key statement."""
        lines: list[str] = []
        key_line: dict[int, int] = {}
        emit = lines.append
        emit(f"#define LIMIT {self.limit}")
        emit("int tbl[LIMIT];")
        for i in range(len(self.options)):
            emit(f"int {self.var('p', i)} = 0;")
            emit(f"int {self.var('s', i)} = 0;")
        emit("")
        emit("int init_tables() {")
        emit("    for (int i = 0; i < LIMIT; i++) {")
        emit(f"        tbl[i] = i * {self.table_step};")
        emit("    }")
        emit("    return 0;")
        emit("}")
        for j in range(self.functions):
            emit("")
            emit(f"int step{j}(int x) {{")
            emit(f"    int t = x + {self.offsets[j]};")
            order = [k for k, m in enumerate(self.motifs) if m.func == j and m.kind == "produce"]
            order += [k for k, m in enumerate(self.motifs) if m.func == j and m.kind != "produce"]
            for k in order:
                m = self.motifs[k]
                for g in m.guards:
                    emit(f"#ifdef {self.options[g]}")
                body = self._motif_lines(k, m)
                key_line[k] = len(lines) + 1
                for text in body:
                    emit("    " + text)
                for _ in m.guards:
                    emit("#endif")
            emit("    return t;")
            emit("}")
        emit("")
        emit("int main(int x) {")
        emit("    init_tables();")
        for j in range(self.functions):
            emit(f"    step{j}(x);")
        terms = " + ".join(f"{self.var('s', i)} * {_WEIGHTS[i]}" for i in range(len(self.options)))
        emit(f"    return x % 5 + {terms};")
        emit("}")
        return "\n".join(lines) + "\n", key_line

    def _motif_lines(self, k: int, m: Motif) -> list[str]:
        p = self.var("p", m.src) if m.src is not None else None
        s = self.var("s", m.target)
        if m.kind == "produce":
            c = m.const + (1 if m.mutated else 0)
            return [f"{self.var('p', m.target)} = (t + {c}) % LIMIT + 1;"]
        if m.kind == "add":
            return [f"{s} = {s} + {p} * {m.const};"]
        if m.kind == "guard":
            op = ">=" if m.mutated else "<"
            return [f"if ({p} > 0 && {p} {op} {m.const}) {{", f"    {s} = {s} + {m.const + 1};", "}"]
        if m.kind == "loop":
            i = f"i{k}"
            op = "<=" if m.mutated else "<"
            return [f"for (int {i} = 0; {i} {op} {p}; {i}++) {{", f"    {s} = {s} + tbl[{i}];", "}"]
        raise GenerationError(f"unknown motif kind {m.kind}")


def generate(seed: int, options: int = 5, functions: int = 3) -> GeneratedProgram:
    if not 2 <= options <= MAX_OPTIONS:
        raise GenerationError(f"options must be within 2..{MAX_OPTIONS}")
    if not 1 <= functions <= MAX_FUNCTIONS:
        raise GenerationError(f"functions must be within 1..{MAX_FUNCTIONS}")
    rng = random.Random(seed)
    names = tuple(OPTION_NAMES[:options])
    limit = rng.randint(6, 12)
    prog = GeneratedProgram(
        seed=seed,
        options=names,
        functions=functions,
        limit=limit,
        table_step=rng.randint(1, 4),
        offsets=tuple(rng.randint(0, 9) for _ in range(functions)),
    )
    pos = [rng.randrange(functions) for _ in range(options)]
    for i in range(options):
        prog.motifs.append(Motif("produce", (i,), pos[i], target=i, const=rng.randint(0, 9)))

    def consumer(b: int, a: int) -> None:
        kind = rng.choice(("add", "guard", "loop"))
        func = rng.randint(max(pos[a], pos[b]), functions - 1)
        guards = (b,)
        others = [c for c in range(options) if c not in (a, b)]
        if others and rng.random() < 0.25:
            guards = (b, rng.choice(others))
        const = rng.randint(2, limit) if kind == "guard" else rng.randint(1, 5)
        prog.motifs.append(Motif(kind, guards, func, src=a, target=b, const=const))

    for b in range(options):
        for _ in range(rng.randint(1, 2)):
            consumer(b, rng.choice([a for a in range(options) if a != b]))
    for a in range(options):
        if not any(m.src == a for m in prog.motifs):
            consumer(rng.choice([b for b in range(options) if b != a]), a)
    return prog


def generate_program(seed: int, options: int = 5, functions: int = 3) -> str:
    """Source text of a generated program; identical seeds give identical text."""
    return generate(seed, options, functions).render()[0]


@dataclass(frozen=True)
class SeededBug:
    kind: str
    motif: int
    line: int
    target: int | None
    intended: dict[str, bool]

    @property
    def arity(self) -> int:
        return len(self.intended)


def bug_sites(prog: GeneratedProgram, kind: str) -> list[int]:
    if kind not in _SITE_KIND:
        raise GenerationError(f"unknown bug kind {kind!r}")
    site = _SITE_KIND[kind]
    return [k for k, m in enumerate(prog.motifs) if m.kind == site]


def seed_bug(prog: GeneratedProgram, kind: str, rng: random.Random, site: int | None = None):
    """Mutate exactly one motif; returns ``(mutated program, bug)``."""
    sites = bug_sites(prog, kind)
    if not sites:
        raise GenerationError(f"no viable site for {kind}")
    k = rng.choice(sites) if site is None else site
    mutant = copy.deepcopy(prog)
    m = mutant.motifs[k]
    if kind == "wrong-entity":
        choices = [i for i in range(len(prog.options)) if i != m.target]
        m.target = rng.choice(choices)
    else:
        m.mutated = True
    original = prog.motifs[k]
    if original.kind == "produce":
        reader = next(x for x in prog.motifs if x.src == original.target)
        opts = {original.owner, *reader.guards}
    else:
        opts = {*original.guards, original.src}
    intended = {prog.options[i]: True for i in sorted(opts)}
    _, key_lines = mutant.render()
    return mutant, SeededBug(kind, k, key_lines[k], None, intended)
