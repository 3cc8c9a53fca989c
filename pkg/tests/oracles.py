"""Independent reference implementations and random input builders for tests.

Nothing here imports the algorithms under test; the oracles are written from
the definitions, favouring obviousness over speed.
"""

from __future__ import annotations

import itertools
import random

from cofl.model import (
    Configuration,
    ConfigurationSuite,
    DefKind,
    Entity,
    FeatureLiteral,
    FeatureSelection,
    ProgramModel,
    Span,
    Statement,
)


# -- suites -------------------------------------------------------------

def random_suite(rng: random.Random, max_options: int = 8, max_configs: int = 32, fail_rate: float | None = None):
    """Distinct random configurations with random verdicts and at least one failure."""
    n = rng.randint(1, max_options)
    options = [f"O{i}" for i in range(n)]
    k = rng.randint(1, min(max_configs, 1 << n))
    masks = rng.sample(range(1 << n), k)
    configs = [Configuration(f"c{i + 1}", {o: bool(m >> j & 1) for j, o in enumerate(options)}) for i, m in enumerate(masks)]
    rate = rng.random() if fail_rate is None else fail_rate
    verdicts = {}
    for c in configs:
        for t in range(rng.randint(1, 3)):
            verdicts[(c.id, f"t{t}")] = rng.random() >= rate
    if all(verdicts.values()):
        verdicts[(configs[rng.randrange(k)].id, "t0")] = False
    return ConfigurationSuite(configs, verdicts)


def failing_ids(suite: ConfigurationSuite) -> set[str]:
    return {cid for (cid, _), ok in suite.verdicts.items() if not ok}


def definitional_spcs(suite: ConfigurationSuite) -> set[frozenset]:
    """Every minimal selection set that only failing configurations contain.

    Enumerates subsets of each failing configuration directly: a set S is kept
    when it is contained in some failing configuration, in no passing one, and
    no proper subset has both properties.
    """
    cf = failing_ids(suite)
    cp = [c for c in suite if c.id not in cf]
    good = set()
    for c in suite:
        if c.id not in cf:
            continue
        sels = sorted(c.selection_set(), key=str)
        for r in range(len(sels) + 1):
            for combo in itertools.combinations(sels, r):
                s = frozenset(combo)
                if not any(s <= p.selection_set() for p in cp):
                    good.add(s)
    return {s for s in good if not any(o < s for o in good)}


def audit_spc(sels: frozenset, suite: ConfigurationSuite) -> list[str]:
    """Violations of necessity, sufficiency and minimality for one set."""
    cf = failing_ids(suite)

    def contained_by(s):
        return [c.id for c in suite if s <= c.selection_set()]

    def nec(s):
        return all(cid in cf for cid in contained_by(s))

    def suf(s):
        return any(cid in cf for cid in contained_by(s)) and nec(s)

    problems = []
    if not nec(sels):
        problems.append(f"{sorted(map(str, sels))}: contained by a passing configuration")
    if not suf(sels):
        problems.append(f"{sorted(map(str, sels))}: no failing configuration contains it")
    for x in sels:
        smaller = sels - {x}
        if nec(smaller) and suf(smaller):
            problems.append(f"{sorted(map(str, sels))}: not minimal, {x} is removable")
    return problems


# -- models -------------------------------------------------------------

def random_model(rng: random.Random, max_statements: int = 200, n_options: int = 4, n_entities: int = 12) -> ProgramModel:
    options = [f"F{i}" for i in range(n_options)]
    ents = [Entity("GLOBAL", f"v{i}") for i in range(n_entities)]
    n = rng.randint(1, max_statements)
    stmts = []
    for sid in range(1, n + 1):
        pc = {}
        for o in rng.sample(options, rng.randint(0, 2)):
            pc[o] = rng.random() < 0.6
        defs = {(e, DefKind.VALUE) for e in rng.sample(ents, rng.randint(0, 2))}
        uses = set(rng.sample(ents, rng.randint(0, 3)))
        parent = rng.randint(1, sid - 1) if sid > 1 and rng.random() < 0.3 else None
        stmts.append(Statement(
            sid,
            Span("r.cvl", sid, sid),
            frozenset(FeatureLiteral(o, v) for o, v in pc.items()),
            frozenset(defs),
            frozenset(uses),
            parent,
        ))
    return ProgramModel(stmts)


def random_configuration(rng: random.Random, model: ProgramModel) -> Configuration:
    return Configuration("r", {o: rng.random() < 0.5 for o in sorted(model.options)})


def dependence_edge(model: ProgramModel, a: int, b: int) -> bool:
    """a -> b when a defines something b uses, or a is b's control parent."""
    if a == b:
        return False
    sa, sb = model[a], model[b]
    return bool(sa.defined_entities & sb.uses) or sb.parent == a


def naive_edges(model: ProgramModel) -> set[tuple[int, int]]:
    ids = list(model.statements)
    return {(a, b) for a in ids for b in ids if dependence_edge(model, a, b)}


def naive_closure(model: ProgramModel, anchors, direction: str, restrict_to=None, edges=None) -> frozenset[int]:
    """Fixpoint over the edge list: grow from the anchors through allowed nodes."""
    edges = naive_edges(model) if edges is None else edges
    allowed = set(model.statements) if restrict_to is None else set(restrict_to)

    def sweep(pairs) -> set[int]:
        reached = set(anchors)
        while True:
            more = {b for a, b in pairs if a in reached and b in allowed} - reached
            if not more:
                return reached
            reached |= more

    out = set()
    if direction in ("forward", "both"):
        out |= sweep(edges)
    if direction in ("backward", "both"):
        out |= sweep({(b, a) for a, b in edges})
    return frozenset(out & allowed)


def naive_rho(model: ProgramModel, e: Entity, c: Configuration) -> frozenset[Entity]:
    """Entities with a non-empty flow path into ``e`` through enabled statements."""
    flows = set()
    for s in model:
        if all(lit.satisfied_by(c.selections) for lit in s.pc):
            for x in s.uses:
                for y in s.defined_entities:
                    flows.add((x, y))
    result = {x for x, y in flows if y == e}
    while True:
        more = {x for x, y in flows if y in result} - result
        if not more:
            return frozenset(result)
        result |= more


def sel(text: str) -> frozenset[FeatureSelection]:
    """``"A=T,B=F"`` -> selection set."""
    out = set()
    for part in filter(None, (p.strip() for p in text.split(","))):
        opt, _, v = part.partition("=")
        out.add(FeatureSelection(opt, v == "T"))
    return frozenset(out)
