"""Statement dependence graph, impact closures and the suspicious-statement rule."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

from .model import ConfigurationSuite, Entity, ModelError, ProgramModel, statements_enabled

if TYPE_CHECKING:
    from .interactions import InteractionContext

DIRECTIONS = ("forward", "backward", "both")


@dataclass(frozen=True)
class ExecutionTrace:
    config: str
    test: str
    executed: tuple[int, ...]


class TraceError(ModelError):
    pass


def validate_traces(model: ProgramModel, suite: ConfigurationSuite, traces: Iterable[ExecutionTrace]) -> dict:
    """Index traces by ``(config, test)``, rejecting any that disagree with the model."""
    out: dict[tuple[str, str], ExecutionTrace] = {}
    enabled_cache: dict[str, frozenset[int]] = {}
    for t in traces:
        key = (t.config, t.test)
        if key in out:
            raise TraceError(f"duplicate trace for {t.config}/{t.test}")
        if t.config not in suite:
            raise TraceError(f"trace for unknown configuration {t.config!r}")
        if key not in suite.verdicts:
            raise TraceError(f"trace for {t.config}/{t.test} has no verdict")
        if t.config not in enabled_cache:
            enabled_cache[t.config] = statements_enabled(model, suite[t.config])
        enabled = enabled_cache[t.config]
        for sid in t.executed:
            if sid not in model.statements:
                raise TraceError(f"trace {t.config}/{t.test} names unknown statement {sid}")
            if sid not in enabled:
                raise TraceError(f"trace {t.config}/{t.test} executes statement {sid}, which is disabled there")
        out[key] = t
    return out


@dataclass
class DependenceGraph:
    nodes: frozenset[int]
    data: dict[tuple[int, int], frozenset[Entity]] = field(default_factory=dict)
    control: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self) -> None:
        self.succ: dict[int, set[int]] = {n: set() for n in self.nodes}
        self.pred: dict[int, set[int]] = {n: set() for n in self.nodes}
        for a, b in list(self.data) + list(self.control):
            self.succ[a].add(b)
            self.pred[b].add(a)

    def edges(self) -> list[tuple[int, int, str]]:
        """All edges as ``(src, dst, label)``; data labels name the entity."""
        out = [(a, b, str(e)) for (a, b), ents in self.data.items() for e in sorted(ents)]
        out += [(a, b, "control") for a, b in self.control]
        return sorted(out)


def build_pdg(model: ProgramModel) -> DependenceGraph:
    """Def-use data edges for every entity plus parent-to-child control edges.

    There is no kill analysis: every definition of an entity reaches every use.
    """
    data: dict[tuple[int, int], set[Entity]] = {}
    for e, users in model.use.items():
        for d in model.defines(e):
            for u in users:
                if d != u:
                    data.setdefault((d, u), set()).add(e)
    control = frozenset((s.parent, s.id) for s in model if s.parent is not None)
    return DependenceGraph(
        frozenset(model.statements),
        {k: frozenset(v) for k, v in sorted(data.items())},
        control,
    )


def _reach(adj: dict[int, set[int]], anchors: Iterable[int], allowed: frozenset[int] | None) -> set[int]:
    seen = set(anchors)
    stack = list(seen)
    while stack:
        n = stack.pop()
        for m in adj.get(n, ()):
            if m not in seen and (allowed is None or m in allowed):
                seen.add(m)
                stack.append(m)
    return seen


def impact_closure(
    g: DependenceGraph,
    anchors: Iterable[int],
    direction: str = "both",
    restrict_to: Iterable[int] | None = None,
) -> frozenset[int]:
    """Statements reachable from ``anchors`` along dependence edges.

    Traversal passes only through nodes in ``restrict_to``; anchors start the
    walk wherever they are but appear in the result only if allowed. With
    ``both`` the result is the union of the forward and backward closures.
    """
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    anchors = frozenset(anchors)
    unknown = anchors - g.nodes
    if unknown:
        raise ModelError(f"anchors not in graph: {sorted(unknown)}")
    allowed = frozenset(restrict_to) if restrict_to is not None else None
    out: set[int] = set()
    if direction in ("forward", "both"):
        out |= _reach(g.succ, anchors, allowed)
    if direction in ("backward", "both"):
        out |= _reach(g.pred, anchors, allowed)
    if allowed is not None:
        out &= allowed
    return frozenset(out)


@dataclass
class SuspiciousSet:
    statements: frozenset[int]
    candidates: frozenset[int]
    es_closure: frozenset[int]
    gate: frozenset[int] | None
    provenance: dict[int, tuple[str, ...]] = field(default_factory=dict)


def suspicious_statements(
    model: ProgramModel,
    ctx: InteractionContext,
    traces: dict[tuple[str, str], ExecutionTrace],
    suite: ConfigurationSuite,
    *,
    direction: str = "both",
    graph: DependenceGraph | None = None,
) -> SuspiciousSet:
    """Executed statements tied by dependences to the SPC's interaction statements.

    A candidate must be connected (per ``direction``) to some ES statement.
    When DS is non-empty it must also reach some DS statement backward, and
    must not itself redefine an entity through which a disabled feature
    would interact. Statements inside blocks the SPC disables are dropped.
    """
    g = graph or build_pdg(model)
    candidates: set[int] = set()
    for cid in ctx.spc.witness_failing:
        for tid in suite.tests_of(cid):
            t = traces.get((cid, tid))
            if t is None:
                raise TraceError(f"missing trace for {cid}/{tid}")
            candidates.update(t.executed)
    cand = frozenset(candidates)

    fwd = impact_closure(g, ctx.es, "forward", cand) if direction in ("forward", "both") else frozenset()
    bwd = impact_closure(g, ctx.es, "backward", cand) if direction in ("backward", "both") else frozenset()
    es_closure = fwd | bwd

    gate = None
    result = set(es_closure)
    if ctx.ds:
        reach = impact_closure(g, ctx.ds, "backward", cand)
        competing = {sid for sid in reach if model[sid].defined_entities & ctx.masked}
        gate = reach - competing
        result &= gate

    values = ctx.spc.as_dict()
    for sid in list(result):
        if any(lit.option in values and values[lit.option] != lit.polarity for lit in model[sid].pc):
            result.discard(sid)

    provenance = {}
    for sid in sorted(result):
        tags = []
        if sid in ctx.es:
            tags.append("es")
        if sid in fwd and sid not in ctx.es:
            tags.append("es:forward")
        if sid in bwd and sid not in ctx.es:
            tags.append("es:backward")
        if gate is not None:
            tags.append("ds" if sid in ctx.ds else "ds:backward")
        provenance[sid] = tuple(tags)
    return SuspiciousSet(frozenset(result), cand, es_closure, gate, provenance)
