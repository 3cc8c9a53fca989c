"""Feature-level def/use sets, value propagation and pairwise feature interactions.

Two features interact when one defines an entity the other also defines
(def-def), when one defines an entity the other uses (def-use), or, with
propagation enabled, when a value defined by one flows through enabled
statements into an entity the other uses (propagated def-use). Interactions
whose entities are only *used* by both sides do not count.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable

from .model import (
    Configuration,
    ConfigurationSuite,
    Entity,
    FeatureLiteral,
    ModelError,
    ProgramModel,
    statements_enabled,
)
from .spc import SuspiciousPartialConfiguration

log = logging.getLogger(__name__)

DEF_DEF = "def-def"
DEF_USE = "def-use"
PROPAGATED = "propagated-def-use"
_PRIORITY = (DEF_DEF, DEF_USE, PROPAGATED)


@dataclass(frozen=True)
class FeatureEntitySets:
    feature: FeatureLiteral
    def_set: frozenset[Entity]
    use_set: frozenset[Entity]


def feature_def_use(model: ProgramModel, f: FeatureLiteral) -> FeatureEntitySets:
    """Entities defined and used by the statements implementing ``f``."""
    if f not in model.features:
        raise ModelError(f"unknown feature {f}")
    defs: set[Entity] = set()
    uses: set[Entity] = set()
    for sid in model.phi_of(f):
        s = model[sid]
        defs.update(s.defined_entities)
        uses.update(s.uses)
    return FeatureEntitySets(f, frozenset(defs), frozenset(uses))


class PropagationIndex:
    """Entity flow relation under one configuration, with memoized closures.

    ``x -> y`` holds when some enabled statement uses ``x`` and defines ``y``.
    :meth:`rho` gives every entity whose value reaches ``e`` through one or
    more such steps; ``e`` itself is included only when it lies on a cycle.
    """

    def __init__(self, model: ProgramModel, c: Configuration):
        self.model = model
        self.config = c
        self.enabled = statements_enabled(model, c)
        self._succ: dict[Entity, set[Entity]] = {}
        self._pred: dict[Entity, set[Entity]] = {}
        for sid in sorted(self.enabled):
            s = model[sid]
            for x in s.uses:
                for y in s.defined_entities:
                    self._succ.setdefault(x, set()).add(y)
                    self._pred.setdefault(y, set()).add(x)
        self._back: dict[Entity, frozenset[Entity]] = {}
        self._fwd: dict[Entity, frozenset[Entity]] = {}

    @staticmethod
    def _closure(start: Entity, edges: dict[Entity, set[Entity]]) -> frozenset[Entity]:
        seen: set[Entity] = set()
        stack = list(edges.get(start, ()))
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(edges.get(x, ()))
        return frozenset(seen)

    def rho(self, e: Entity) -> frozenset[Entity]:
        if e not in self._back:
            self._back[e] = self._closure(e, self._pred)
        return self._back[e]

    def reaches(self, e: Entity) -> frozenset[Entity]:
        """Entities that ``e``'s value flows into."""
        if e not in self._fwd:
            self._fwd[e] = self._closure(e, self._succ)
        return self._fwd[e]

    def chain(self, e1: Entity, e2: Entity) -> frozenset[int]:
        """Enabled statements lying on some flow path from ``e1`` to ``e2``."""
        sources = {e1} | self.reaches(e1)
        sinks = {e2} | self.rho(e2)
        out = set()
        for sid in self.enabled:
            s = self.model[sid]
            if s.uses & sources and s.defined_entities & sinks:
                out.add(sid)
        return frozenset(out)


def propagation(model: ProgramModel, e: Entity, c: Configuration) -> frozenset[Entity]:
    return PropagationIndex(model, c).rho(e)


@dataclass(frozen=True)
class Interaction:
    pair: tuple[FeatureLiteral, FeatureLiteral]
    kinds: frozenset[str]
    entities: frozenset[Entity]
    implementation: frozenset[int]

    @property
    def kind(self) -> str:
        return next(k for k in _PRIORITY if k in self.kinds)


def detect_interaction(
    model: ProgramModel,
    f1: FeatureLiteral,
    f2: FeatureLiteral,
    c: Configuration | None = None,
    *,
    propagation: bool = True,
    index: PropagationIndex | None = None,
) -> Interaction | None:
    """Interaction between two features, or ``None`` if they share no definitions."""
    if f1 == f2:
        raise ValueError("an interaction needs two distinct features")
    a, b = sorted((f1, f2))
    A, B = feature_def_use(model, a), feature_def_use(model, b)
    phi_a, phi_b = model.phi_of(a), model.phi_of(b)
    kinds: set[str] = set()
    entities: set[Entity] = set()
    impl: set[int] = set()

    shared = A.def_set & B.def_set
    if shared:
        kinds.add(DEF_DEF)
        entities |= shared
        for e in shared:
            impl |= model.defines(e) & (phi_a | phi_b)

    for D, U, phi_d, phi_u in ((A, B, phi_a, phi_b), (B, A, phi_b, phi_a)):
        for e in D.def_set & U.use_set:
            kinds.add(DEF_USE)
            entities.add(e)
            impl |= (model.defines(e) & phi_d) | (model.uses(e) & phi_u)

    if propagation:
        if index is None:
            if c is None:
                raise ValueError("propagated interactions need a configuration")
            index = PropagationIndex(model, c)
        for D, U, phi_d, phi_u in ((A, B, phi_a, phi_b), (B, A, phi_b, phi_a)):
            for e2 in sorted(U.use_set):
                sources = D.def_set & index.rho(e2)
                for e1 in sorted(sources):
                    if e1 == e2:
                        continue
                    kinds.add(PROPAGATED)
                    entities.update((e1, e2))
                    impl |= model.defines(e1) & phi_d
                    impl |= model.uses(e2) & phi_u
                    impl |= index.chain(e1, e2)

    if not kinds:
        return None
    return Interaction((a, b), frozenset(kinds), frozenset(entities), frozenset(impl))


@dataclass
class InteractionContext:
    """Interaction statements around one SPC.

    ``es`` collects statements implementing interactions among the features the
    SPC enables. ``ds`` collects the statements through which features the SPC
    disables would interact with enabled ones: enabled-side statements that
    directly use an entity a disabled feature defines, plus the disabled-side
    definitions. ``masked`` holds those mediating entities.
    """

    spc: SuspiciousPartialConfiguration
    config: str
    enabled: tuple[FeatureLiteral, ...]
    disabled: tuple[FeatureLiteral, ...]
    interactions: list[Interaction] = field(default_factory=list)
    es: frozenset[int] = frozenset()
    ds: frozenset[int] = frozenset()
    masked: frozenset[Entity] = frozenset()
    warnings: list[str] = field(default_factory=list)


def split_features(model: ProgramModel, spc: SuspiciousPartialConfiguration):
    values = spc.as_dict()
    enabled, disabled = [], []
    for f in sorted(model.features):
        if f.option in values:
            (enabled if values[f.option] == f.polarity else disabled).append(f)
    return tuple(enabled), tuple(disabled)


def build_interaction_context(
    model: ProgramModel,
    spc: SuspiciousPartialConfiguration,
    suite: ConfigurationSuite,
    *,
    propagation: bool = True,
    index: PropagationIndex | None = None,
) -> InteractionContext:
    if not spc.witness_failing:
        raise ValueError(f"SPC {spc} has no failing witness configuration")
    witness = suite[spc.witness_failing[0]]
    enabled, disabled = split_features(model, spc)
    ctx = InteractionContext(spc, witness.id, enabled, disabled)
    if len(enabled) < 2:
        msg = f"SPC {spc} enables fewer than two features; no enabled-feature interactions"
        log.warning(msg)
        ctx.warnings.append(msg)
    if index is None and propagation:
        index = PropagationIndex(model, witness)

    es: set[int] = set()
    for f1, f2 in itertools.combinations(enabled, 2):
        it = detect_interaction(model, f1, f2, witness, propagation=propagation, index=index)
        if it is not None:
            ctx.interactions.append(it)
            es |= it.implementation

    masked: set[Entity] = set()
    ds: set[int] = set()
    enabled_stmts = frozenset().union(*(model.phi_of(f) for f in enabled)) if enabled else frozenset()
    for fd in disabled:
        defs = feature_def_use(model, fd).def_set
        for e in sorted(defs):
            users = model.uses(e) & enabled_stmts
            if users:
                masked.add(e)
                ds |= users
                ds |= model.defines(e) & model.phi_of(fd)
    ctx.es = frozenset(es)
    ctx.ds = frozenset(ds)
    ctx.masked = frozenset(masked)
    return ctx


def implementation_lines(model: ProgramModel, sids: Iterable[int]) -> list[int]:
    return sorted({model[s].span.line_start for s in sids})
