"""Shared domain types: features, configurations, entities, statements.

Everything here is immutable once built. A :class:`ProgramModel` is the static
half of an analysis input (statements with presence conditions and def/use
facts); a :class:`ConfigurationSuite` is the dynamic half (which tested
configuration passed or failed which test).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

GLOBAL = "GLOBAL"

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ModelError(ValueError):
    """Raised for malformed or inconsistent analysis inputs."""


def _check_ident(name: str, what: str) -> None:
    if not isinstance(name, str) or not _IDENT.match(name):
        raise ModelError(f"invalid {what} {name!r}")


@dataclass(frozen=True, order=True)
class FeatureLiteral:
    """A guard literal: ``(SLOB, False)`` is the feature ``!SLOB``."""

    option: str
    polarity: bool = True

    def __post_init__(self) -> None:
        _check_ident(self.option, "option name")

    def satisfied_by(self, selections: Mapping[str, bool]) -> bool:
        return selections[self.option] == self.polarity

    def negated(self) -> FeatureLiteral:
        return FeatureLiteral(self.option, not self.polarity)

    def __str__(self) -> str:
        return self.option if self.polarity else f"!{self.option}"

    @classmethod
    def parse(cls, text: str) -> FeatureLiteral:
        text = text.strip()
        if text.startswith("!"):
            return cls(text[1:].strip(), False)
        return cls(text, True)


@dataclass(frozen=True, order=True)
class FeatureSelection:
    """One option fixed to a value, written ``OPT=T`` / ``OPT=F``."""

    option: str
    value: bool

    def __post_init__(self) -> None:
        _check_ident(self.option, "option name")

    def flipped(self) -> FeatureSelection:
        return FeatureSelection(self.option, not self.value)

    def __str__(self) -> str:
        return f"{self.option}={'T' if self.value else 'F'}"


def selection_set(items: Iterable[FeatureSelection] | Mapping[str, bool]) -> frozenset[FeatureSelection]:
    """Build a consistent selection set from selections or an option map."""
    if isinstance(items, Mapping):
        items = [FeatureSelection(k, bool(v)) for k, v in items.items()]
    result = frozenset(items)
    seen: dict[str, bool] = {}
    for sel in result:
        if seen.setdefault(sel.option, sel.value) != sel.value:
            raise ModelError(f"selection set assigns both values to {sel.option}")
    return result


def format_selections(sels: Iterable[FeatureSelection]) -> str:
    return "{" + ", ".join(str(s) for s in sorted(sels)) + "}"


class Configuration:
    """A total assignment of values to options.

    Two configurations with the same selections compare equal whatever
    their ids.
    """

    __slots__ = ("id", "_values", "_frozen")

    def __init__(self, id: str, selections: Mapping[str, bool]):
        if not isinstance(id, str) or not id:
            raise ModelError(f"invalid configuration id {id!r}")
        for opt in selections:
            _check_ident(opt, "option name")
        self.id = id
        self._values = {k: bool(selections[k]) for k in sorted(selections)}
        self._frozen = frozenset(self._values.items())

    @property
    def selections(self) -> Mapping[str, bool]:
        return dict(self._values)

    @property
    def options(self) -> frozenset[str]:
        return frozenset(self._values)

    def __getitem__(self, option: str) -> bool:
        return self._values[option]

    def selection_set(self) -> frozenset[FeatureSelection]:
        return frozenset(FeatureSelection(k, v) for k, v in self._values.items())

    def contains(self, sels: Iterable[FeatureSelection]) -> bool:
        """True when every selection in ``sels`` holds in this configuration."""
        return all(self._values.get(s.option) == s.value for s in sels)

    def with_values(self, id: str, **changes: bool) -> Configuration:
        values = dict(self._values)
        values.update(changes)
        return Configuration(id, values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self._frozen == other._frozen

    def __hash__(self) -> int:
        return hash(self._frozen)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}={'T' if v else 'F'}" for k, v in self._values.items())
        return f"Configuration({self.id!r}, {body})"


class ConfigurationSuite:
    """Tested configurations plus per-(configuration, test) verdicts."""

    def __init__(self, configurations: Iterable[Configuration], verdicts: Mapping[tuple[str, str], bool]):
        self.configurations: tuple[Configuration, ...] = tuple(configurations)
        self._by_id: dict[str, Configuration] = {}
        seen: dict[Configuration, str] = {}
        for c in self.configurations:
            if c.id in self._by_id:
                raise ModelError(f"duplicate configuration id {c.id!r}")
            if c in seen:
                raise ModelError(f"configurations {seen[c]!r} and {c.id!r} have identical selections")
            seen[c] = c.id
            self._by_id[c.id] = c
        options = {c.options for c in self.configurations}
        if len(options) > 1:
            raise ModelError("configurations do not assign the same option set")
        self.options: frozenset[str] = next(iter(options)) if options else frozenset()
        self.verdicts: dict[tuple[str, str], bool] = {}
        for (cid, tid), passed in sorted(verdicts.items()):
            if cid not in self._by_id:
                raise ModelError(f"verdict for unknown configuration {cid!r}")
            self.verdicts[(cid, tid)] = bool(passed)

    def __getitem__(self, cid: str) -> Configuration:
        try:
            return self._by_id[cid]
        except KeyError:
            raise ModelError(f"unknown configuration {cid!r}") from None

    def __contains__(self, cid: object) -> bool:
        return cid in self._by_id

    def __iter__(self) -> Iterator[Configuration]:
        return iter(self.configurations)

    def __len__(self) -> int:
        return len(self.configurations)

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.configurations]

    def tests_of(self, cid: str) -> list[str]:
        return [t for (c, t) in self.verdicts if c == cid]

    def failing_tests(self) -> list[tuple[str, str]]:
        return [k for k, ok in self.verdicts.items() if not ok]

    def passing_tests(self) -> list[tuple[str, str]]:
        return [k for k, ok in self.verdicts.items() if ok]


def partition_suite(suite: ConfigurationSuite) -> tuple[frozenset[str], frozenset[str]]:
    """Split configuration ids into (CP, CF): all tests pass vs at least one fails."""
    failing: set[str] = set()
    counted: set[str] = set()
    for (cid, _), passed in suite.verdicts.items():
        counted.add(cid)
        if not passed:
            failing.add(cid)
    missing = [c.id for c in suite if c.id not in counted]
    if missing:
        raise ModelError(f"configuration {missing[0]!r} has no verdicts")
    passing = frozenset(suite.ids) - failing
    return passing, frozenset(failing)


@dataclass(frozen=True, order=True)
class Entity:
    """A named program element; identity is ``(scope, name)``."""

    scope: str
    name: str
    kind: str = field(default="variable", compare=False)

    def __str__(self) -> str:
        return f"{self.scope}.{self.name}"

    @classmethod
    def parse(cls, text: str, kind: str = "variable") -> Entity:
        scope, _, name = text.rpartition(".")
        if not scope or not name:
            raise ModelError(f"entity must be written scope.name, got {text!r}")
        return cls(scope, name, kind)


class DefKind(str, enum.Enum):
    VALUE = "value"
    BODY = "body"
    UNINIT = "UNINIT"
    UNDEFINED = "UNDEFINED"


@dataclass(frozen=True)
class Span:
    file: str
    line_start: int
    line_end: int

    def lines(self) -> range:
        return range(self.line_start, self.line_end + 1)

    def __str__(self) -> str:
        if self.line_start == self.line_end:
            return f"{self.file}:{self.line_start}"
        return f"{self.file}:{self.line_start}-{self.line_end}"


@dataclass(frozen=True)
class Statement:
    id: int
    span: Span
    pc: frozenset[FeatureLiteral] = frozenset()
    defs: frozenset[tuple[Entity, DefKind]] = frozenset()
    uses: frozenset[Entity] = frozenset()
    parent: int | None = None
    kind: str = "stmt"
    text: str = ""
    function: str | None = None

    @property
    def defined_entities(self) -> frozenset[Entity]:
        return frozenset(e for e, _ in self.defs)

    def enabled_in(self, selections: Mapping[str, bool]) -> bool:
        return all(lit.satisfied_by(selections) for lit in self.pc)


class ProgramModel:
    """Statements plus the derived feature/entity maps.

    ``phi[f]`` holds the statements implementing feature literal ``f``;
    ``define[e]`` and ``use[e]`` hold the statements defining and using ``e``.
    """

    def __init__(
        self,
        statements: Iterable[Statement],
        entities: Iterable[Entity] = (),
        features: Iterable[FeatureLiteral] = (),
    ):
        stmts = sorted(statements, key=lambda s: s.id)
        self.statements: dict[int, Statement] = {}
        for s in stmts:
            if s.id in self.statements:
                raise ModelError(f"duplicate statement id {s.id}")
            self.statements[s.id] = s
        ents: dict[tuple[str, str], Entity] = {}
        for e in entities:
            ents[(e.scope, e.name)] = e
        for s in stmts:
            options = [lit.option for lit in s.pc]
            if len(options) != len(set(options)):
                raise ModelError(f"statement {s.id} has contradictory presence condition")
            for e in list(s.defined_entities) + list(s.uses):
                ents.setdefault((e.scope, e.name), e)
            if s.parent is not None and s.parent not in self.statements:
                raise ModelError(f"statement {s.id} has unknown control parent {s.parent}")
        self.entities: frozenset[Entity] = frozenset(ents.values())
        self._entity_index = ents

        phi: dict[FeatureLiteral, set[int]] = {}
        define: dict[Entity, set[int]] = {}
        use: dict[Entity, set[int]] = {}
        for s in stmts:
            for lit in s.pc:
                phi.setdefault(lit, set()).add(s.id)
            for e, _ in s.defs:
                define.setdefault(ents[(e.scope, e.name)], set()).add(s.id)
            for e in s.uses:
                use.setdefault(ents[(e.scope, e.name)], set()).add(s.id)
        self.phi: dict[FeatureLiteral, frozenset[int]] = {k: frozenset(v) for k, v in sorted(phi.items())}
        self.define: dict[Entity, frozenset[int]] = {k: frozenset(v) for k, v in define.items()}
        self.use: dict[Entity, frozenset[int]] = {k: frozenset(v) for k, v in use.items()}
        # guard literals may be declared even when they enclose no statement
        self.features: frozenset[FeatureLiteral] = frozenset(self.phi) | frozenset(features)
        self.options: frozenset[str] = frozenset(lit.option for lit in self.features)

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self) -> Iterator[Statement]:
        return iter(self.statements.values())

    def __getitem__(self, sid: int) -> Statement:
        return self.statements[sid]

    def entity(self, text: str) -> Entity:
        scope, _, name = text.rpartition(".")
        try:
            return self._entity_index[(scope, name)]
        except KeyError:
            raise ModelError(f"unknown entity {text!r}") from None

    def phi_of(self, f: FeatureLiteral) -> frozenset[int]:
        return self.phi.get(f, frozenset())

    def defines(self, e: Entity) -> frozenset[int]:
        return self.define.get(e, frozenset())

    def uses(self, e: Entity) -> frozenset[int]:
        return self.use.get(e, frozenset())

    def core(self) -> frozenset[int]:
        return frozenset(s.id for s in self if not s.pc)

    def statements_at(self, line: int, file: str | None = None) -> list[int]:
        """Ids of statements whose span starts on ``line``."""
        return [s.id for s in self if s.span.line_start == line and (file is None or s.span.file == file)]

    def lines_of(self, sids: Iterable[int]) -> set[int]:
        out: set[int] = set()
        for sid in sids:
            out.update(self.statements[sid].span.lines())
        return out


def check_configuration(model: ProgramModel, c: Configuration) -> None:
    for opt in c.options:
        if opt not in model.options:
            raise ModelError(f"configuration {c.id!r} sets unknown option {opt!r}")
    for opt in sorted(model.options):
        if opt not in c.options:
            raise ModelError(f"configuration {c.id!r} does not assign option {opt!r}")


def statements_enabled(model: ProgramModel, c: Configuration) -> frozenset[int]:
    """Statements whose presence condition holds under ``c``; core always included."""
    check_configuration(model, c)
    values = c.selections
    return frozenset(s.id for s in model if s.enabled_in(values))
