"""Suspicious partial configurations (SPCs).

An SPC is a minimal set of feature selections such that every tested
configuration containing it fails (necessity) and no passing configuration
contains it (sufficiency). Because every tested configuration is either
passing or failing, both conditions reduce to "no passing configuration
contains S"; the checks are nevertheless kept separate so each can report
its own counterexample.

Within one failing configuration ``c`` the SPCs contained in ``c`` are exactly
the minimal sets hitting every *switch set* ``c \\ c'`` for passing ``c'``.
:func:`detect_spcs` enumerates subsets of the union of those switch sets in
ascending size; :func:`brute_force_spcs` applies the definitions literally and
serves as a test oracle.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable

from .model import (
    Configuration,
    ConfigurationSuite,
    FeatureSelection,
    ModelError,
    format_selections,
    partition_suite,
    selection_set,
)

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 1 << 20
BRUTE_FORCE_CAP = 16


class BudgetExceeded(RuntimeError):
    """Raised when subset enumeration would exceed the configured budget."""

    def __init__(self, size: int, budget: int):
        super().__init__(
            f"switch-set union has {size} selections (2^{size} candidate subsets) "
            f"which exceeds the enumeration budget of {budget}; raise it with --budget"
        )
        self.size = size
        self.budget = budget


class SingleFaultError(ValueError):
    pass


SelectionSet = frozenset  # frozenset[FeatureSelection]


def _key(sels: Iterable[FeatureSelection]) -> tuple:
    items = sorted((s.option, s.value) for s in sels)
    return (len(items), tuple(items))


@dataclass(frozen=True)
class SuspiciousPartialConfiguration:
    selections: frozenset[FeatureSelection]
    witness_failing: tuple[str, ...] = field(default=())

    def __str__(self) -> str:
        return format_selections(self.selections)

    def sort_key(self) -> tuple:
        return _key(self.selections)

    def as_dict(self) -> dict[str, bool]:
        return {s.option: s.value for s in sorted(self.selections, key=lambda s: s.option)}


@dataclass(frozen=True)
class SwitchFamily:
    """Minimal switch sets of one failing configuration and their union."""

    config: str
    sets: tuple[frozenset[FeatureSelection], ...]
    union: frozenset[FeatureSelection]


def _check_options(sels: Iterable[FeatureSelection], suite: ConfigurationSuite) -> frozenset[FeatureSelection]:
    sels = selection_set(sels)
    known = suite.options
    for s in sels:
        if s.option not in known:
            raise ModelError(f"unknown option {s.option!r}")
    return sels


def check_necessity(S: Iterable[FeatureSelection], suite: ConfigurationSuite) -> tuple[bool, str | None]:
    """Every tested configuration containing ``S`` fails.

    Returns ``(ok, counterexample)`` where the counterexample is the first
    passing configuration (in suite order) that contains ``S``.
    """
    S = _check_options(S, suite)
    cp, _ = partition_suite(suite)
    for c in suite:
        if c.contains(S) and c.id in cp:
            return False, c.id
    return True, None


def check_sufficiency(S: Iterable[FeatureSelection], suite: ConfigurationSuite) -> tuple[bool, str | None]:
    """No passing configuration contains ``S`` (non-strict containment)."""
    S = _check_options(S, suite)
    cp, _ = partition_suite(suite)
    for c in suite:
        if c.id in cp and c.contains(S):
            return False, c.id
    return True, None


def is_spc(S: Iterable[FeatureSelection], suite: ConfigurationSuite) -> bool:
    """Necessity, sufficiency and minimality, checked literally."""
    S = selection_set(S)
    if not (check_necessity(S, suite)[0] and check_sufficiency(S, suite)[0]):
        return False
    for s in S:
        T = S - {s}
        if check_necessity(T, suite)[0] and check_sufficiency(T, suite)[0]:
            return False
    return True


def _minimal(sets: Iterable[frozenset]) -> list[frozenset]:
    ordered = sorted(set(sets), key=_key)
    kept: list[frozenset] = []
    for s in ordered:
        if not any(k <= s for k in kept):
            kept.append(s)
    return kept


def switch_sets(c: Configuration | str, suite: ConfigurationSuite) -> SwitchFamily:
    """Selections of failing ``c`` that must be switched to reach each passing configuration."""
    if isinstance(c, str):
        c = suite[c]
    cp, cf = partition_suite(suite)
    if c.id not in cf:
        raise ModelError(f"configuration {c.id!r} is not failing")
    mine = c.selection_set()
    diffs = []
    for other in suite:
        if other.id in cp:
            d = mine - other.selection_set()
            assert d, f"{c.id} and {other.id} have identical selections"
            diffs.append(frozenset(d))
    sets = tuple(_minimal(diffs))
    union = frozenset().union(*sets) if sets else frozenset()
    return SwitchFamily(c.id, sets, union)


class _Bits:
    """Bit encoding of selections: one bit per (option, value) pair."""

    def __init__(self, options: Iterable[str]):
        self.index: dict[FeatureSelection, int] = {}
        self.items: list[FeatureSelection] = []
        for opt in sorted(options):
            for val in (False, True):
                self.index[FeatureSelection(opt, val)] = len(self.items)
                self.items.append(FeatureSelection(opt, val))

    def mask(self, sels: Iterable[FeatureSelection]) -> int:
        m = 0
        for s in sels:
            m |= 1 << self.index[s]
        return m

    def unmask(self, m: int) -> frozenset[FeatureSelection]:
        return frozenset(self.items[i] for i in range(len(self.items)) if m >> i & 1)


def _witnesses(S: frozenset, suite: ConfigurationSuite, cf: frozenset[str]) -> tuple[str, ...]:
    return tuple(c.id for c in suite if c.id in cf and c.contains(S))


def _finalize(found: dict[frozenset, None], suite: ConfigurationSuite, cf) -> list[SuspiciousPartialConfiguration]:
    out = [SuspiciousPartialConfiguration(S, _witnesses(S, suite, cf)) for S in found]
    out.sort(key=SuspiciousPartialConfiguration.sort_key)
    return out


def detect_spcs(suite: ConfigurationSuite, budget: int = DEFAULT_BUDGET) -> list[SuspiciousPartialConfiguration]:
    """All SPCs of the suite, ordered by size then option name.

    Raises :class:`BudgetExceeded` if any failing configuration's switch-set
    union has more than ``log2(budget)`` selections.
    """
    cp, cf = partition_suite(suite)
    if not cf:
        log.info("no failing configurations; nothing to detect")
        return []
    bits = _Bits(suite.options)
    found: dict[frozenset, None] = {}
    for c in suite:
        if c.id not in cf:
            continue
        fam = switch_sets(c, suite)
        if (1 << len(fam.union)) > budget:
            raise BudgetExceeded(len(fam.union), budget)
        family = [bits.mask(s) for s in fam.sets]
        pool = sorted(bits.index[s] for s in fam.union)
        hits: list[int] = []
        for k in range(len(pool) + 1):
            for combo in itertools.combinations(pool, k):
                m = 0
                for b in combo:
                    m |= 1 << b
                if any(h & m == h for h in hits):
                    continue
                # must intersect every switch set of c
                if all(m & f for f in family):
                    hits.append(m)
        for m in hits:
            found.setdefault(bits.unmask(m), None)
    result = _finalize(found, suite, cf)
    for spc in result:
        assert check_necessity(spc.selections, suite)[0] and check_sufficiency(spc.selections, suite)[0]
    return result


def brute_force_spcs(suite: ConfigurationSuite, cap: int = BRUTE_FORCE_CAP) -> list[SuspiciousPartialConfiguration]:
    """Definition-literal enumeration over every consistent selection set.

    Only sets contained in at least one failing configuration are
    considered; a set contained in no tested configuration meets both
    conditions vacuously and carries no evidence.
    """
    options = sorted(suite.options)
    if len(options) > cap:
        raise ValueError(f"{len(options)} options exceed the brute-force cap of {cap}")
    cp, cf = partition_suite(suite)
    if not cf:
        return []
    bits = _Bits(options)
    cp_masks = [bits.mask(c.selection_set()) for c in suite if c.id in cp]
    cf_masks = [bits.mask(c.selection_set()) for c in suite if c.id in cf]

    def good(m: int) -> bool:
        contained = any(m & cm == m for cm in cf_masks)
        necessary = not any(m & pm == m for pm in cp_masks)
        return contained and necessary

    valid = []
    # each option: absent, False, True
    for assignment in itertools.product((None, False, True), repeat=len(options)):
        m = 0
        for opt, val in zip(options, assignment):
            if val is not None:
                m |= 1 << bits.index[FeatureSelection(opt, val)]
        if good(m):
            valid.append(m)
    kept: list[int] = []
    for m in sorted(valid, key=lambda v: (bin(v).count("1"), v)):
        if not any(k & m == k for k in kept):
            kept.append(m)
    return _finalize({bits.unmask(m): None for m in kept}, suite, cf)


def single_fault_spc(suite: ConfigurationSuite) -> SuspiciousPartialConfiguration:
    """SPC under the single-fault assumption.

    Starts from the selections common to every failing configuration and
    keeps those whose individual flip inside some failing configuration
    yields a tested passing configuration.
    """
    cp, cf = partition_suite(suite)
    if not cf:
        raise SingleFaultError("no failing configurations")
    failing = [c for c in suite if c.id in cf]
    common = frozenset.intersection(*(c.selection_set() for c in failing))
    if not common:
        raise SingleFaultError("no common selections; single-bug assumption violated")
    by_sels = {c.selection_set(): c.id for c in suite}
    kept = set()
    for s in common:
        for c in failing:
            flipped = (c.selection_set() - {s}) | {s.flipped()}
            cid = by_sels.get(flipped)
            if cid is not None and cid in cp:
                kept.add(s)
                break
    S = frozenset(kept)
    ok_n, cx_n = check_necessity(S, suite)
    ok_s, cx_s = check_sufficiency(S, suite)
    if not (ok_n and ok_s):
        raise SingleFaultError(
            f"candidate {format_selections(S)} is contained by passing configuration "
            f"{cx_n or cx_s}; single-bug assumption violated"
        )
    return SuspiciousPartialConfiguration(S, _witnesses(S, suite, cf))
