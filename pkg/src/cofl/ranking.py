"""Spectrum counters, suspiciousness formulas, ranking and the EXAM metric."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .dependence import ExecutionTrace
from .model import ConfigurationSuite, ModelError


@dataclass(frozen=True)
class Counts:
    n_cf: int
    n_cs: int
    n_f: int
    n_s: int


@dataclass
class SpectrumCounters:
    """Per-statement coverage by failing and passing tests."""

    n_f: int
    n_s: int
    failed: dict[int, int] = field(default_factory=dict)
    passed: dict[int, int] = field(default_factory=dict)

    def __getitem__(self, sid: int) -> Counts:
        return Counts(self.failed.get(sid, 0), self.passed.get(sid, 0), self.n_f, self.n_s)

    @property
    def executed(self) -> frozenset[int]:
        return frozenset(self.failed) | frozenset(self.passed)


def count_spectra(traces: Iterable[ExecutionTrace], suite: ConfigurationSuite) -> SpectrumCounters:
    n_f = sum(1 for ok in suite.verdicts.values() if not ok)
    n_s = len(suite.verdicts) - n_f
    counters = SpectrumCounters(n_f, n_s)
    for t in traces:
        key = (t.config, t.test)
        if key not in suite.verdicts:
            raise ModelError(f"trace {t.config}/{t.test} has no verdict")
        bucket = counters.passed if suite.verdicts[key] else counters.failed
        for sid in set(t.executed):
            bucket[sid] = bucket.get(sid, 0) + 1
    return counters


def _check(c: Counts) -> None:
    if c.n_f <= 0:
        raise ValueError("no failing tests: nothing to localize")
    if not (0 <= c.n_cf <= c.n_f and 0 <= c.n_cs <= max(c.n_s, 0)):
        raise ValueError(f"inconsistent counters {c}")


def tarantula(c: Counts) -> float:
    _check(c)
    if c.n_cf == 0:
        return 0.0
    fail = c.n_cf / c.n_f
    # without passing tests the pass ratio is taken as zero
    ok = c.n_cs / c.n_s if c.n_s else 0.0
    return fail / (fail + ok)


def ochiai(c: Counts) -> float:
    _check(c)
    if c.n_cf == 0:
        return 0.0
    return c.n_cf / math.sqrt(c.n_f * (c.n_cf + c.n_cs))


FORMULAS: dict[str, Callable[[Counts], float]] = {"tarantula": tarantula, "ochiai": ochiai}


@dataclass(frozen=True)
class RankedEntry:
    sid: int
    score: float
    rank: int


@dataclass
class RankedReport:
    entries: list[RankedEntry]
    mode: str
    formula: str

    @property
    def sds(self) -> int:
        return len(self.entries)

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(e.sid for e in self.entries)

    def rank_of(self, sid: int) -> int | None:
        for e in self.entries:
            if e.sid == sid:
                return e.rank
        return None


class EmptyDomain(ValueError):
    pass


def rank(domain: Iterable[int], counters: SpectrumCounters, formula: str = "tarantula", mode: str = "cofl") -> RankedReport:
    """Order ``domain`` by descending score; tied statements share the worst rank."""
    domain = sorted(set(domain))
    if not domain:
        raise EmptyDomain("nothing to rank: the suspicious-statement domain is empty")
    fn = FORMULAS[formula]
    scored = sorted(((fn(counters[s]), s) for s in domain), key=lambda p: (-p[0], p[1]))
    entries: list[RankedEntry] = []
    i = 0
    while i < len(scored):
        j = i
        while j + 1 < len(scored) and scored[j + 1][0] == scored[i][0]:
            j += 1
        for score, sid in scored[i : j + 1]:
            entries.append(RankedEntry(sid, score, j + 1))
        i = j + 1
    return RankedReport(entries, mode, formula)


def exam(report: RankedReport, faulty: Iterable[int], total_statements: int) -> float | None:
    """Percentage of the program inspected before reaching a faulty statement.

    Returns ``None`` (a miss) when no faulty statement is in the ranked domain.
    """
    faulty = set(faulty)
    if not faulty:
        raise ValueError("faulty set must be non-empty")
    if total_statements < report.sds:
        raise ValueError("total statement count is smaller than the ranked domain")
    ranks = [e.rank for e in report.entries if e.sid in faulty]
    if not ranks:
        return None
    return min(ranks) / total_statements * 100.0
