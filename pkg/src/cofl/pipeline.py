"""End-to-end localization: SPCs, interaction contexts, suspicious sets, ranking."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

from .dependence import (
    ExecutionTrace,
    SuspiciousSet,
    build_pdg,
    suspicious_statements,
    validate_traces,
)
from .interactions import InteractionContext, PropagationIndex, build_interaction_context
from .model import ConfigurationSuite, ProgramModel
from .ranking import RankedReport, count_spectra, rank
from .spc import DEFAULT_BUDGET, SuspiciousPartialConfiguration, detect_spcs


@dataclass
class Options:
    mode: str = "cofl"
    formula: str = "tarantula"
    direction: str = "both"
    propagation: bool = True
    budget: int = DEFAULT_BUDGET
    jobs: int = 1


@dataclass
class Localization:
    report: RankedReport
    spcs: list[SuspiciousPartialConfiguration] = field(default_factory=list)
    contexts: list[InteractionContext] = field(default_factory=list)
    suspicious: list[SuspiciousSet] = field(default_factory=list)


def localize(
    model: ProgramModel,
    suite: ConfigurationSuite,
    traces: Iterable[ExecutionTrace],
    options: Options | None = None,
) -> Localization:
    """Rank statements for the failures recorded in ``suite``.

    Baseline mode ranks every executed statement. CoFL mode ranks only the
    union of suspicious sets over all detected SPCs.
    """
    opts = options or Options()
    traces = list(traces)
    index = validate_traces(model, suite, traces)
    counters = count_spectra(traces, suite)
    if opts.mode == "baseline":
        return Localization(rank(counters.executed, counters, opts.formula, "baseline"))
    if opts.mode != "cofl":
        raise ValueError(f"unknown mode {opts.mode!r}")

    spcs = detect_spcs(suite, budget=opts.budget)
    graph = build_pdg(model)
    prop_cache: dict[str, PropagationIndex] = {}
    if opts.propagation:
        for spc in spcs:
            cid = spc.witness_failing[0]
            if cid not in prop_cache:
                prop_cache[cid] = PropagationIndex(model, suite[cid])

    def analyze(spc: SuspiciousPartialConfiguration):
        ctx = build_interaction_context(
            model, spc, suite,
            propagation=opts.propagation,
            index=prop_cache.get(spc.witness_failing[0]),
        )
        sus = suspicious_statements(model, ctx, index, suite, direction=opts.direction, graph=graph)
        return ctx, sus

    if opts.jobs > 1 and len(spcs) > 1:
        with ThreadPoolExecutor(max_workers=opts.jobs) as pool:
            results = list(pool.map(analyze, spcs))
    else:
        results = [analyze(s) for s in spcs]

    domain: set[int] = set()
    for _, sus in results:
        domain |= sus.statements
    report = rank(domain, counters, opts.formula, "cofl")
    return Localization(report, spcs, [r[0] for r in results], [r[1] for r in results])
