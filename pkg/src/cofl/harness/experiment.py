"""Seeded-bug experiments comparing plain spectrum ranking with CoFL."""

from __future__ import annotations

import json
import os
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from ..cvl import Program, SourceUnit, parse_program
from ..dependence import ExecutionTrace
from ..model import Configuration, ConfigurationSuite, ProgramModel
from ..pipeline import Options, localize
from ..ranking import EmptyDomain, exam
from ..spc import detect_spcs
from ..interactions import split_features
from .generator import BUG_KINDS, bug_sites, generate, seed_bug
from .interpreter import Interpreter, RuntimeFault

EXHAUSTIVE_LIMIT = 7
MAX_ATTEMPTS = 60


def env_seed(default: int) -> int:
    value = os.environ.get("COFL_SEED")
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"COFL_SEED must be an integer, got {value!r}") from None


@dataclass
class CorpusSpec:
    seed: int = 1
    bugs: int = 32
    options: tuple[int, int] = (4, 7)
    functions: tuple[int, int] = (2, 5)
    kinds: tuple[str, ...] = BUG_KINDS
    tests: tuple[int, ...] = (0, 1, 2, 3, 5, 8)
    sample: int = 100

    @classmethod
    def from_dict(cls, data: dict) -> CorpusSpec:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown corpus keys: {sorted(unknown)}")
        spec = cls(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in data.items()})
        spec.seed = env_seed(spec.seed)
        for k in spec.kinds:
            if k not in BUG_KINDS:
                raise ValueError(f"unknown bug kind {k!r}")
        return spec

    @classmethod
    def load(cls, path: str) -> CorpusSpec:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Case:
    """One localization problem with known faulty statements."""

    name: str
    model: ProgramModel
    suite: ConfigurationSuite
    traces: list[ExecutionTrace]
    faulty: frozenset[int]
    kind: str = ""
    arity: int = 0
    attempts: int = 1


def sample_configurations(options: Sequence[str], rng: random.Random, sample: int = 100) -> list[Configuration]:
    """Every configuration for small option sets, otherwise a random sample."""
    n = len(options)
    if n <= EXHAUSTIVE_LIMIT:
        masks = list(range(1 << n))
    else:
        seen: set[int] = set()
        masks = []
        while len(masks) < min(sample, 1 << n):
            m = rng.getrandbits(n)
            if m not in seen:
                seen.add(m)
                masks.append(m)
    return [
        Configuration(f"c{k + 1}", {opt: bool(m >> i & 1) for i, opt in enumerate(options)})
        for k, m in enumerate(masks)
    ]


def simulate(original: Program, mutant: Program, configs: Iterable[Configuration], tests: Sequence[int]):
    """Run every test under every configuration; the original program is the oracle."""
    verdicts: dict[tuple[str, str], bool] = {}
    traces: list[ExecutionTrace] = []
    configs = list(configs)
    for c in configs:
        good = Interpreter(original, c.selections)
        bad = Interpreter(mutant, c.selections)
        for x in tests:
            expected = good.run("main", [x])
            if not expected.ok:
                raise RuntimeFault(f"reference program fails under {c.id} on x={x}: {expected.error}")
            got = bad.run("main", [x])
            tid = f"x{x}"
            verdicts[(c.id, tid)] = got.ok and got.value == expected.value
            traces.append(ExecutionTrace(c.id, tid, got.executed))
    return ConfigurationSuite(configs, verdicts), traces


def _acceptable(model: ProgramModel, suite: ConfigurationSuite) -> bool:
    outcomes = set(suite.verdicts.values())
    if outcomes != {True, False}:
        return False
    failing = {cid for (cid, _), ok in suite.verdicts.items() if not ok}
    if len(failing) == len(suite):
        return False
    spcs = detect_spcs(suite)
    # the fault must need at least two co-selected features with code
    return any(len(split_features(model, s)[0]) >= 2 for s in spcs)


def build_case(spec: CorpusSpec, index: int) -> Case:
    rng = random.Random(f"{spec.seed}:{index}")
    kind = spec.kinds[index % len(spec.kinds)]
    for attempt in range(1, MAX_ATTEMPTS + 1):
        n_opts = rng.randint(*spec.options)
        n_funcs = rng.randint(*spec.functions)
        base = generate(rng.randrange(1 << 30), n_opts, n_funcs)
        if not bug_sites(base, kind):
            continue
        mutant, bug = seed_bug(base, kind, rng)
        original = parse_program([SourceUnit(base.path, base.render()[0])])
        buggy = parse_program([SourceUnit(mutant.path, mutant.render()[0])])
        configs = sample_configurations(base.options, rng, spec.sample)
        suite, traces = simulate(original, buggy, configs, spec.tests)
        if not _acceptable(buggy.model, suite):
            continue
        faulty = frozenset(buggy.model.statements_at(bug.line))
        return Case(f"bug{index + 1:02d}", buggy.model, suite, traces, faulty, kind, bug.arity, attempt)
    raise RuntimeError(f"could not seed a configuration-dependent {kind} bug in {MAX_ATTEMPTS} attempts")


@dataclass
class Score:
    exam: float | None
    sds: int
    rank: int | None


@dataclass
class BugRow:
    name: str
    kind: str
    arity: int
    statements: int
    configurations: int
    spcs: int
    scores: dict[str, Score] = field(default_factory=dict)  # key "mode/formula"
    seconds: float = 0.0

    def retained(self) -> bool:
        return all(s.exam is not None for k, s in self.scores.items() if k.startswith("cofl/"))


def evaluate_case(case: Case, formulas: Sequence[str] = ("tarantula", "ochiai"), base: Options | None = None) -> BugRow:
    base = base or Options()
    start = time.perf_counter()
    row = BugRow(case.name, case.kind, case.arity, len(case.model), len(case.suite), 0)
    for formula in formulas:
        for mode in ("baseline", "cofl"):
            opts = Options(mode, formula, base.direction, base.propagation, base.budget, base.jobs)
            try:
                loc = localize(case.model, case.suite, case.traces, opts)
            except EmptyDomain:
                row.scores[f"{mode}/{formula}"] = Score(None, 0, None)
                continue
            if mode == "cofl":
                row.spcs = len(loc.spcs)
            ranks = [loc.report.rank_of(s) for s in case.faulty]
            ranks = [r for r in ranks if r is not None]
            row.scores[f"{mode}/{formula}"] = Score(
                exam(loc.report, case.faulty, len(case.model)),
                loc.report.sds,
                min(ranks) if ranks else None,
            )
    row.seconds = time.perf_counter() - start
    return row


def _mean(values: list[float]) -> float | None:
    return statistics.fmean(values) if values else None


@dataclass
class ExperimentResult:
    rows: list[BugRow]
    formulas: tuple[str, ...]

    def retention(self) -> float:
        return sum(r.retained() for r in self.rows) / len(self.rows) if self.rows else 1.0

    def misses(self) -> list[str]:
        return [r.name for r in self.rows if not r.retained()]

    def aggregates(self) -> dict[str, dict[str, float | None]]:
        """Mean EXAM over bugs CoFL retains and mean SDS over all bugs."""
        kept = [r for r in self.rows if r.retained()]
        out = {}
        for formula in self.formulas:
            for mode in ("baseline", "cofl"):
                key = f"{mode}/{formula}"
                out[key] = {
                    "exam": _mean([r.scores[key].exam for r in kept]),
                    "sds": _mean([float(r.scores[key].sds) for r in self.rows]),
                }
        return out

    def as_dict(self, timing: bool = False) -> dict:
        rows = []
        for r in self.rows:
            d = asdict(r)
            if not timing:
                d.pop("seconds")
            rows.append(d)
        return {
            "rows": rows,
            "aggregates": self.aggregates(),
            "retention": self.retention(),
            "misses": self.misses(),
        }

    def table(self) -> str:
        keys = [f"{m}/{f}" for f in self.formulas for m in ("baseline", "cofl")]
        head = ["bug", "kind", "arity", "stmts"] + [f"{k} exam" for k in keys] + [f"{k} sds" for k in keys]
        body = []
        for r in self.rows:
            cells = [r.name, r.kind, str(r.arity), str(r.statements)]
            cells += [_fmt(r.scores[k].exam) for k in keys]
            cells += [str(r.scores[k].sds) for k in keys]
            body.append(cells)
        agg = self.aggregates()
        body.append(["mean", "", "", ""] + [_fmt(agg[k]["exam"]) for k in keys] + [_fmt(agg[k]["sds"]) for k in keys])
        widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in [head] + body]
        lines.append(f"retention {self.retention() * 100:.1f}%  misses: {', '.join(self.misses()) or 'none'}")
        return "\n".join(lines) + "\n"


def _fmt(v: float | None) -> str:
    return "miss" if v is None else f"{v:.2f}"


def _run_one(args) -> BugRow:
    spec, index, formulas, base = args
    return evaluate_case(build_case(spec, index), formulas, base)


def run_experiment(
    spec: CorpusSpec,
    formulas: Sequence[str] = ("tarantula", "ochiai"),
    options: Options | None = None,
    jobs: int = 1,
) -> ExperimentResult:
    formulas = tuple(formulas)
    work = [(spec, i, formulas, options) for i in range(spec.bugs)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, work))
    else:
        rows = [_run_one(w) for w in work]
    return ExperimentResult(rows, formulas)


def run_cases(cases: Iterable[Case], formulas: Sequence[str] = ("tarantula", "ochiai"), options: Options | None = None) -> ExperimentResult:
    return ExperimentResult([evaluate_case(c, formulas, options) for c in cases], tuple(formulas))


def kernel_mini_case() -> Case:
    from ..fixtures import kernel_mini

    fx = kernel_mini()
    faulty = frozenset(sid for line in fx.faulty_lines for sid in fx.model.statements_at(line))
    return Case("kernel-mini", fx.model, fx.suite, fx.traces, faulty, "transcribed", 5)
