"""Walk through localization of the bundled kernel-mini fault, one stage at a time.

Run:  python3 demos/kernel_mini_walkthrough.py
"""

from __future__ import annotations

from cofl.dependence import build_pdg, suspicious_statements, validate_traces
from cofl.fixtures import kernel_mini
from cofl.interactions import build_interaction_context, implementation_lines
from cofl.model import partition_suite
from cofl.pipeline import Options, localize
from cofl.ranking import exam
from cofl.spc import detect_spcs, switch_sets


def heading(text: str) -> None:
    print(f"\n== {text}")


fx = kernel_mini()
model, suite = fx.model, fx.suite
source = {s.span.line_start: s.text for s in model}

heading("Program")
print(f"{len(model)} statements, options: {', '.join(sorted(model.options))}")

heading("Which configurations fail?")
cp, cf = partition_suite(suite)
print("failing:", ", ".join(c for c in suite.ids if c in cf))
print("passing:", ", ".join(c for c in suite.ids if c in cp))

heading("Switch sets of c2 (selections to flip to reach a passing configuration)")
for s in switch_sets("c2", suite).sets:
    print("  {" + ", ".join(map(str, sorted(s))) + "}")

heading("Suspicious partial configurations")
spcs = detect_spcs(suite)
for spc in spcs:
    print(f"  {spc}  (witnessed by {', '.join(spc.witness_failing)})")

heading("Feature interactions inside the SPC")
ctx = build_interaction_context(model, spcs[0], suite)
for it in ctx.interactions:
    print(f"  {it.pair[0]} x {it.pair[1]}: {it.kind} via {', '.join(sorted(map(str, it.entities)))}")
print("enabled-side statements at lines", implementation_lines(model, ctx.es))
print("statements reached by disabled features at lines", implementation_lines(model, ctx.ds))

heading("Suspicious statements")
traces = validate_traces(model, suite, fx.traces)
sus = suspicious_statements(model, ctx, traces, suite, graph=build_pdg(model))
for line in implementation_lines(model, sus.statements):
    print(f"  {line:3d}  {source[line]}")

heading("Ranking: CoFL vs plain spectrum ranking (Tarantula)")
faulty = set(model.statements_at(fx.faulty_lines[0]))
for mode in ("baseline", "cofl"):
    report = localize(model, suite, fx.traces, Options(mode=mode)).report
    print(f"{mode}: {report.sds} statements ranked, EXAM {exam(report, faulty, len(model)):.2f}%")
    for e in report.entries[:4]:
        print(f"   rank {e.rank:2d}  {e.score:.3f}  line {model[e.sid].span.line_start}")
