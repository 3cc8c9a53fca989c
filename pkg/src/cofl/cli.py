"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 empty analytic result (no SPC, no
suspicious statement, nothing failing), 3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import io
import itertools
import json
import logging
import sys
from typing import Sequence

from . import io as fmt
from .cvl import ParseError, lint_model, parse_files
from .dependence import TraceError
from .harness.experiment import CorpusSpec, kernel_mini_case, run_cases, run_experiment
from .interactions import PropagationIndex, detect_interaction, implementation_lines, split_features
from .model import ModelError, ProgramModel, format_selections
from .pipeline import Localization, Options, localize
from .ranking import EmptyDomain
from .spc import DEFAULT_BUDGET, BudgetExceeded, SingleFaultError, detect_spcs, single_fault_spc

EXIT_OK, EXIT_INPUT, EXIT_EMPTY, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("cofl")

class _Empty(Exception):
    pass


def load_model_arg(paths: Sequence[str]) -> ProgramModel:
    if all(p.endswith(".cvl") for p in paths):
        return parse_files(paths).model
    if len(paths) != 1:
        raise ModelError("give either .cvl sources or a single model file")
    return fmt.load_model(paths[0])


# -- commands -----------------------------------------------------------

def cmd_parse(args, out: io.StringIO) -> int:
    program = parse_files(args.paths)
    for w in lint_model(program.model):
        print(str(w), file=sys.stderr)
    fmt.dump_model(program.model, out)
    return EXIT_OK


def _spc_list(args):
    suite = fmt.load_suite(args.suite)
    if args.model:
        model = load_model_arg(args.model)
        unknown = suite.options - model.options
        if unknown:
            log.warning("options without guarded code: %s", ", ".join(sorted(unknown)))
    if args.single_fault:
        return suite, [single_fault_spc(suite)]
    return suite, detect_spcs(suite, budget=args.budget)


def cmd_spc(args, out) -> int:
    _, spcs = _spc_list(args)
    if args.format == "json":
        json.dump(fmt.spcs_to_list(spcs), out, indent=1)
        out.write("\n")
    else:
        for s in spcs:
            out.write(f"{format_selections(s.selections)}  witnesses: {', '.join(s.witness_failing)}\n")
    return EXIT_OK if spcs else EXIT_EMPTY


def cmd_interactions(args, out) -> int:
    model = load_model_arg(args.model)
    suite = fmt.load_suite(args.suite)
    spcs = fmt.load_spcs(args.spcs)
    config = suite[args.config]
    prop = args.propagation == "on"
    index = PropagationIndex(model, config) if prop else None
    records = []
    for spc in spcs:
        if not config.contains(spc.selections):
            log.warning("configuration %s does not contain SPC %s; skipped", config.id, spc)
            continue
        enabled, _ = split_features(model, spc)
        for f1, f2 in itertools.combinations(enabled, 2):
            it = detect_interaction(model, f1, f2, config, propagation=prop, index=index)
            if it is None:
                continue
            records.append({
                "spc": spc.as_dict(),
                "pair": [str(f) for f in it.pair],
                "kind": it.kind,
                "kinds": sorted(it.kinds),
                "entities": sorted(str(e) for e in it.entities),
                "implementation": sorted(it.implementation),
                "lines": implementation_lines(model, it.implementation),
            })
    if args.format == "json":
        json.dump(records, out, indent=1)
        out.write("\n")
    else:
        for r in records:
            out.write(
                f"{r['pair'][0]} x {r['pair'][1]}  {r['kind']}  via {', '.join(r['entities'])}"
                f"  lines {', '.join(map(str, r['lines']))}\n"
            )
    return EXIT_OK if records else EXIT_EMPTY


def report_dict(model: ProgramModel, loc: Localization) -> dict:
    entries = []
    for e in loc.report.entries:
        s = model[e.sid]
        entries.append({
            "rank": e.rank,
            "score": e.score,
            "id": e.sid,
            "file": s.span.file,
            "lines": [s.span.line_start, s.span.line_end],
            "text": s.text,
        })
    return {
        "mode": loc.report.mode,
        "formula": loc.report.formula,
        "sds": loc.report.sds,
        "spcs": [format_selections(s.selections) for s in loc.spcs],
        "entries": entries,
    }


def render_report_text(d: dict) -> str:
    lines = [f"mode: {d['mode']}", f"formula: {d['formula']}", f"sds: {d['sds']}"]
    lines += [f"spc: {s}" for s in d["spcs"]]
    lines.append("rank\tscore\tid\tlocation\ttext")
    for e in d["entries"]:
        lo, hi = e["lines"]
        loc = f"{e['file']}:{lo}" if lo == hi else f"{e['file']}:{lo}-{hi}"
        lines.append(f"{e['rank']}\t{e['score']!r}\t{e['id']}\t{loc}\t{e['text']}")
    return "\n".join(lines) + "\n"


def parse_report_text(text: str) -> dict:
    """Inverse of :func:`render_report_text`."""
    lines = text.rstrip("\n").split("\n")
    d: dict = {"spcs": [], "entries": []}
    i = 0
    while not lines[i].startswith("rank\t"):
        key, _, value = lines[i].partition(": ")
        if key == "spc":
            d["spcs"].append(value)
        else:
            d[key] = int(value) if key == "sds" else value
        i += 1
    for line in lines[i + 1:]:
        rank, score, sid, loc, text = line.split("\t", 4)
        file, _, span = loc.rpartition(":")
        lo, _, hi = span.partition("-")
        d["entries"].append({
            "rank": int(rank), "score": float(score), "id": int(sid), "file": file,
            "lines": [int(lo), int(hi or lo)], "text": text,
        })
    return d


def _options(args) -> Options:
    return Options(
        mode=args.mode,
        formula=args.formula,
        direction=args.direction,
        propagation=args.propagation == "on",
        budget=args.budget,
        jobs=args.jobs,
    )


def cmd_localize(args, out) -> int:
    model = load_model_arg(args.model)
    suite = fmt.load_suite(args.suite)
    traces = fmt.load_traces(args.traces)
    if not suite.failing_tests():
        raise _Empty("no failing tests: nothing to localize")
    loc = localize(model, suite, traces, _options(args))
    d = report_dict(model, loc)
    if args.format == "json":
        json.dump(d, out, indent=1)
        out.write("\n")
    else:
        out.write(render_report_text(d))
    return EXIT_OK


def cmd_eval(args, out) -> int:
    opts = _options(args)
    opts.jobs = 1  # parallelism is across bugs, not inside one localization
    formulas = (args.formula,) if args.single_formula else ("tarantula", "ochiai")
    if args.corpus == "kernel-mini":
        result = run_cases([kernel_mini_case()], formulas, opts)
    else:
        result = run_experiment(CorpusSpec.load(args.corpus), formulas, opts, jobs=args.jobs)
    if args.table:
        with open(args.table, "w", encoding="utf-8") as fh:
            json.dump(result.as_dict(), fh, indent=1)
            fh.write("\n")
    if args.format == "json":
        json.dump(result.as_dict(), out, indent=1)
        out.write("\n")
    else:
        out.write(result.table())
    return EXIT_OK


# -- argument parsing ---------------------------------------------------

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("baseline", "cofl"), default="cofl")
    p.add_argument("--formula", choices=("tarantula", "ochiai"), default="tarantula")
    p.add_argument("--direction", choices=("forward", "backward", "both"), default="both")
    p.add_argument("--propagation", choices=("on", "off"), default="on")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="maximum candidate subsets per failing configuration")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cofl", description="Localize configuration-dependent faults.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse .cvl sources into a model file")
    p.add_argument("paths", nargs="+")
    p.add_argument("-o", "--output")

    p = sub.add_parser("spc", help="detect suspicious partial configurations")
    p.add_argument("--suite", required=True)
    p.add_argument("--model", nargs="+")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--single-fault", action="store_true", help="use the common-selection shortcut")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-o", "--output")

    p = sub.add_parser("interactions", help="list feature interactions for SPCs under a configuration")
    p.add_argument("--model", nargs="+", required=True)
    p.add_argument("--suite", required=True)
    p.add_argument("--spcs", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--propagation", choices=("on", "off"), default="on")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-o", "--output")

    p = sub.add_parser("localize", help="rank suspicious statements")
    p.add_argument("--model", nargs="+", required=True, help=".cvl sources or one model JSON file")
    p.add_argument("--suite", required=True)
    p.add_argument("--traces", required=True)
    _add_run_flags(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-o", "--output")

    p = sub.add_parser("eval", help="run a seeded-bug experiment")
    p.add_argument("corpus", help="corpus spec JSON, or 'kernel-mini'")
    _add_run_flags(p)
    p.add_argument("--single-formula", action="store_true", help="only evaluate --formula")
    p.add_argument("--table", help="also write the result table as JSON to this path")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-o", "--output")
    return parser


COMMANDS = {
    "parse": cmd_parse,
    "spc": cmd_spc,
    "interactions": cmd_interactions,
    "localize": cmd_localize,
    "eval": cmd_eval,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    out = io.StringIO()
    try:
        code = COMMANDS[args.command](args, out)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(str(d), file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (EmptyDomain, _Empty) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (ModelError, TraceError, SingleFaultError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = out.getvalue()
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
