"""JSON file formats for models, suites, traces and SPC lists."""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable

from .dependence import ExecutionTrace
from .model import (
    Configuration,
    ConfigurationSuite,
    DefKind,
    Entity,
    FeatureLiteral,
    FeatureSelection,
    ModelError,
    ProgramModel,
    Span,
    Statement,
)
from .spc import SuspiciousPartialConfiguration


class FormatError(ModelError):
    """Raised for malformed input files."""


def _load_json(path: str | Path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from None
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None


# -- model --------------------------------------------------------------

def model_to_dict(model: ProgramModel) -> dict:
    stmts = []
    for s in model:
        stmts.append({
            "id": s.id,
            "file": s.span.file,
            "lines": [s.span.line_start, s.span.line_end],
            "pc": sorted(str(f) for f in s.pc),
            "defs": sorted([str(e), k.value] for e, k in s.defs),
            "uses": sorted(str(e) for e in s.uses),
            "parent": s.parent,
            "kind": s.kind,
            "text": s.text,
            "function": s.function,
        })
    entities = [{"name": str(e), "kind": e.kind} for e in sorted(model.entities, key=str)]
    features = sorted(str(f) for f in model.features)
    return {"statements": stmts, "entities": entities, "features": features}


def model_from_dict(data: dict) -> ProgramModel:
    try:
        kinds = {e["name"]: e.get("kind", "variable") for e in data.get("entities", [])}

        def ent(text: str) -> Entity:
            return Entity.parse(text, kinds.get(text, "variable"))

        stmts = []
        for rec in data["statements"]:
            lo, hi = rec["lines"]
            stmts.append(Statement(
                id=int(rec["id"]),
                span=Span(rec.get("file", "<model>"), int(lo), int(hi)),
                pc=frozenset(FeatureLiteral.parse(p) for p in rec.get("pc", [])),
                defs=frozenset((ent(e), DefKind(k)) for e, k in rec.get("defs", [])),
                uses=frozenset(ent(u) for u in rec.get("uses", [])),
                parent=rec.get("parent"),
                kind=rec.get("kind", "stmt"),
                text=rec.get("text", ""),
                function=rec.get("function"),
            ))
        features = [FeatureLiteral.parse(f) for f in data.get("features", [])]
        entities = [ent(name) for name in kinds]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise FormatError(f"malformed model: {exc!r}") from None
    return ProgramModel(stmts, entities, features)


def dump_model(model: ProgramModel, fh: IO[str]) -> None:
    json.dump(model_to_dict(model), fh, indent=1, sort_keys=True)
    fh.write("\n")


def load_model(path: str | Path) -> ProgramModel:
    return model_from_dict(_load_json(path))


# -- suites -------------------------------------------------------------

def suite_from_dict(data: dict) -> ConfigurationSuite:
    try:
        configs = [Configuration(str(c["id"]), {k: bool(v) for k, v in c["selections"].items()})
                   for c in data["configurations"]]
        verdicts = {}
        for v in data["verdicts"]:
            key = (str(v["config"]), str(v["test"]))
            if key in verdicts:
                raise FormatError(f"duplicate verdict for {key[0]}/{key[1]}")
            verdicts[key] = bool(v["pass"])
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed suite: {exc!r}") from None
    return ConfigurationSuite(configs, verdicts)


def suite_to_dict(suite: ConfigurationSuite) -> dict:
    return {
        "configurations": [
            {"id": c.id, "selections": dict(sorted(c.selections.items()))} for c in suite
        ],
        "verdicts": [
            {"config": cid, "test": tid, "pass": ok} for (cid, tid), ok in suite.verdicts.items()
        ],
    }


def load_suite(path: str | Path) -> ConfigurationSuite:
    return suite_from_dict(_load_json(path))


# -- traces -------------------------------------------------------------

def parse_traces(lines: Iterable[str], source: str = "<traces>") -> list[ExecutionTrace]:
    out = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out.append(ExecutionTrace(str(rec["config"]), str(rec["test"]),
                                      tuple(int(x) for x in rec["executed"])))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{source}:{n}: malformed trace record: {exc}") from None
    return out


def load_traces(path: str | Path) -> list[ExecutionTrace]:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_traces(fh, str(path))
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None


def dump_traces(traces: Iterable[ExecutionTrace], fh: IO[str]) -> None:
    for t in traces:
        fh.write(json.dumps({"config": t.config, "test": t.test, "executed": list(t.executed)}) + "\n")


# -- SPC lists ----------------------------------------------------------

def spcs_to_list(spcs: Iterable[SuspiciousPartialConfiguration]) -> list[dict]:
    return [{"selections": s.as_dict(), "witness_failing": list(s.witness_failing)} for s in spcs]


def spcs_from_list(data: list) -> list[SuspiciousPartialConfiguration]:
    try:
        return [
            SuspiciousPartialConfiguration(
                frozenset(FeatureSelection(k, bool(v)) for k, v in rec["selections"].items()),
                tuple(str(w) for w in rec.get("witness_failing", [])),
            )
            for rec in data
        ]
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed SPC list: {exc!r}") from None


def load_spcs(path: str | Path) -> list[SuspiciousPartialConfiguration]:
    return spcs_from_list(_load_json(path))
