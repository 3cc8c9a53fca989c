"""Regenerate the kernel-mini suite and trace files from the source fixture.

The verdict table is transcribed by hand; traces follow the control flow each
test takes (the failing runs stop at the out-of-bounds read in the loop).
"""

from __future__ import annotations

import json
from pathlib import Path

from cofl.cvl import parse_files

DATA = Path(__file__).resolve().parent.parent / "src" / "cofl" / "data"

BASE = dict(LOCKDEP=True, NUMA=True, PPC_16K_PAGES=True, PPC_256K_PAGES=True, SLAB=True, SLOB=False)


def configs() -> list[tuple[str, dict[str, bool]]]:
    c1 = dict(BASE)
    c2 = dict(c1, PPC_16K_PAGES=False)
    c7 = dict(c2, NUMA=False)
    out = [
        ("c1", c1),
        ("c2", c2),
        ("c3", dict(c2, PPC_256K_PAGES=False)),
        ("c4", dict(c2, SLAB=False)),
        ("c5", dict(c2, SLOB=True)),
        ("c6", dict(c2, LOCKDEP=False)),
        ("c7", c7),
    ]
    # flip each selection of the failing pair's common core inside c7
    for i, opt in enumerate(["PPC_16K_PAGES", "SLAB", "PPC_256K_PAGES", "LOCKDEP", "SLOB"], start=8):
        out.append((f"c{i}", dict(c7, **{opt: not c7[opt]})))
    return out


def main() -> None:
    src = DATA / "kernel_mini.cvl"
    model = parse_files([str(src)]).model
    at = lambda line: model.statements_at(line)  # noqa: E731
    failing = {"c2", "c7"}
    suite = {"configurations": [], "verdicts": []}
    traces = []
    for cid, sel in configs():
        suite["configurations"].append({"id": cid, "selections": sel})
        globals_ = [s.id for s in model if s.function is None and s.kind in ("define", "decl") and s.enabled_in(sel)]
        slab = at(18)
        lock: list[int] = []
        if sel["LOCKDEP"]:
            lock = at(21) + at(22) + at(24)
            if cid not in failing:
                lock += at(26) + at(27) + slab
        for test, executed in (("t_lock", globals_ + lock), ("t_slab", globals_ + slab)):
            ok = not (test == "t_lock" and cid in failing)
            suite["verdicts"].append({"config": cid, "test": test, "pass": ok})
            traces.append({"config": cid, "test": test, "executed": executed})
    (DATA / "kernel_mini.suite.json").write_text(json.dumps(suite, indent=1) + "\n")
    with open(DATA / "kernel_mini.traces.ndjson", "w") as fh:
        for rec in traces:
            fh.write(json.dumps(rec) + "\n")


if __name__ == "__main__":
    main()
