"""Generate a small corpus of configuration-dependent bugs and compare rankings.

Run:  python3 demos/seeded_bug_experiment.py [bugs] [jobs]
Set COFL_SEED to draw a different corpus.
"""

from __future__ import annotations

import random
import sys

from cofl.cvl import parse_program
from cofl.harness.experiment import CorpusSpec, build_case, run_experiment
from cofl.harness.generator import generate, seed_bug
from cofl.pipeline import Options

bugs = int(sys.argv[1]) if len(sys.argv) > 1 else 8
jobs = int(sys.argv[2]) if len(sys.argv) > 2 else 4
spec = CorpusSpec.from_dict({"bugs": bugs})

print("A generated program with one seeded off-by-one bug:\n")
base = generate(spec.seed, 4, 2)
mutant, bug = seed_bug(base, "off-by-one", random.Random(spec.seed))
text = mutant.render()[0].splitlines()
for n, line in enumerate(text, 1):
    marker = ">>" if n == bug.line else "  "
    print(f"{marker}{n:3d} {line}")
print(f"\nthe bug needs {', '.join(bug.intended)} selected together")
print(f"{len(parse_program(mutant.render()[0]).model)} statements in the model\n")

case = build_case(spec, 0)
print(f"first corpus case: {case.kind}, {len(case.suite)} configurations, "
      f"{len(case.suite.failing_tests())} failing tests\n")

result = run_experiment(spec, ("tarantula", "ochiai"), Options(), jobs=jobs)
print(result.table())
