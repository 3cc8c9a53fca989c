"""Bundled example inputs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .cvl import Program, SourceUnit, parse_program
from .dependence import ExecutionTrace
from .io import parse_traces, suite_from_dict
from .model import ConfigurationSuite


@dataclass
class Fixture:
    program: Program
    suite: ConfigurationSuite
    traces: list[ExecutionTrace]
    faulty_lines: tuple[int, ...] = ()

    @property
    def model(self):
        return self.program.model


def data_path(name: str):
    return resources.files("cofl") / "data" / name


def kernel_mini() -> Fixture:
    """Slab-allocator excerpt whose loop overruns the cache array.

    The overrun needs a 256K page size without the 16K override, the slab
    allocator, the cache array and lock debugging all at once.
    """
    text = data_path("kernel_mini.cvl").read_text(encoding="utf-8")
    program = parse_program([SourceUnit("kernel_mini.cvl", text)])
    suite = suite_from_dict(json.loads(data_path("kernel_mini.suite.json").read_text(encoding="utf-8")))
    traces = parse_traces(data_path("kernel_mini.traces.ndjson").read_text(encoding="utf-8").splitlines())
    return Fixture(program, suite, traces, faulty_lines=(22,))
