from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from cofl import io as fmt
from cofl.cli import main, parse_report_text
from cofl.fixtures import data_path
from cofl.model import ModelError

SRC = str(data_path("kernel_mini.cvl"))
SUITE = str(data_path("kernel_mini.suite.json"))
TRACES = str(data_path("kernel_mini.traces.ndjson"))


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def model_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("m") / "model.json"
    assert main(["parse", SRC, "-o", str(path)]) == 0
    return str(path)


class TestFormats:
    def test_model_round_trip(self, km):
        buf = io.StringIO()
        fmt.dump_model(km.model, buf)
        again = fmt.model_from_dict(json.loads(buf.getvalue()))
        assert [vars_of(s) for s in again] == [vars_of(s) for s in km.model]
        assert again.features == km.model.features

    def test_suite_round_trip(self, km):
        again = fmt.suite_from_dict(fmt.suite_to_dict(km.suite))
        assert again.verdicts == km.suite.verdicts
        assert [c.selections for c in again] == [c.selections for c in km.suite]

    @given(st.lists(st.tuples(st.sampled_from("abc"), st.text("xyz", min_size=1, max_size=3),
                              st.lists(st.integers(1, 99), max_size=5))))
    def test_trace_round_trip(self, recs):
        from cofl.dependence import ExecutionTrace

        traces = [ExecutionTrace(c, t, tuple(e)) for c, t, e in recs]
        buf = io.StringIO()
        fmt.dump_traces(traces, buf)
        assert fmt.parse_traces(buf.getvalue().splitlines()) == traces

    def test_malformed_inputs(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        with pytest.raises(fmt.FormatError, match="invalid JSON"):
            fmt.load_suite(bad)
        with pytest.raises(fmt.FormatError, match="malformed suite"):
            fmt.suite_from_dict({"configurations": []})
        with pytest.raises(fmt.FormatError, match=":2:"):
            fmt.parse_traces(['{"config": "c1", "test": "t", "executed": []}', '{"config": 1}'])
        with pytest.raises(ModelError):
            fmt.load_model(tmp_path / "missing.json")


def vars_of(s):
    return (s.id, s.span, s.pc, s.defs, s.uses, s.parent, s.kind, s.text, s.function)


class TestCommands:
    def test_parse_error_exit_one(self, capsys, tmp_path):
        bad = tmp_path / "bad.cvl"
        bad.write_text("#ifdef A\nint x;\n")
        code, out, err = cli(capsys, "parse", str(bad))
        assert code == 1 and out == ""
        assert f"{bad}:1:1: error: unterminated conditional" in err

    def test_spc(self, capsys, model_file):
        code, out, _ = cli(capsys, "spc", "--suite", SUITE, "--model", model_file, "--format", "json")
        assert code == 0
        (rec,) = json.loads(out)
        assert rec["selections"] == {"LOCKDEP": True, "PPC_16K_PAGES": False, "PPC_256K_PAGES": True,
                                     "SLAB": True, "SLOB": False}
        assert rec["witness_failing"] == ["c2", "c7"]

    def test_spc_all_pass_exit_two(self, capsys, tmp_path, km):
        d = fmt.suite_to_dict(km.suite)
        for v in d["verdicts"]:
            v["pass"] = True
        path = tmp_path / "pass.json"
        path.write_text(json.dumps(d))
        code, out, _ = cli(capsys, "spc", "--suite", str(path), "--format", "json")
        assert code == 2 and json.loads(out) == []

    def test_budget_exit_three(self, capsys):
        code, out, err = cli(capsys, "spc", "--suite", SUITE, "--budget", "8")
        assert code == 3 and out == "" and "--budget" in err

    def test_missing_file_exit_one(self, capsys):
        code, _, err = cli(capsys, "spc", "--suite", "/nonexistent/suite.json")
        assert code == 1 and err.startswith("error:")

    def test_interactions(self, capsys, tmp_path, model_file):
        spcs = tmp_path / "spcs.json"
        assert main(["spc", "--suite", SUITE, "--format", "json", "-o", str(spcs)]) == 0
        code, out, _ = cli(capsys, "interactions", "--model", model_file, "--suite", SUITE,
                           "--spcs", str(spcs), "--config", "c2", "--format", "json")
        assert code == 0
        recs = json.loads(out)
        pair = next(r for r in recs if set(r["pair"]) == {"!SLOB", "LOCKDEP"})
        assert pair["lines"] == [16, 24] and pair["kind"] == "def-use"
        code, out, _ = cli(capsys, "interactions", "--model", model_file, "--suite", SUITE,
                           "--spcs", str(spcs), "--config", "c1")
        assert code == 2 and out == ""

    def test_localize(self, capsys, model_file):
        code, out, _ = cli(capsys, "localize", "--model", model_file, "--suite", SUITE, "--traces", TRACES, "--format", "json")
        assert code == 0
        report = json.loads(out)
        assert sorted(e["lines"][0] for e in report["entries"]) == [1, 11, 12, 22]
        assert report["entries"][0]["lines"] == [22, 22] and report["sds"] == 4

    def test_localize_baseline(self, capsys, km):
        code, out, _ = cli(capsys, "localize", "--model", SRC, "--suite", SUITE, "--traces", TRACES,
                           "--mode", "baseline", "--format", "json")
        assert code == 0
        ids = {e["id"] for e in json.loads(out)["entries"]}
        assert ids == {s for t in km.traces for s in t.executed}

    @pytest.mark.parametrize("extra", [[], ["--mode", "baseline", "--formula", "ochiai"],
                                       ["--direction", "forward", "--propagation", "off"]])
    def test_text_and_json_agree(self, capsys, model_file, extra):
        base = ["localize", "--model", model_file, "--suite", SUITE, "--traces", TRACES, *extra]
        _, text, _ = cli(capsys, *base)
        _, js, _ = cli(capsys, *base, "--format", "json")
        assert parse_report_text(text) == json.loads(js)

    def test_bad_trace_exit_one(self, capsys, tmp_path):
        bad = tmp_path / "t.ndjson"
        bad.write_text('{"config": "c1", "test": "t_lock", "executed": [999]}\n')
        code, _, err = cli(capsys, "localize", "--model", SRC, "--suite", SUITE, "--traces", str(bad))
        assert code == 1 and "999" in err

    def test_eval_kernel_mini(self, capsys, tmp_path):
        table = tmp_path / "table.json"
        code, out, _ = cli(capsys, "eval", "kernel-mini", "--table", str(table))
        assert code == 0 and "kernel-mini" in out
        data = json.loads(table.read_text())
        assert data["rows"][0]["scores"]["cofl/tarantula"]["sds"] == 4

    def test_eval_corpus_file(self, capsys, tmp_path):
        spec = tmp_path / "corpus.json"
        spec.write_text(json.dumps({"seed": 2, "bugs": 2}))
        code, out, _ = cli(capsys, "eval", str(spec), "--format", "json", "--single-formula", "--formula", "ochiai")
        assert code == 0
        data = json.loads(out)
        assert len(data["rows"]) == 2 and set(data["aggregates"]) == {"baseline/ochiai", "cofl/ochiai"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cofl", "spc", "--suite", SUITE],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("{LOCKDEP=T, PPC_16K_PAGES=F, PPC_256K_PAGES=T, SLAB=T, SLOB=F}")
