from __future__ import annotations

import itertools

import pytest

from cofl.model import (
    Configuration,
    ConfigurationSuite,
    FeatureLiteral,
    FeatureSelection,
    ModelError,
    ProgramModel,
    Span,
    Statement,
    partition_suite,
    selection_set,
    statements_enabled,
)


def stmt(sid, pc=()):
    return Statement(sid, Span("t.cvl", sid, sid), frozenset(FeatureLiteral(o, v) for o, v in pc))


class TestStatementsEnabled:
    def test_slab_off_excludes_slab_block(self, km, km_lines):
        c4 = km.suite["c4"]
        assert c4["SLAB"] is False
        enabled = statements_enabled(km.model, c4)
        slab = km.model.phi_of(FeatureLiteral("SLAB", True))
        assert slab and not (slab & enabled)
        assert {km_lines[s] for s in slab} == {11, 12}

    def test_core_statement_always_enabled(self):
        m = ProgramModel([stmt(1), stmt(2, [("A", True)])])
        for v in (True, False):
            assert 1 in statements_enabled(m, Configuration("c", {"A": v}))

    def test_unknown_option_rejected(self):
        m = ProgramModel([stmt(1, [("A", True)])])
        with pytest.raises(ModelError, match="unknown option"):
            statements_enabled(m, Configuration("c", {"A": True, "Z": False}))

    @pytest.mark.parametrize("a, b", list(itertools.product((True, False), repeat=2)))
    def test_mixed_polarity_guard(self, a, b):
        m = ProgramModel([stmt(1, [("A", True), ("B", False)])])
        got = 1 in statements_enabled(m, Configuration("c", {"A": a, "B": b}))
        assert got == (a and not b)

    def test_contradictory_pc_rejected(self):
        with pytest.raises(ModelError):
            ProgramModel([Statement(1, Span("t", 1, 1), frozenset({FeatureLiteral("A", True), FeatureLiteral("A", False)}))])


class TestPartition:
    def test_kernel_mini(self, km):
        cp, cf = partition_suite(km.suite)
        assert cf == {"c2", "c7"}
        assert {"c1", "c3", "c4", "c5", "c6"} <= cp
        assert cp | cf == set(km.suite.ids)

    def test_all_pass(self):
        s = ConfigurationSuite([Configuration("c1", {"A": True})], {("c1", "t"): True})
        assert partition_suite(s) == ({"c1"}, frozenset())

    def test_one_failure_dominates(self):
        s = ConfigurationSuite([Configuration("c1", {"A": True})], {("c1", "t1"): True, ("c1", "t2"): False})
        assert partition_suite(s) == (frozenset(), {"c1"})

    def test_configuration_without_verdicts(self):
        s = ConfigurationSuite([Configuration("c1", {"A": True}), Configuration("c2", {"A": False})], {("c1", "t"): True})
        with pytest.raises(ModelError, match="c2"):
            partition_suite(s)


class TestSuiteValidation:
    def test_duplicate_selections(self):
        with pytest.raises(ModelError, match="identical"):
            ConfigurationSuite([Configuration("a", {"X": True}), Configuration("b", {"X": True})], {})

    def test_mismatched_options(self):
        with pytest.raises(ModelError):
            ConfigurationSuite([Configuration("a", {"X": True}), Configuration("b", {"Y": True})], {})

    def test_unknown_verdict_config(self):
        with pytest.raises(ModelError):
            ConfigurationSuite([Configuration("a", {"X": True})], {("zz", "t"): True})

    def test_inconsistent_selection_set(self):
        with pytest.raises(ModelError):
            selection_set([FeatureSelection("A", True), FeatureSelection("A", False)])

    def test_configuration_equality_ignores_id(self):
        assert Configuration("a", {"X": True}) == Configuration("b", {"X": True})
