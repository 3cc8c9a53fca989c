from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from cofl.model import Configuration, ConfigurationSuite, partition_suite
from cofl.spc import (
    BudgetExceeded,
    SingleFaultError,
    brute_force_spcs,
    check_necessity,
    check_sufficiency,
    detect_spcs,
    is_spc,
    single_fault_spc,
    switch_sets,
)

from oracles import audit_spc, definitional_spcs, random_suite, sel

S1 = sel("PPC_16K_PAGES=F,SLAB=T,PPC_256K_PAGES=T,LOCKDEP=T,SLOB=F")

seeds = st.integers(0, 2**32 - 1)


def as_sets(spcs):
    return {s.selections for s in spcs}


def suite_of(rows):
    """rows: (id, {opt: bool}, passes)"""
    configs = [Configuration(cid, vals) for cid, vals, _ in rows]
    return ConfigurationSuite(configs, {(cid, "t"): ok for cid, _, ok in rows})


class TestChecks:
    def test_two_selection_set_not_necessary(self, km):
        S = sel("SLAB=T,LOCKDEP=T")
        ok, cx = check_necessity(S, km.suite)
        assert not ok
        cp, _ = partition_suite(km.suite)
        containing = {c.id for c in km.suite if c.contains(S) and c.id in cp}
        assert {"c3", "c5"} <= containing
        assert cx in containing

    def test_s1_necessary_and_sufficient(self, km):
        assert check_necessity(S1, km.suite) == (True, None)
        assert check_sufficiency(S1, km.suite) == (True, None)

    def test_vacuous_necessity(self):
        suite = suite_of([("c1", {"A": True, "B": True}, False), ("c2", {"A": False, "B": True}, True)])
        assert check_necessity(sel("A=F,B=F"), suite)[0]

    def test_empty_set_not_sufficient_with_passing(self, km):
        assert check_sufficiency(frozenset(), km.suite)[0] is False

    def test_two_selection_set_not_sufficient(self, km):
        S = sel("SLAB=T,LOCKDEP=T")
        ok, cx = check_sufficiency(S, km.suite)
        assert not ok
        assert km.suite[cx].contains(S) and cx in partition_suite(km.suite)[0]

    def test_s1_is_spc_and_subsets_are_not(self, km):
        assert is_spc(S1, km.suite)
        for s in S1:
            assert not is_spc(S1 - {s}, km.suite)


class TestSwitchSets:
    def test_c2_has_singleton(self, km):
        fam = switch_sets("c2", km.suite)
        assert sel("PPC_16K_PAGES=F") in fam.sets
        for spc in detect_spcs(km.suite):
            if km.suite["c2"].contains(spc.selections):
                assert sel("PPC_16K_PAGES=F") <= spc.selections

    def test_passing_configuration_rejected(self, km):
        with pytest.raises(ValueError):
            switch_sets("c1", km.suite)

    def test_pairwise_diffs_minimal(self):
        rng = random.Random(7)
        opts = ["A", "B", "C", "D"]
        for _ in range(50):
            masks = rng.sample(range(16), rng.randint(2, 10))
            rows = [(f"c{i}", {o: bool(m >> j & 1) for j, o in enumerate(opts)}, i != 0) for i, m in enumerate(masks)]
            suite = suite_of(rows)
            c = suite["c0"]
            diffs = {frozenset(c.selection_set() - p.selection_set()) for p in suite if p.id != "c0"}
            expected = {d for d in diffs if not any(o < d for o in diffs)}
            fam = switch_sets(c, suite)
            assert set(fam.sets) == expected
            assert fam.union == frozenset().union(*expected)

    def test_no_passing_configurations(self):
        suite = suite_of([("c1", {"A": True}, False)])
        fam = switch_sets("c1", suite)
        assert fam.sets == () and fam.union == frozenset()


class TestDetect:
    def test_kernel_mini(self, km):
        spcs = detect_spcs(km.suite)
        assert [s.selections for s in spcs] == [S1]
        assert set(spcs[0].witness_failing) == {"c2", "c7"}

    def test_kernel_mini_oracles_agree(self, km):
        assert as_sets(brute_force_spcs(km.suite)) == {S1}
        assert single_fault_spc(km.suite).selections == S1

    def test_all_pass(self):
        assert detect_spcs(suite_of([("c1", {"A": True}, True), ("c2", {"A": False}, True)])) == []

    def test_single_failing_nothing_passing(self):
        suite = suite_of([("c1", {"A": True, "B": False}, False)])
        assert as_sets(detect_spcs(suite)) == {frozenset()} == definitional_spcs(suite)

    def test_all_fail_matches_brute_force(self):
        suite = suite_of([("c1", {"A": True, "B": False}, False), ("c2", {"A": False, "B": False}, False)])
        assert as_sets(detect_spcs(suite)) == as_sets(brute_force_spcs(suite))

    def test_budget(self, km):
        with pytest.raises(BudgetExceeded, match="--budget"):
            detect_spcs(km.suite, budget=4)

    def test_deterministic_order(self):
        rng = random.Random(3)
        for _ in range(30):
            suite = random_suite(rng, 6, 20)
            spcs = detect_spcs(suite)
            keys = [(len(s.selections), sorted((x.option, x.value) for x in s.selections)) for s in spcs]
            assert keys == sorted(keys)

    @given(seeds)
    @settings(max_examples=200)
    def test_matches_brute_force(self, seed):
        suite = random_suite(random.Random(seed), max_options=5, max_configs=32)
        got = as_sets(detect_spcs(suite))
        assert got == as_sets(brute_force_spcs(suite))
        assert got == definitional_spcs(suite)

    @given(seeds)
    @settings(max_examples=60)
    def test_matches_brute_force_larger(self, seed):
        suite = random_suite(random.Random(seed), max_options=10, max_configs=64)
        assert as_sets(detect_spcs(suite)) == as_sets(brute_force_spcs(suite))

    @given(seeds)
    def test_definitional_audit(self, seed):
        suite = random_suite(random.Random(seed), max_options=6, max_configs=24)
        _, cf = partition_suite(suite)
        for spc in detect_spcs(suite):
            assert audit_spc(spc.selections, suite) == []
            assert is_spc(spc.selections, suite)
            assert spc.witness_failing and set(spc.witness_failing) <= cf

    @given(seeds)
    def test_every_switch_set_hit(self, seed):
        suite = random_suite(random.Random(seed), max_options=6, max_configs=24)
        spcs = detect_spcs(suite)
        _, cf = partition_suite(suite)
        for cid in sorted(cf):
            c = suite[cid]
            fam = switch_sets(c, suite)
            for spc in spcs:
                if c.contains(spc.selections):
                    assert all(spc.selections & S for S in fam.sets)

    @given(seeds)
    def test_adding_a_passing_configuration(self, seed):
        rng = random.Random(seed)
        suite = random_suite(rng, max_options=5, max_configs=16)
        opts = sorted(suite.options)
        taken = {c.selection_set() for c in suite}
        free = [m for m in range(1 << len(opts))
                if frozenset(Configuration("x", {o: bool(m >> j & 1) for j, o in enumerate(opts)}).selection_set()) not in taken]
        if not free:
            return
        m = rng.choice(free)
        extra = Configuration("extra", {o: bool(m >> j & 1) for j, o in enumerate(opts)})
        verdicts = dict(suite.verdicts)
        verdicts[("extra", "t0")] = True
        bigger = ConfigurationSuite(list(suite) + [extra], verdicts)
        before, after = as_sets(detect_spcs(suite)), as_sets(detect_spcs(bigger))
        removed = before - after
        # survivors are exactly the old SPCs the new configuration does not contain
        assert before - removed == {s for s in before if not extra.contains(s)}
        for t in after - before:
            assert any(s < t for s in removed)
            assert not extra.contains(t)


class TestSingleFault:
    def test_one_flip(self):
        base = {"A": True, "B": True, "C": False}
        suite = suite_of([("c1", base, False), ("c2", {**base, "B": False}, True)])
        spc = single_fault_spc(suite)
        assert spc.selections <= suite["c1"].selection_set()
        assert sel("B=T") <= spc.selections

    def test_two_independent_bugs(self):
        suite = suite_of([
            ("c1", {"A": True, "B": False}, False),
            ("c2", {"A": False, "B": True}, False),
            ("c3", {"A": False, "B": False}, True),
            ("c4", {"A": True, "B": True}, True),
        ])
        with pytest.raises(SingleFaultError, match="single-bug assumption violated"):
            single_fault_spc(suite)
