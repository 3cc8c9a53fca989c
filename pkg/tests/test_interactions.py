from __future__ import annotations

import logging
import random

import pytest
from hypothesis import given, strategies as st

from cofl.interactions import (
    DEF_USE,
    PROPAGATED,
    PropagationIndex,
    build_interaction_context,
    detect_interaction,
    feature_def_use,
    implementation_lines,
    propagation,
)
from cofl.model import (
    Configuration,
    ConfigurationSuite,
    DefKind,
    Entity,
    FeatureLiteral,
    ModelError,
    ProgramModel,
    Span,
    Statement,
)
from cofl.spc import SuspiciousPartialConfiguration, detect_spcs

from oracles import naive_rho, random_configuration, random_model, sel

E = Entity.parse
F = FeatureLiteral.parse


def st_(sid, pc=(), defs=(), uses=()):
    return Statement(
        sid, Span("s.cvl", sid, sid),
        frozenset(FeatureLiteral.parse(p) for p in pc),
        frozenset((E(d), DefKind.VALUE) for d in defs),
        frozenset(E(u) for u in uses),
    )


@pytest.fixture(scope="module")
def km_context(km):
    (spc,) = detect_spcs(km.suite)
    return build_interaction_context(km.model, spc, km.suite)


class TestFeatureSets:
    def test_numa_defs(self, km):
        assert {E("cpuup_prepare.node"), E("GLOBAL.cpuup_prepare")} <= feature_def_use(km.model, F("NUMA")).def_set

    def test_lockdep_uses(self, km):
        uses = feature_def_use(km.model, F("LOCKDEP")).use_set
        assert {E("GLOBAL.PAGE_SHIFT"), E("GLOBAL.kmalloc_caches"), E("GLOBAL.slab_set_lock_classes")} <= uses

    def test_feature_without_statements(self):
        m = ProgramModel([st_(1, pc=["A"], defs=["GLOBAL.x"])], features=[F("B")])
        fs = feature_def_use(m, F("B"))
        assert fs.def_set == fs.use_set == frozenset()

    def test_unknown_feature(self, km):
        with pytest.raises(ModelError):
            feature_def_use(km.model, F("NOPE"))


class TestPropagation:
    def test_lock_in_c2(self, km):
        rho = propagation(km.model, E("init_node_lock_keys.lock"), km.suite["c2"])
        assert rho == {E("init_node_lock_keys.node"), E("GLOBAL.slab_set_lock_classes")}

    def test_entity_defined_from_nothing(self, km):
        assert propagation(km.model, E("GLOBAL.MAX_ORDER"), km.suite["c1"]) == frozenset()

    def test_chain(self):
        m = ProgramModel([
            st_(1, defs=["GLOBAL.a"]),
            st_(2, defs=["GLOBAL.b"], uses=["GLOBAL.a"]),
            st_(3, defs=["GLOBAL.c"], uses=["GLOBAL.b"]),
        ])
        c = Configuration("c", {})
        assert propagation(m, E("GLOBAL.c"), c) == {E("GLOBAL.a"), E("GLOBAL.b")} == naive_rho(m, E("GLOBAL.c"), c)

    def test_disabled_statement_breaks_flow(self):
        m = ProgramModel([st_(1, pc=["A"], defs=["GLOBAL.b"], uses=["GLOBAL.a"])])
        assert propagation(m, E("GLOBAL.b"), Configuration("c", {"A": False})) == frozenset()
        assert propagation(m, E("GLOBAL.b"), Configuration("c", {"A": True})) == {E("GLOBAL.a")}

    def test_self_only_on_cycle(self):
        m = ProgramModel([st_(1, defs=["GLOBAL.a"], uses=["GLOBAL.a"]), st_(2, defs=["GLOBAL.b"], uses=["GLOBAL.a"])])
        c = Configuration("c", {})
        assert E("GLOBAL.a") in propagation(m, E("GLOBAL.a"), c)
        assert E("GLOBAL.b") not in propagation(m, E("GLOBAL.b"), c)

    @given(st.integers(0, 2**32 - 1))
    def test_matches_fixpoint(self, seed):
        rng = random.Random(seed)
        m = random_model(rng, 60)
        c = random_configuration(rng, m)
        index = PropagationIndex(m, c)
        for e in sorted(m.entities):
            assert index.rho(e) == naive_rho(m, e, c)


class TestDetectInteraction:
    def test_slob_lockdep_cache_array(self, km, km_lines):
        it = detect_interaction(km.model, F("!SLOB"), F("LOCKDEP"), km.suite["c2"])
        assert E("GLOBAL.kmalloc_caches") in it.entities
        assert DEF_USE in it.kinds
        assert {km_lines[s] for s in it.implementation} == {16, 24}

    def test_use_use_is_not_an_interaction(self):
        m = ProgramModel([st_(1, defs=["GLOBAL.p"]), st_(2, pc=["A"], uses=["GLOBAL.p"]), st_(3, pc=["B"], uses=["GLOBAL.p"])])
        assert detect_interaction(m, F("A"), F("B"), Configuration("c", {"A": True, "B": True})) is None

    def test_propagated_chain_statement(self):
        m = ProgramModel([
            st_(1, pc=["A"], defs=["GLOBAL.x"]),
            st_(2, defs=["GLOBAL.y"], uses=["GLOBAL.x"]),
            st_(3, pc=["B"], uses=["GLOBAL.y"]),
        ])
        c = Configuration("c", {"A": True, "B": True})
        it = detect_interaction(m, F("A"), F("B"), c)
        assert it.kinds == {PROPAGATED}
        assert it.implementation == {1, 2, 3}
        assert detect_interaction(m, F("A"), F("B"), c, propagation=False) is None

    def test_def_def(self):
        m = ProgramModel([st_(1, pc=["A"], defs=["GLOBAL.x"]), st_(2, pc=["B"], defs=["GLOBAL.x"])])
        it = detect_interaction(m, F("A"), F("B"), Configuration("c", {"A": True, "B": True}))
        assert it.kind == "def-def" and it.implementation == {1, 2}

    def test_same_feature_rejected(self, km):
        with pytest.raises(ValueError):
            detect_interaction(km.model, F("SLAB"), F("SLAB"), km.suite["c1"])

    @given(st.integers(0, 2**32 - 1))
    def test_symmetric_and_propagation_only_adds(self, seed):
        rng = random.Random(seed)
        m = random_model(rng, 40, n_options=3)
        c = random_configuration(rng, m)
        feats = sorted(m.features)
        for i, f1 in enumerate(feats):
            for f2 in feats[i + 1:]:
                ab = detect_interaction(m, f1, f2, c)
                assert ab == detect_interaction(m, f2, f1, c)
                off = detect_interaction(m, f1, f2, c, propagation=False)
                if off is not None:
                    assert ab is not None
                    assert off.kinds <= ab.kinds and off.implementation <= ab.implementation
                    assert PROPAGATED not in off.kinds


class TestContext:
    def test_es_lines(self, km, km_context):
        assert implementation_lines(km.model, km_context.es) == [4, 11, 12, 16, 22, 24]

    def test_ds_and_masked(self, km, km_context):
        assert implementation_lines(km.model, km_context.ds) == [7, 11, 12, 22]
        assert km_context.masked == {E("GLOBAL.PAGE_SHIFT")}
        assert [str(f) for f in km_context.disabled] == ["PPC_16K_PAGES"]
        assert sorted(str(f) for f in km_context.enabled) == ["!SLOB", "LOCKDEP", "PPC_256K_PAGES", "SLAB"]

    def test_single_enabled_feature_warns(self, caplog):
        m = ProgramModel([st_(1, pc=["A"], defs=["GLOBAL.x"]), st_(2, uses=["GLOBAL.x"])])
        suite = ConfigurationSuite([Configuration("c1", {"A": True}), Configuration("c2", {"A": False})],
                                   {("c1", "t"): False, ("c2", "t"): True})
        spc = SuspiciousPartialConfiguration(sel("A=T"), ("c1",))
        with caplog.at_level(logging.WARNING, logger="cofl"):
            ctx = build_interaction_context(m, spc, suite)
        assert ctx.es == frozenset()
        assert ctx.warnings and "fewer than two" in caplog.text

    def test_spc_without_witness(self, km):
        with pytest.raises(ValueError):
            build_interaction_context(km.model, SuspiciousPartialConfiguration(sel("SLAB=T")), km.suite)
