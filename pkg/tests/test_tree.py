"""Bounded tree of truth assignments: pools, clauses, closure, path, truth set.

Closure and axiom-set goldens are frozen at proof bound 24**30; one test
documents how the axiom set grows once the bound admits longer refutations.
Exact enumeration stops at EXACT_BOUND, so the tests past it pin down what
the probe passes still detect rather than claiming certification.
"""

import functools

import pytest

from oracles import (
    oracle_derivation_window,
    oracle_k_closure,
    oracle_node,
    oracle_provable_codes,
)
from satclass.coding import BASE, Coder
from satclass.henkin import build_grid, make_grid
from satclass.kernel import is_consistent_bounded
from satclass.models import make_model
from satclass.omega import OmegaContext
from satclass.syntax import All, BOT, Const, Ex, Imp, Not, Pred, Signature, Var
from satclass.theory import Theory
from satclass.tree import (
    EXACT_BOUND,
    AxiomSetAM,
    PathNotFoundError,
    TruthAssignment,
    TruthSetError,
    build_AM,
    coded_derivations_below,
    extract_T,
    find_path,
    is_node,
    k_closure,
    node_violations,
    path_with_trace,
    replay_trace,
)

SIG_PQ = Signature(predicates=(("p", 0), ("q", 0)))
SIG_U = Signature(predicates=(("p", 1),))
P, Q = Pred("p"), Pred("q")

# axiom sets below 4096 at proof bound 24**30, cross-checked by the sweep
# oracle in TestAxiomSet
AM_P_4096 = (2, 11, 73, 170, 179, 1802, 1811, 1897, 2906, 2915, 2929, 2930,
             2939, 3145, 3146, 3155, 3481, 3482, 3491, 3506, 3515, 3722, 3731)
AM_PQ_4096 = tuple(sorted(AM_P_4096 + (278,)))
AM_EMPTY_4096 = (2, 73, 170, 1802, 1897, 2906, 2929, 2930, 2939, 3146, 3481,
                 3482, 3491, 3506, 3722, 3731)
PATH_P_4096 = frozenset({2, 11, 73, 170, 179, 193, 194, 203, 278, 1802, 1811,
                         1897, 2906, 2915, 2929, 2930, 2939, 3145, 3146, 3155,
                         3481, 3482, 3491, 3506, 3515, 3722, 3731})

# the only derivations below EXACT_BOUND with no assumption steps: logical
# axioms wrapped as one-step derivations, each forcing its conclusion in
# every node long enough to contain it
AXL_FOUR = ((158219161, 3481), (158219186, 3506), (158219411, 3731),
            (158224082, 2))


@functools.cache
def p_setup():
    coder = Coder(SIG_PQ)
    theory = Theory(name="just-p", axioms=(P,))
    model = make_model(SIG_PQ, (0,), predicates={"p": {()}})
    ctx = OmegaContext(coder, theory, (), BASE**30, BASE**2, model=model)
    am = build_AM(ctx, make_grid(coder, (), 0), 4096)
    return coder, ctx, am


@functools.cache
def pq_setup():
    coder = Coder(SIG_PQ)
    theory = Theory(name="pq", axioms=(Imp(P, Q), P))
    model = make_model(SIG_PQ, (0,), predicates={"p": {()}, "q": {()}})
    ctx = OmegaContext(coder, theory, (), BASE**30, BASE**2, model=model)
    am = build_AM(ctx, make_grid(coder, (), 0), 4096)
    return coder, ctx, am


@functools.cache
def empty_setup():
    coder = Coder(SIG_PQ)
    theory = Theory(name="empty", axioms=())
    model = make_model(SIG_PQ, (0,), predicates={"p": {()}, "q": {()}})
    ctx = OmegaContext(coder, theory, (), BASE**30, BASE**2, model=model)
    am = build_AM(ctx, make_grid(coder, (), 0), 4096)
    return coder, ctx, am


@functools.cache
def univ_setup():
    coder = Coder(SIG_U)
    axiom = All(0, Pred("p", Var(0)))
    theory = Theory(name="univ", axioms=(axiom,))
    model = make_model(SIG_U, (0, 1), predicates={"p": {(0,), (1,)}})
    ctx = OmegaContext(coder, theory, (0, 1), BASE**30, BASE**3, model=model)
    g = build_grid(make_grid(coder, (0, 1), 2), 1)
    am = build_AM(ctx, g, 8192)
    return coder, ctx, am, g


def no_assumption_codes(pool):
    return tuple((d.code, d.sentence_steps[0]) for d in pool if not d.assumptions)


class TestTruthAssignment:
    def test_validation(self):
        with pytest.raises(ValueError):
            TruthAssignment(-1, frozenset())
        with pytest.raises(ValueError):
            TruthAssignment(10, frozenset({10}))
        with pytest.raises(ValueError):
            TruthAssignment(10, frozenset({-1}))

    def test_bit(self):
        t = TruthAssignment(100, frozenset({2, 11}))
        assert t.bit(2) == 1 and t.bit(3) == 0
        with pytest.raises(IndexError):
            t.bit(100)
        with pytest.raises(IndexError):
            t.bit(-1)

    def test_prefix(self):
        t = TruthAssignment(100, frozenset({2, 11, 73}))
        assert t.prefix(12).ones == frozenset({2, 11})
        assert t.prefix(0).ones == frozenset()
        with pytest.raises(ValueError):
            t.prefix(101)

    def test_runs_roundtrip(self):
        t = TruthAssignment(100, frozenset({11, 12, 13, 83}))
        assert t.runs() == ((11, 14), (83, 84))
        assert TruthAssignment.from_runs(100, t.runs()) == t
        assert TruthAssignment(5, frozenset()).runs() == ()


class TestDerivationPool:
    def test_least_codes(self):
        coder, _, _ = p_setup()
        pool = coded_derivations_below(coder, 274716)
        assert tuple(d.code for d in pool) == (274705, 274706, 274715)
        first = pool[0]
        assert first.assumptions == (1,) and first.sentence_steps == (1,)
        assert coded_derivations_below(coder, 274705) == ()

    def test_parseable_is_not_well_formed(self):
        # 274681 decodes to a one-step derivation citing the identity
        # schema on bare absurdity, which is not an implication; the pool
        # must filter it even though decoding succeeds
        coder, _, _ = p_setup()
        steps = coder.decode_derivation(274681)
        assert steps[0][1] == ("axl", 0)
        assert 274681 not in {d.code for d in coded_derivations_below(coder, 274716)}

    def test_window_oracles(self):
        coder, _, _ = p_setup()
        lo, hi = 274600, 276500
        want = oracle_derivation_window(coder, lo, hi)
        got = [(d.code, d.assumptions, d.sentence_steps)
               for d in coded_derivations_below(coder, hi) if d.code >= lo]
        assert got == want
        lo, hi = 158219000, 158226000
        want = oracle_derivation_window(coder, lo, hi)
        got = [(d.code, d.assumptions, d.sentence_steps)
               for d in coded_derivations_below(coder, hi) if d.code >= lo]
        assert got == want
        assert [(c, s[0]) for c, a, s in want] == list(AXL_FOUR)

    def test_pool_at_exact_bound(self):
        coder, _, _ = p_setup()
        pool = coded_derivations_below(coder, EXACT_BOUND)
        assert len(pool) == 98
        for d in pool:
            assert len(d.sentence_steps) == 1
            assert len(d.assumptions) <= 1
        assert no_assumption_codes(pool) == AXL_FOUR

    def test_exactness_guard(self):
        coder, _, _ = p_setup()
        with pytest.raises(ValueError):
            coded_derivations_below(coder, EXACT_BOUND + 1)


class TestAxiomSet:
    def test_entry_validation(self):
        AxiomSetAM(100, ((2, "provable"), (11, "provable")))
        with pytest.raises(ValueError):
            AxiomSetAM(100, ((11, "provable"), (2, "provable")))
        with pytest.raises(ValueError):
            AxiomSetAM(100, ((2, "provable"), (2, "provable")))
        with pytest.raises(ValueError):
            AxiomSetAM(100, ((100, "provable"),))

    def test_membership(self):
        am = AxiomSetAM(100, ((2, "provable"), (11, "provable")))
        assert 2 in am and 11 in am and 3 not in am
        assert am.codes() == frozenset({2, 11})

    def test_frozen_axiom_sets(self):
        _, _, am_p = p_setup()
        _, _, am_pq = pq_setup()
        _, _, am_e = empty_setup()
        assert tuple(c for c, _ in am_p.entries) == AM_P_4096
        assert tuple(c for c, _ in am_pq.entries) == AM_PQ_4096
        assert tuple(c for c, _ in am_e.entries) == AM_EMPTY_4096
        assert all(prov == "provable" for _, prov in am_p.entries)

    def test_against_sweep_oracle(self):
        # the oracle sweeps every sentence with no model shortcut, so this
        # also confirms the model prefilter never hides a provable sentence
        for setup in (p_setup, pq_setup, empty_setup):
            coder, ctx, am = setup()
            want = oracle_provable_codes(coder, ctx.theory, (), 4096, ctx.proof_bound)
            assert [c for c, _ in am.entries] == want

    def test_non_members(self):
        _, _, am_p = p_setup()
        for code in (1, 83, 278, 2006):
            assert code not in am_p

    def test_grows_with_proof_bound(self):
        # the refutation of "something satisfies absurdity" is a four-step
        # derivation whose code clears 24**30, so only the higher bound
        # admits it
        coder, ctx, am = p_setup()
        hi = OmegaContext(coder, ctx.theory, (), BASE**60, BASE**2, model=ctx.model)
        am_hi = build_AM(hi, make_grid(coder, (), 0), 4096)
        not_exists_bot = coder.encode(Not(Ex(0, BOT)))
        assert not_exists_bot == 1921
        assert 1921 not in am and 1921 in am_hi
        assert am.codes() < am_hi.codes()

    def test_universal_theory(self):
        coder, ctx, am, _ = univ_setup()
        axiom = coder.encode(All(0, Pred("p", Var(0))))
        assert axiom == 4305 and axiom in am
        for c in (0, 1):
            inst = coder.encode(Pred("p", Const(c)))
            assert inst in am

    def test_unbuilt_grid_rejected(self):
        coder, ctx, _, _ = univ_setup()
        with pytest.raises(ValueError):
            build_AM(ctx, make_grid(coder, (0, 1), 2), 8192)

    def test_witness_axioms_above_desk_universes(self):
        # every witness scheme axiom of the built rows codes far beyond the
        # universe, so desk-scale axiom sets carry provable entries only
        _, _, am, g = univ_setup()
        assert g.rows_built == 1
        assert all(prov == "provable" for _, prov in am.entries)


class TestNodeClauses:
    def test_all_zero_below_axiom_codes(self):
        _, ctx, am = empty_setup()
        t = k_closure(2, {}, am, ctx)
        assert t == TruthAssignment(2, frozenset())
        assert is_node(t, am, ctx)

    def test_all_zero_above_axiom_codes(self):
        _, ctx, am = empty_setup()
        v = node_violations(TruthAssignment(74, frozenset()), am, ctx)
        assert [(x.clause, x.code) for x in v] == [
            ("axiom-bit", 2), ("axiom-bit", 73), ("pair", 1)]

    def test_sentence_bit_clause(self):
        _, ctx, am = empty_setup()
        v = node_violations(TruthAssignment(84, frozenset({9})), am, ctx)
        assert v[0].clause == "sentence-bit" and v[0].code == 9

    def test_complementary_pair_clause(self):
        coder, ctx, am = p_setup()
        v = node_violations(TruthAssignment(84, frozenset({11, 83})), am, ctx)
        pairs = [x for x in v if x.clause == "pair"]
        assert ("pair", 11) in [(x.clause, x.code) for x in pairs]
        assert "both carry 1" in [x for x in pairs if x.code == 11][0].detail

    def test_matches_clause_oracle(self):
        coder, ctx, am = p_setup()
        am_codes = [c for c, _ in am.entries]
        base = k_closure(1024, {}, am, ctx).ones
        variants = [
            base,
            base - {11},
            base | {74},
            base - {278},
            base - {193},
            frozenset({9, 11, 83}),
            frozenset(),
        ]
        for ones in variants:
            for length in (279, 1024):
                trimmed = frozenset(c for c in ones if c < length)
                got = node_violations(TruthAssignment(length, trimmed), am, ctx)
                want = oracle_node(coder, (), length, trimmed, am_codes, ())
                assert [(x.clause, x.code) for x in got] == want

    def test_axiom_derivations_force_within_exact_zone(self):
        # a short node stretched to 158224083 bits leaves the one-step
        # schema derivations below that length unanswered except for the
        # one conclusion it already affirms
        _, ctx, am = p_setup()
        short = k_closure(84, {}, am, ctx)
        t = TruthAssignment(158224083, short.ones)
        forced = [x for x in node_violations(t, am, ctx) if x.clause == "derivation"]
        assert [(x.code, x.detail) for x in forced] == [
            (3481, "derivation 158219161 forces 1"),
            (3506, "derivation 158219186 forces 1"),
            (3731, "derivation 158219411 forces 1"),
        ]

    def test_modus_ponens_probe_past_exact_bound(self):
        # the three-step modus ponens derivation for q codes to roughly
        # 1.0e22; the probe pass must still see it force q
        coder, ctx, am = pq_setup()
        imp = coder.encode(Imp(P, Q))
        mp_code = coder.encode_derivation(
            [(P, ("axt",)), (Imp(P, Q), ("axt",)), (Q, ("mp", 0, 1))])
        assert mp_code == 10032719091508494359702
        t = TruthAssignment(mp_code + 1, frozenset({11, imp}))
        forced = {x.code: x.detail for x in node_violations(t, am, ctx)
                  if x.clause == "derivation"}
        assert forced[278] == f"derivation {mp_code} forces 1"
        t_ok = TruthAssignment(mp_code + 1, frozenset({11, imp, 278}))
        forced_ok = {x.code for x in node_violations(t_ok, am, ctx)
                     if x.clause == "derivation"}
        assert 278 not in forced_ok
        # with q affirmed, the generalization probe asks for its closure
        assert coder.encode(All(0, Q)) in forced_ok

    def test_generalization_probe_past_exact_bound(self):
        coder, ctx, am = p_setup()
        gen_code = coder.encode_derivation([(P, ("axt",)), (All(0, P), ("gen", 0))])
        t = TruthAssignment(gen_code + 1, frozenset({11}))
        forced = {x.code: x.detail for x in node_violations(t, am, ctx)
                  if x.clause == "derivation"}
        assert forced[179] == f"derivation {gen_code} forces 1"

    def test_pair_probe_past_exact_bound(self):
        coder, ctx, am = p_setup()
        a = Not(Imp(P, Imp(P, Q)))
        ca, cna = coder.encode(a), coder.encode(Not(a))
        assert ca >= EXACT_BOUND
        t = TruthAssignment(cna + 1, frozenset({ca, cna}))
        high = [x for x in node_violations(t, am, ctx)
                if x.clause == "pair" and x.code >= EXACT_BOUND]
        assert [(x.clause, x.code) for x in high] == [("pair", ca)]


class TestClosure:
    def test_forced_fragment(self):
        _, ctx, am = p_setup()
        t = k_closure(84, {}, am, ctx)
        assert sorted(t.ones) == [2, 11, 73]
        assert t.length == 84

    def test_least_completion_chooses_one(self):
        # with no theory at all, the lowest unresolved pair is still
        # completed with bit 1 on the positive side
        _, ctx, am = empty_setup()
        t = k_closure(84, {}, am, ctx)
        assert sorted(t.ones) == [2, 11, 73]

    def test_unpaired_sentence_stays_zero(self):
        # 278 is a sentence but its negation codes past 279, so no pair
        # exists below that length and the start-from-zeros default stands
        _, ctx, am = pq_setup()
        t = k_closure(279, {}, am, ctx)
        assert t.bit(278) == 1  # forced: it is in the axiom set
        _, ctx_p, am_p = p_setup()
        t = k_closure(279, {}, am_p, ctx_p)
        assert t.bit(278) == 0

    def test_matches_closure_oracle(self):
        for setup in (p_setup, pq_setup, empty_setup):
            coder, ctx, am = setup()
            am_codes = [c for c, _ in am.entries]
            for k in (2, 84, 279, 1024, 4096):
                got = k_closure(k, {}, am, ctx)
                want = oracle_k_closure(coder, (), k, am_codes, {})
                assert got is not None and got.ones == want

    def test_seed_flips_free_choice(self):
        coder, ctx, am = p_setup()
        t = k_closure(4096, {278: 0}, am, ctx)
        assert t.bit(278) == 0 and t.bit(2006) == 1
        want = oracle_k_closure(coder, (), 4096, [c for c, _ in am.entries], {278: 0})
        assert t.ones == want

    def test_redundant_seed_accepted(self):
        _, ctx, am = p_setup()
        assert k_closure(4096, {11: 1, 83: 0}, am, ctx) == k_closure(4096, {}, am, ctx)

    def test_seed_validation(self):
        _, ctx, am = p_setup()
        with pytest.raises(ValueError):
            k_closure(84, {278: 0}, am, ctx)  # outside the universe
        with pytest.raises(ValueError):
            k_closure(84, {11: 2}, am, ctx)
        with pytest.raises(ValueError):
            k_closure(84, {9: 1}, am, ctx)  # 1 on a non-sentence code

    def test_inconsistent_seed_is_precondition_error(self):
        _, ctx, am = p_setup()
        for seed in ({11: 0}, {83: 1}, {74: 1}):
            with pytest.raises(ValueError):
                k_closure(4096, seed, am, ctx)

    def test_contradictory_axioms_give_no_node(self):
        coder, ctx, _ = p_setup()
        am_bad = AxiomSetAM(100, ((11, "hand"), (83, "hand")))
        assert k_closure(512, {}, am_bad, ctx) is None
        # total failure must coincide with bounded inconsistency of the 1-bits
        sentences = [coder.decode_expression(c) for c, _ in am_bad.entries]
        assert not is_consistent_bounded(sentences, coder, ctx.proof_bound)

    def test_derivations_force_at_large_lengths(self):
        coder, ctx, _ = empty_setup()
        am_none = AxiomSetAM(1, ())
        t = k_closure(158224083, {}, am_none, ctx)
        assert all(t.bit(c) == 1 for c in (2, 3481, 3506, 3731))
        trace = replay_trace(t, {}, am_none, ctx)
        assert trace[2] == "derivation:158224082"
        assert trace[3481] == "derivation:158219161"
        assert trace[74] == "complement:2"
        assert trace[11] == "choice:least-completion"

    def test_exactness_guard(self):
        _, ctx, am = p_setup()
        with pytest.raises(ValueError):
            k_closure(EXACT_BOUND + 1, {}, am, ctx)


class TestFindPath:
    def test_deterministic_path(self):
        _, ctx, am = p_setup()
        t = find_path(4096, am, ctx)
        assert t.ones == PATH_P_4096
        assert find_path(4096, am, ctx) == t
        assert k_closure(4096, {}, am, ctx) == t

    def test_deductive_closure_example(self):
        _, ctx, am = pq_setup()
        t = find_path(4096, am, ctx)
        assert t.bit(11) == 1 and t.bit(278) == 1
        assert t.bit(83) == 0 and t.bit(2006) == 0

    def test_empty_theory_tiny_universe(self):
        coder, ctx, _ = empty_setup()
        am = build_AM(ctx, make_grid(coder, (), 0), 2)
        assert am.entries == ()
        t = find_path(2, am, ctx)
        assert t == TruthAssignment(2, frozenset())

    def test_prefixes_are_nodes(self):
        coder, ctx, am = p_setup()
        t = find_path(4096, am, ctx)
        am_codes = [c for c, _ in am.entries]
        for k in (0, 1, 83, 84, 278, 279, 1024, 2047):
            pre = t.prefix(k)
            assert is_node(pre, am, ctx)
            assert oracle_node(coder, (), k, pre.ones, am_codes, ()) == []

    def test_level_non_emptiness(self):
        _, ctx, am = p_setup()
        for k in (*range(90), 170, 279, 600, 1024, 2006, 4096):
            t = k_closure(k, {}, am, ctx)
            assert t is not None and t.length == k

    def test_inconsistent_axioms_rejected(self):
        _, ctx, _ = p_setup()
        am_bad = AxiomSetAM(100, ((11, "hand"), (83, "hand")))
        with pytest.raises(PathNotFoundError, match="inconsistent"):
            find_path(512, am_bad, ctx)

    def test_trace_reasons(self):
        _, ctx, am = p_setup()
        t, trace = path_with_trace(4096, am, ctx)
        assert trace[11] == "axiom:provable"
        assert trace[83].startswith("complement:")
        assert trace[278] == "choice:least-completion"
        assert trace[2006] == "complement:278"
        assert trace[1801] == "complement:73"
        # unpaired and unforced codes are never assigned: absent and zero
        assert 3505 not in trace and t.bit(3505) == 0
        assert 9 not in trace


class TestExtractT:
    def test_truth_set(self):
        _, ctx, am = p_setup()
        t = find_path(4096, am, ctx)
        T = extract_T(t, am, ctx)
        assert T == PATH_P_4096
        assert am.codes() <= T
        assert 11 in T and 83 not in T

    def test_no_complementary_members(self):
        coder, ctx, am = p_setup()
        T = extract_T(find_path(4096, am, ctx), am, ctx)
        for c in T:
            nc = coder.encode(Not(coder.decode_expression(c)))
            assert nc not in T

    def test_postcondition_failure_raises(self):
        _, ctx, am = p_setup()
        bad = TruthAssignment(84, frozenset({11, 83}))
        with pytest.raises(TruthSetError) as info:
            extract_T(bad, am, ctx)
        err = info.value
        assert err.violations
        assert any(v.clause == "pair" and v.code == 11 for v in err.violations)


class TestUniversalPath:
    def test_end_to_end(self):
        coder, ctx, am, _ = univ_setup()
        t = find_path(8192, am, ctx)
        T = extract_T(t, am, ctx)
        assert coder.encode(All(0, Pred("p", Var(0)))) in T
        for c in (0, 1):
            assert coder.encode(Pred("p", Const(c))) in T
            assert coder.encode(Not(Pred("p", Const(c)))) not in T
