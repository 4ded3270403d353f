"""Iterated omega-provability: engine versus the literal oracle recursion.

The equivalence tests run the unmemoized oracle, so they carry most of the
wall time of this file; the sample sentences are curated to keep the number
of distinct failing proof searches down while still covering both answers
at every level.
"""

import functools

import pytest

from oracles import oracle_gamma
from satclass.coding import BASE, Coder, formulas_below
from satclass.models import make_model
from satclass.omega import OmegaContext, check_gamma_laws, eliminate_existential
from satclass.syntax import (
    BOT,
    TOP,
    All,
    And,
    Const,
    Ex,
    Imp,
    Not,
    Or,
    Pred,
    Signature,
    Var,
    free_vars,
)
from satclass.theory import Theory

SIG_PQ = Signature(predicates=(("p", 0), ("q", 0)))
SIG_U = Signature(predicates=(("p", 1),))

P, Q = Pred("p"), Pred("q")
C0, C1 = Const(0), Const(1)
PV = Pred("p", Var(0))
PC0, PC1 = Pred("p", C0), Pred("p", C1)


@functools.cache
def pq_setup():
    coder = Coder(SIG_PQ)
    theory = Theory(name="pq", axioms=(P, Imp(P, Q)))
    model = make_model(SIG_PQ, (0,), predicates={"p": {()}, "q": {()}})
    return coder, theory, (), model


@functools.cache
def pair_setup():
    coder = Coder(SIG_U)
    theory = Theory(name="pair", axioms=(PC0, PC1))
    model = make_model(SIG_U, (0, 1), predicates={"p": {(0,), (1,)}})
    return coder, theory, (0, 1), model


@functools.cache
def negpair_setup():
    coder = Coder(SIG_U)
    theory = Theory(name="negpair", axioms=(Not(PC0), Not(PC1)))
    model = make_model(SIG_U, (0, 1), predicates={"p": set()})
    return coder, theory, (0, 1), model


def fresh(setup, proof_exp, witness_exp, with_model=False):
    coder, theory, consts, model = setup()
    return OmegaContext(
        coder,
        theory,
        consts,
        proof_bound=BASE**proof_exp,
        witness_bound=BASE**witness_exp,
        model=model if with_model else None,
    )


class TestContextBasics:
    def test_bounds_validated(self):
        coder, theory, consts, _ = pair_setup()
        with pytest.raises(ValueError):
            OmegaContext(coder, theory, consts, proof_bound=0, witness_bound=10)
        with pytest.raises(ValueError):
            OmegaContext(coder, theory, consts, proof_bound=10, witness_bound=0)

    def test_level_and_closedness_validated(self):
        ctx = fresh(pair_setup, 60, 2)
        with pytest.raises(ValueError):
            ctx.gamma_holds(-1, BOT)
        with pytest.raises(ValueError):
            ctx.gamma_holds(0, PV)

    def test_witness_pool_shape(self):
        ctx = fresh(pair_setup, 60, 4)
        pool = ctx.witnesses()
        assert len(pool) == 478
        codes = [ctx.coder.encode(f) for f in pool]
        assert codes == sorted(codes)
        assert all(c < BASE**4 for c in codes)
        assert all(len(free_vars(f)) <= 1 for f in pool)
        assert PV in pool

    def test_instances(self):
        ctx = fresh(pair_setup, 60, 2)
        assert ctx.instances(PV) == [PC0, PC1]
        assert ctx.instances(PC0) == [PC0]
        two_free = Or(Pred("p", Var(0)), Pred("p", Var(1)))
        with pytest.raises(ValueError):
            ctx.instances(two_free)

    def test_model_gate_needs_named_carrier_and_true_axioms(self):
        coder, theory, consts, model = pair_setup()
        full = OmegaContext(coder, theory, consts, BASE**60, BASE**2, model=model)
        assert full._model_decides
        part = OmegaContext(coder, theory, (0,), BASE**60, BASE**2, model=model)
        assert not part._model_decides
        wrong = make_model(SIG_U, (0, 1), predicates={"p": {(0,)}})
        refuted = OmegaContext(coder, theory, consts, BASE**60, BASE**2, model=wrong)
        assert not refuted._model_decides


class TestOracleEquivalence:
    def check(self, setup, proof_exp, witness_exp, alphas, levels):
        coder, theory, consts, model = setup()
        pb, wb = BASE**proof_exp, BASE**witness_exp
        pool = [f for _, f in formulas_below(coder, consts, wb)]
        plain = OmegaContext(coder, theory, consts, pb, wb)
        assisted = OmegaContext(coder, theory, consts, pb, wb, model=model)
        for alpha in alphas:
            for n in levels:
                want = oracle_gamma(coder, theory, consts, n, alpha, pb, wb, pool)
                assert plain.gamma_holds(n, alpha) == want, (n, alpha)
                assert assisted.gamma_holds(n, alpha) == want, (n, alpha)

    def test_propositional_levels_0_to_2(self):
        alphas = (P, Q, BOT, Not(P), Imp(Q, P), Or(P, Not(P)))
        self.check(pq_setup, 30, 2, alphas, (0, 1))
        self.check(pq_setup, 30, 2, (Q, BOT, Or(P, Not(P))), (2,))

    def test_unary_levels_0_to_1(self):
        alphas = (PC0, All(0, PV), Not(All(0, PV)), BOT, Imp(All(0, PV), PC0))
        self.check(pair_setup, 60, 2, alphas, (0, 1))


class TestLevelStructure:
    def test_universal_fact_appears_exactly_at_level_one(self):
        ctx = fresh(pair_setup, 60, 2)
        univ = All(0, PV)
        assert not ctx.gamma_holds(0, univ)
        assert ctx.gamma_holds(1, univ)
        assert ctx.gamma_holds(2, univ)

    def test_level_one_route_is_the_open_witness(self):
        # the pool below 24^2 carries p(v0) at code 273, nothing else closes
        # the universal, so dropping it from a curated oracle pool flips the
        # answer
        coder, theory, consts, _ = pair_setup()
        univ = All(0, PV)
        with_w = [BOT, TOP, PV]
        without = [BOT, TOP]
        assert oracle_gamma(coder, theory, consts, 1, univ, BASE**60, BASE**2, with_w)
        assert not oracle_gamma(coder, theory, consts, 1, univ, BASE**60, BASE**2, without)

    def test_axioms_hold_at_every_level(self):
        ctx = fresh(pair_setup, 60, 2)
        for n in (0, 1, 2):
            assert ctx.gamma_holds(n, PC0)

    def test_refutation_levels_stay_false_for_consistent_theory(self):
        ctx = fresh(pair_setup, 60, 2)
        assert ctx.refutation_levels(2) == [(0, False), (1, False), (2, False)]

    def test_refutation_found_for_inconsistent_theory(self):
        coder, _, consts, _ = pair_setup()
        bad = Theory(name="clash", axioms=(PC0, Not(PC0)))
        ctx = OmegaContext(coder, bad, consts, BASE**60, BASE**2)
        assert ctx.refutation_levels(1) == [(0, True), (1, True)]

    def test_assisted_probe_matches_plain_probe(self):
        plain = fresh(pair_setup, 60, 2)
        assisted = fresh(pair_setup, 60, 2, with_model=True)
        assert plain.refutation_levels(2) == assisted.refutation_levels(2)


class TestEscalation:
    def test_escalate_shares_search_state(self):
        ctx = fresh(pq_setup, 10, 2)
        up = ctx.escalate(proof_bound=BASE**30)
        assert up.env is ctx.env
        assert up._witnesses is ctx._witnesses or up._witnesses is None

    def test_proof_bound_gates_level_zero(self):
        # the least derivation of q runs 16 letters, far above 24^10
        ctx = fresh(pq_setup, 10, 2)
        assert not ctx.gamma_holds(0, Q)
        assert ctx.escalate(proof_bound=BASE**30).gamma_holds(0, Q)

    def test_memo_does_not_leak_across_bounds(self):
        ctx = fresh(pq_setup, 30, 2)
        assert ctx.gamma_holds(0, Q)
        down = ctx.escalate(proof_bound=BASE**10)
        assert not down.gamma_holds(0, Q)


class TestLaws:
    def test_laws_close_on_the_pair_theory(self):
        ctx = fresh(pair_setup, 60, 2)
        reports = check_gamma_laws(
            ctx,
            sentences=(PC0, All(0, PV)),
            open_witnesses=(PV,),
            n_max=1,
        )
        assert reports, "laws produced no reports"
        failed = [r for r in reports if r.premise_holds and r.closing_bound is None]
        assert failed == []
        lifted = [r for r in reports if r.law == "lift" and r.premise_holds]
        assert lifted, "no lift premise held"
        gen = [r for r in reports if r.law == "generalize"]
        assert gen and all(r.premise_holds for r in gen)
        combined = [r for r in reports if r.law == "combine"]
        assert combined, "implication law never fired"

    def test_open_law_samples_validated(self):
        ctx = fresh(pair_setup, 60, 2)
        with pytest.raises(ValueError):
            check_gamma_laws(ctx, sentences=(), open_witnesses=(PC0,), n_max=0)


class TestElimination:
    def test_eliminated_with_certificate(self):
        ctx = fresh(negpair_setup, 60, 5)
        e = eliminate_existential(ctx, BOT, 0, PV, n_max=2)
        assert e.status == "eliminated"
        assert e.confirmed
        assert e.level == 1
        assert e.per_const == ((0, 0), (1, 0))
        assert e.target == Or(BOT, Not(Ex(0, PV)))
        assert e.witness == Or(BOT, Not(PV))
        # the recorded fact answers without a fresh scan
        assert ctx.gamma_holds(1, e.target)

    def test_eliminated_target_confirmed_by_oracle(self):
        coder, theory, consts, _ = negpair_setup()
        target = Or(BOT, Not(Ex(0, PV)))
        curated = [BOT, TOP, PV, PC0, Or(BOT, Not(PV))]
        assert oracle_gamma(coder, theory, consts, 1, target, BASE**60, BASE**5, curated)

    def test_countermodel_detected(self):
        ctx = fresh(pair_setup, 60, 2, with_model=True)
        e = eliminate_existential(ctx, BOT, 0, PV, n_max=2)
        assert e.status == "countermodel"
        assert e.level is None and not e.confirmed

    def test_bounds_run_out_without_model(self):
        ctx = fresh(pair_setup, 60, 2)
        e = eliminate_existential(ctx, BOT, 0, PV, n_max=1)
        assert e.status == "bound-exhausted"
        assert e.level is None and not e.confirmed

    def test_arguments_validated(self):
        ctx = fresh(negpair_setup, 60, 2)
        with pytest.raises(ValueError):
            eliminate_existential(ctx, PV, 0, PV, n_max=1)
        with pytest.raises(ValueError):
            eliminate_existential(ctx, BOT, 1, PV, n_max=1)
