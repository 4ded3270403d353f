"""Iterated omega-provability over the bounded proof kernel.

Level 0 of the operator holds for a sentence when the kernel finds a
derivation whose code stays below the proof bound.  Level n+1 holds when
some witness formula with at most one free variable, coded below the
witness bound, has every named instance at level n and the bridging
implication (all x witness) -> sentence derivable at level 0.  Over a
finite carrier whose elements are all named by constants this realizes an
omega-rule: a universally quantified fact becomes available one level
above its instances.

A finite model can be attached as a sound pruning filter.  When the model
satisfies the theory and every carrier element is named, any sentence the
model falsifies is underivable at every level, so queries about it return
False without search.
"""

from dataclasses import dataclass

from .coding import Coder, formulas_below
from .kernel import ProofEnv
from .models import FiniteModel, ModelDomainError, evaluate, satisfies
from .syntax import BOT, All, Const, Expr, Ex, Imp, Not, Or, free_vars, substitute
from .theory import Theory


class OmegaContext:
    """Caching home for omega-provability queries at one bound pair."""

    def __init__(
        self,
        coder: Coder,
        theory: Theory,
        consts: tuple[int, ...],
        proof_bound: int,
        witness_bound: int,
        model: FiniteModel | None = None,
    ):
        if proof_bound < 1 or witness_bound < 1:
            raise ValueError("bounds must be positive")
        self.coder = coder
        self.theory = theory
        self.consts = tuple(sorted(set(consts)))
        self.proof_bound = proof_bound
        self.witness_bound = witness_bound
        self.model = model
        self.env = ProofEnv(coder, theory, consts=self.consts, model=model)
        self._memo: dict[tuple[int, int], bool] = {}
        self._witnesses: list[Expr] | None = None
        decides = False
        if model is not None and set(self.consts) >= set(model.carrier):
            try:
                decides = satisfies(model, theory.axioms)
            except (ModelDomainError, ValueError):
                decides = False
        # sound refuter only when the axioms hold and the carrier is named
        self._model_decides = decides

    def provable(self, alpha: Expr) -> bool:
        """Level 0: the kernel derives alpha below the proof bound."""
        return self.env.prove_bounded(alpha, self.proof_bound) is not None

    def witnesses(self) -> list[Expr]:
        """Witness pool: at most one free variable, code below the bound."""
        if self._witnesses is None:
            self._witnesses = [
                f
                for _, f in formulas_below(self.coder, self.consts, self.witness_bound)
                if len(free_vars(f)) <= 1
            ]
        return self._witnesses

    def instances(self, psi: Expr) -> list[Expr]:
        """The named instances a witness must supply to the next level."""
        fv = sorted(free_vars(psi))
        if len(fv) > 1:
            raise ValueError("a witness carries at most one free variable")
        if not fv:
            return [psi]
        return [substitute(psi, fv[0], Const(c)) for c in self.consts]

    def gamma_holds(self, n: int, alpha: Expr) -> bool:
        if n < 0:
            raise ValueError("level must be a natural")
        if free_vars(alpha):
            raise ValueError("omega-provability is asked of sentences only")
        key = (n, self.coder.encode(alpha))
        got = self._memo.get(key)
        if got is None:
            got = self._decide(n, alpha)
            self._memo[key] = got
        return got

    def _decide(self, n: int, alpha: Expr) -> bool:
        if self._model_decides:
            try:
                if evaluate(self.model, alpha) == 0:
                    return False
            except (ModelDomainError, ValueError):
                pass
        if n == 0:
            return self.provable(alpha)
        scan: list[Expr] = []
        if self.coder.encode(alpha) < self.witness_bound:
            scan.append(alpha)  # the sentence itself realizes a level lift
        scan.extend(w for w in self.witnesses() if w != alpha)
        for psi in scan:
            insts = self.instances(psi)
            if not insts:
                continue
            if self._model_decides and not self._instances_true(insts):
                continue  # some instance is already refuted by the model
            fv = sorted(free_vars(psi))
            x = fv[0] if fv else 0
            if not self.provable(Imp(All(x, psi), alpha)):
                continue
            if all(self.gamma_holds(n - 1, inst) for inst in insts):
                return True
        return False

    def _instances_true(self, insts: list[Expr]) -> bool:
        try:
            return all(evaluate(self.model, inst) == 1 for inst in insts)
        except (ModelDomainError, ValueError):
            return True  # undecided, keep the witness

    def _record_witnessed(self, n: int, alpha: Expr) -> None:
        """Record a fact whose witness route was checked piece by piece.

        The scan is existential over witnesses, so exhibiting one route is a
        proof; recording it saves the scan that would rediscover it."""
        key = (n, self.coder.encode(alpha))
        if self._memo.get(key) is False:
            raise AssertionError("witness route found for a sentence the scan rejected")
        self._memo[key] = True

    def refutation_levels(self, n_max: int) -> list[tuple[int, bool]]:
        """Whether absurdity is reached at each level up to n_max.

        An attached model that satisfies the theory answers these without
        search; build the context without a model when the point of the
        probe is to exercise the prover.
        """
        return [(n, self.gamma_holds(n, BOT)) for n in range(n_max + 1)]

    def escalate(self, proof_bound: int | None = None, witness_bound: int | None = None):
        """Same theory at new bounds, reusing the accumulated search work."""
        other = OmegaContext(
            self.coder,
            self.theory,
            self.consts,
            proof_bound if proof_bound is not None else self.proof_bound,
            witness_bound if witness_bound is not None else self.witness_bound,
            self.model,
        )
        other.env = self.env  # search is bound independent, only the gate moves
        if other.witness_bound == self.witness_bound:
            other._witnesses = self._witnesses
        return other


@dataclass(frozen=True)
class LawReport:
    law: str
    level: int
    subject: str
    premise_holds: bool
    closing_bound: int | None  # least ladder bound where the law closed


def _default_ladder(ctx: OmegaContext) -> tuple[int, ...]:
    b = ctx.proof_bound
    return (b, b * b, b * b * b * b)


def _close(ctx: OmegaContext, ladder: tuple[int, ...], n: int, alpha: Expr) -> int | None:
    for bound in ladder:
        probe = ctx if bound == ctx.proof_bound else ctx.escalate(proof_bound=bound)
        if probe.gamma_holds(n, alpha):
            return bound
    return None


def check_gamma_laws(
    ctx: OmegaContext,
    sentences: tuple[Expr, ...],
    open_witnesses: tuple[Expr, ...] = (),
    n_max: int = 1,
    ladder: tuple[int, ...] | None = None,
) -> list[LawReport]:
    """Exercise the closure laws of the operator on sample formulas.

    Each law is checked at levels 0..n_max.  A law whose premise holds must
    close at some proof bound on the ladder; the report records the least
    bound that worked, or None for an honest failure.

    lift        level n makes level n+1
    combine     level n of an implication and its antecedent reach the
                consequent at level n
    generalize  level n at every named instance makes the universal
                closure at level n+1
    """
    if ladder is None:
        ladder = _default_ladder(ctx)
    reports: list[LawReport] = []
    for n in range(n_max + 1):
        for alpha in sentences:
            if not ctx.gamma_holds(n, alpha):
                reports.append(LawReport("lift", n, str(alpha), False, None))
                continue
            reports.append(
                LawReport("lift", n, str(alpha), True, _close(ctx, ladder, n + 1, alpha))
            )
        for alpha in sentences:
            for beta in sentences:
                imp = Imp(alpha, beta)
                if not (ctx.gamma_holds(n, imp) and ctx.gamma_holds(n, alpha)):
                    continue
                reports.append(
                    LawReport(
                        "combine",
                        n,
                        f"{imp} with {alpha}",
                        True,
                        _close(ctx, ladder, n, beta),
                    )
                )
        for psi in open_witnesses:
            fv = sorted(free_vars(psi))
            if len(fv) != 1:
                raise ValueError("generalization samples carry exactly one free variable")
            insts = ctx.instances(psi)
            closed = All(fv[0], psi)
            if not all(ctx.gamma_holds(n, inst) for inst in insts):
                reports.append(LawReport("generalize", n, str(closed), False, None))
                continue
            reports.append(
                LawReport(
                    "generalize", n, str(closed), True, _close(ctx, ladder, n + 1, closed)
                )
            )
    return reports


@dataclass(frozen=True)
class Elimination:
    """Outcome of pushing an existential out of a guarded disjunction."""

    status: str  # "eliminated" | "countermodel" | "bound-exhausted"
    target: Expr
    witness: Expr
    level: int | None
    per_const: tuple[tuple[int, int], ...]
    confirmed: bool


def eliminate_existential(
    ctx: OmegaContext, keep: Expr, x: int, body: Expr, n_max: int
) -> Elimination:
    """Turn per-constant levels for (keep or not body[c]) into one level for
    (keep or not (exists x body)).

    The witness is (keep or not body); its universal closure implies the
    target through a single axiom of the calculus, so the target lands one
    level above the largest per-constant level.  The route is confirmed
    piece by piece: the bridging implication at level 0 and every guarded
    instance one level below the result.  A constant whose guarded disjunct
    the model falsifies is a genuine counterexample, reported as
    "countermodel"; missing levels without one mean the bounds ran out.
    """
    if free_vars(keep):
        raise ValueError("the kept disjunct must be closed")
    if not free_vars(body) <= {x}:
        raise ValueError("the body may use only the eliminated variable")
    target = Or(keep, Not(Ex(x, body)))
    witness = Or(keep, Not(body))
    guarded = {c: Or(keep, Not(substitute(body, x, Const(c)))) for c in ctx.consts}
    levels: list[tuple[int, int]] = []
    for c in ctx.consts:
        found = None
        for n in range(n_max + 1):
            if ctx.gamma_holds(n, guarded[c]):
                found = n
                break
        if found is None:
            status = "bound-exhausted"
            if ctx._model_decides:
                try:
                    if evaluate(ctx.model, guarded[c]) == 0:
                        status = "countermodel"
                except (ModelDomainError, ValueError):
                    pass
            return Elimination(status, target, witness, None, tuple(levels), False)
        levels.append((c, found))
    level = max((n for _, n in levels), default=0) + 1
    confirmed = (
        ctx.coder.encode(witness) < ctx.witness_bound
        and ctx.provable(Imp(All(x, witness), target))
        and all(ctx.gamma_holds(level - 1, guarded[c]) for c in ctx.consts)
    )
    if confirmed:
        ctx._record_witnessed(level, target)
        return Elimination("eliminated", target, witness, level, tuple(levels), True)
    return Elimination("bound-exhausted", target, witness, None, tuple(levels), False)
