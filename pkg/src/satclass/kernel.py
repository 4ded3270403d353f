"""Hilbert-style predicate calculus: schemas, derivations, bounded search.

A derivation is a list of (formula, justification) steps; justifications are
logical-axiom instances by schema id, theory axioms, modus ponens citing an
antecedent step and an implication step, and generalization.  Generalization
is unrestricted, which is sound here because theory axioms are closed.

prove_bounded combines two bound-independent searches and gates the winner by
code at the very end, so success is monotone in the bound and the returned
derivation never varies with the bound:

  - an exhaustive least-code table over every valid derivation of at most
    TABLE_CAP letters, exact within its range;
  - a memoized goal-directed backward search with fixed horizons for longer
    proofs, minimal only over the orderings of the derivation it found.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .coding import (
    BASE,
    Coder,
    expressions_by_tokens,
    index_length,
    index_letters,
    string_value,
    var_index_groups,
)
from .models import FiniteModel, ModelDomainError, evaluate, satisfies
from .syntax import (
    BOT,
    TOP,
    All,
    And,
    Const,
    Eq,
    Ex,
    Expr,
    Imp,
    Not,
    Or,
    Signature,
    Var,
    free_vars,
    is_closed_term,
    is_formula,
    is_term,
    subexpressions,
    substitute,
    validate,
)
from .theory import Theory

Step = tuple  # (Expr, justification tuple)


@dataclass(frozen=True)
class Derivation:
    steps: tuple[Step, ...]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("empty derivation")

    @property
    def conclusion(self) -> Expr:
        return self.steps[-1][0]


def derivation_code(coder: Coder, d: Derivation) -> int:
    return coder.encode_derivation(list(d.steps))


# -- schema patterns ---------------------------------------------------------
#
# Patterns are nested tuples over formula metavariables ("F", name) and
# variable metavariables (plain strings in binder position).  The four
# substitution-flavored schemas (16, 17, 26, 27) get hand matchers instead.


def _IMP(a, b):
    return ("imp", a, b)


def _NOT(a):
    return ("not", a)


def _AND(a, b):
    return ("and", a, b)


def _OR(a, b):
    return ("or", a, b)


def _ALL(x, a):
    return ("all", x, a)


def _EX(x, a):
    return ("ex", x, a)


_A, _B, _C = ("F", "A"), ("F", "B"), ("F", "C")
_BOTP, _TOPP = ("bot",), ("top",)


@dataclass(frozen=True)
class Schema:
    sid: int
    name: str
    pattern: tuple | None  # None for hand-matched schemas
    absent: tuple = ()  # (var-meta, formula-meta): the variable not free in F


SCHEMAS: tuple[Schema, ...] = (
    Schema(0, "identity", _IMP(_A, _A)),
    Schema(1, "weaken", _IMP(_A, _IMP(_B, _A))),
    Schema(2, "distribute", _IMP(_IMP(_A, _IMP(_B, _C)), _IMP(_IMP(_A, _B), _IMP(_A, _C)))),
    Schema(3, "contrapose", _IMP(_IMP(_NOT(_A), _NOT(_B)), _IMP(_B, _A))),
    Schema(4, "explosion", _IMP(_BOTP, _A)),
    Schema(5, "truth", _TOPP),
    Schema(6, "neg-out", _IMP(_NOT(_A), _IMP(_A, _BOTP))),
    Schema(7, "neg-in", _IMP(_IMP(_A, _BOTP), _NOT(_A))),
    Schema(8, "and-left", _IMP(_AND(_A, _B), _A)),
    Schema(9, "and-right", _IMP(_AND(_A, _B), _B)),
    Schema(10, "and-pair", _IMP(_A, _IMP(_B, _AND(_A, _B)))),
    Schema(11, "or-left", _IMP(_A, _OR(_A, _B))),
    Schema(12, "or-right", _IMP(_A, _OR(_B, _A))),
    Schema(13, "or-cases", _IMP(_IMP(_A, _C), _IMP(_IMP(_B, _C), _IMP(_OR(_A, _B), _C)))),
    Schema(14, "or-frame", _IMP(_IMP(_A, _B), _IMP(_OR(_C, _A), _OR(_C, _B)))),
    Schema(15, "chain", _IMP(_IMP(_A, _B), _IMP(_IMP(_B, _C), _IMP(_A, _C)))),
    Schema(16, "instantiate-universal", None),  # (all x phi) -> phi[x/t], t closed
    Schema(17, "witness-existential", None),  # phi[x/t] -> (ex x phi), t closed
    Schema(18, "all-distribute", _IMP(_ALL("x", _IMP(_A, _B)), _IMP(_ALL("x", _A), _ALL("x", _B)))),
    Schema(19, "all-vacuous", _IMP(_A, _ALL("x", _A)), absent=(("x", "A"),)),
    Schema(20, "exists-def-fwd", _IMP(_EX("x", _A), _NOT(_ALL("x", _NOT(_A))))),
    Schema(21, "exists-def-bwd", _IMP(_NOT(_ALL("x", _NOT(_A))), _EX("x", _A))),
    Schema(22, "all-or-split", _IMP(_ALL("x", _OR(_A, _B)), _OR(_A, _ALL("x", _B))), absent=(("x", "A"),)),
    Schema(23, "all-neg-exists", _IMP(_ALL("x", _NOT(_A)), _NOT(_EX("x", _A)))),
    Schema(24, "neg-exists-all", _IMP(_NOT(_EX("x", _A)), _ALL("x", _NOT(_A)))),
    Schema(25, "all-or-neg-exists", _IMP(_ALL("x", _OR(_A, _NOT(_B))), _OR(_A, _NOT(_EX("x", _B)))), absent=(("x", "A"),)),
    Schema(26, "eq-reflexive", None),  # t = t
    Schema(27, "eq-replace", None),  # t=s -> (phi[x/t] -> phi[x/s])
    Schema(28, "dneg-out", _IMP(_NOT(_NOT(_A)), _A)),
    Schema(29, "dneg-in", _IMP(_A, _NOT(_NOT(_A)))),
)


def match_pattern(pat: tuple, e: Expr, b: dict) -> dict | None:
    tag = pat[0]
    if tag == "F":
        key = ("F", pat[1])
        seen = b.get(key)
        if seen is not None:
            return b if seen == e else None
        if not is_formula(e):
            return None
        b2 = dict(b)
        b2[key] = e
        return b2
    if tag in ("bot", "top"):
        return b if e.kind == tag else None
    if e.kind != tag:
        return None
    if tag in ("all", "ex"):
        key = ("V", pat[1])
        seen = b.get(key)
        if seen is None:
            b = dict(b)
            b[key] = e.index
        elif seen != e.index:
            return None
        return match_pattern(pat[2], e.parts[0], b)
    if tag == "not":
        return match_pattern(pat[1], e.parts[0], b)
    b2 = match_pattern(pat[1], e.parts[0], b)
    if b2 is None:
        return None
    return match_pattern(pat[2], e.parts[1], b2)


def instantiate(pat: tuple, b: dict) -> Expr:
    tag = pat[0]
    if tag == "F":
        return b[("F", pat[1])]
    if tag == "bot":
        return BOT
    if tag == "top":
        return TOP
    if tag == "not":
        return Not(instantiate(pat[1], b))
    if tag in ("and", "or", "imp"):
        ctor = {"and": And, "or": Or, "imp": Imp}[tag]
        return ctor(instantiate(pat[1], b), instantiate(pat[2], b))
    if tag in ("all", "ex"):
        ctor = All if tag == "all" else Ex
        return ctor(b[("V", pat[1])], instantiate(pat[2], b))
    raise ValueError(f"bad pattern {pat!r}")


def pattern_metas(pat: tuple) -> dict:
    """Metavariable -> occurrence count; keys ("F", n) and ("V", n)."""
    out: dict = {}

    def walk(p):
        tag = p[0]
        if tag == "F":
            out[("F", p[1])] = out.get(("F", p[1]), 0) + 1
        elif tag in ("all", "ex"):
            out[("V", p[1])] = out.get(("V", p[1]), 0) + 1
            walk(p[2])
        elif tag == "not":
            walk(p[1])
        elif tag in ("and", "or", "imp"):
            walk(p[1])
            walk(p[2])

    walk(pat)
    return out


def pattern_frame_tokens(pat: tuple) -> int:
    """Letters the pattern emits besides metavariable content and digits."""
    tag = pat[0]
    if tag == "F":
        return 0
    if tag in ("bot", "top"):
        return 1
    if tag == "not":
        return 1 + pattern_frame_tokens(pat[1])
    if tag in ("and", "or", "imp"):
        return 1 + pattern_frame_tokens(pat[1]) + pattern_frame_tokens(pat[2])
    if tag in ("all", "ex"):
        return 1 + pattern_frame_tokens(pat[2])
    raise ValueError(f"bad pattern {pat!r}")


def _absent_ok(schema: Schema, b: dict) -> bool:
    for vn, fn in schema.absent:
        if b[("V", vn)] in free_vars(b[("F", fn)]):
            return False
    return True


# -- hand matchers for the substitution schemas ------------------------------


def solve_substitution(phi: Expr, x: int, inst: Expr):
    """Find t with phi[x/t] == inst.  Returns ("any",) when inst == phi with
    no free x to fill, ("term", t) for a unique closed t, or None."""
    spots: list[Expr] = []

    def walk(p: Expr, i: Expr) -> bool:
        if p.kind == "var" and p.index == x:
            if not is_term(i):
                return False
            spots.append(i)
            return True
        if p.kind in ("all", "ex") and p.index == x:
            return p == i  # substitution stops under a binder of x
        if (p.kind, p.index, p.name, len(p.parts)) != (i.kind, i.index, i.name, len(i.parts)):
            return False
        return all(walk(a, c) for a, c in zip(p.parts, i.parts))

    if not walk(phi, inst):
        return None
    if not spots:
        return ("any",)
    t = spots[0]
    if any(s != t for s in spots[1:]) or not is_closed_term(t):
        return None
    return ("term", t)


def _match_instantiate_universal(e: Expr) -> bool:
    if e.kind != "imp" or e.parts[0].kind != "all":
        return False
    q = e.parts[0]
    return solve_substitution(q.parts[0], q.index, e.parts[1]) is not None


def _match_witness_existential(e: Expr) -> bool:
    if e.kind != "imp" or e.parts[1].kind != "ex":
        return False
    q = e.parts[1]
    return solve_substitution(q.parts[0], q.index, e.parts[0]) is not None


def _match_eq_reflexive(e: Expr) -> bool:
    return e.kind == "eq" and e.parts[0] == e.parts[1]


def _replace_diffs(a: Expr, b: Expr, t: Expr, s: Expr) -> bool:
    """True iff b is a with some occurrences of t replaced by s."""
    if a == b:
        return True
    if a == t and b == s:
        return True
    if (a.kind, a.index, a.name, len(a.parts)) != (b.kind, b.index, b.name, len(b.parts)):
        return False
    if not a.parts:
        return False
    return all(_replace_diffs(pa, pb, t, s) for pa, pb in zip(a.parts, b.parts))


def _match_eq_replace(e: Expr) -> bool:
    if e.kind != "imp" or e.parts[0].kind != "eq" or e.parts[1].kind != "imp":
        return False
    t, s = e.parts[0].parts
    # open replacement terms can be captured under binders, which is unsound
    if not (is_closed_term(t) and is_closed_term(s)):
        return False
    a, b = e.parts[1].parts
    return _replace_diffs(a, b, t, s)


_HAND_MATCHERS = {
    16: _match_instantiate_universal,
    17: _match_witness_existential,
    26: _match_eq_reflexive,
    27: _match_eq_replace,
}


def schema_matches(sid: int, e: Expr) -> bool:
    if not 0 <= sid < len(SCHEMAS):
        return False
    sc = SCHEMAS[sid]
    if sc.pattern is None:
        return _HAND_MATCHERS[sid](e)
    b = match_pattern(sc.pattern, e, {})
    return b is not None and _absent_ok(sc, b)


def matching_schema(e: Expr) -> int | None:
    """Least schema id that e instantiates, if any."""
    for sc in SCHEMAS:
        if schema_matches(sc.sid, e):
            return sc.sid
    return None


# -- derivation checking -----------------------------------------------------


def validate_derivation(coder: Coder, theory: Theory, steps, consts: tuple[int, ...] = ()):
    """(ok, bad_index, reason); bad_index is -1 when ok."""
    steps = list(steps)
    if not steps:
        return False, -1, "empty derivation"
    for k, (f, just) in enumerate(steps):
        try:
            validate(coder.sig, f)
        except ValueError as exc:
            return False, k, f"ill-formed formula: {exc}"
        if not is_formula(f):
            return False, k, "step is not a formula"
        tag = just[0]
        if tag == "axl":
            if not schema_matches(just[1], f):
                return False, k, f"not an instance of schema {just[1]}"
        elif tag == "axt":
            if not theory.is_axiom(coder, consts, f):
                return False, k, "not a theory axiom"
        elif tag == "mp":
            i, j = just[1], just[2]
            if not (0 <= i < k and 0 <= j < k):
                return False, k, "modus ponens cites a non-earlier step"
            if steps[j][0] != Imp(steps[i][0], f):
                return False, k, "implication step does not match antecedent and conclusion"
        elif tag == "gen":
            i = just[1]
            if not 0 <= i < k:
                return False, k, "generalization cites a non-earlier step"
            if f.kind != "all" or f.parts[0] != steps[i][0]:
                return False, k, "not a generalization of the cited step"
        else:
            return False, k, f"unknown justification {tag!r}"
    return True, -1, "ok"


def check_derivation(coder: Coder, theory: Theory, d, consts: tuple[int, ...] = ()) -> bool:
    steps = d.steps if isinstance(d, Derivation) else d
    ok, _, _ = validate_derivation(coder, theory, steps, consts)
    return ok


# -- backward proof search ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Node:
    # eq=False: nodes are identified by object, two equal formulas proved the
    # same way are the same node via the memo, never duplicates
    formula: Expr
    rule: str  # axt | axl | mp | gen
    sid: int = -1
    children: tuple = ()


DEPTH_MAX = 8
TABLE_CAP = 9
SEARCH_BUDGET = 6_000
SIZE_SLACK = 4  # premises may exceed the goal by this many letters


def _collect_nodes(root: _Node) -> list[_Node]:
    seen: set[int] = set()
    order: list[_Node] = []

    def walk(n: _Node):
        if id(n) in seen:
            return
        seen.add(id(n))
        for c in n.children:
            walk(c)
        order.append(n)

    walk(root)
    return order




class ProofEnv:
    """Caches for one (signature, theory, constant pool, optional model).

    The optional model is a soundness filter: when it satisfies the theory
    axioms, any sentence it falsifies has no derivation, so the search is
    skipped.  The registered axiom schemes only generate tautologies, so the
    filter stays sound for scheme-bearing theories."""

    def __init__(
        self,
        coder: Coder,
        theory: Theory,
        consts: tuple[int, ...] = (),
        model: FiniteModel | None = None,
    ):
        self.coder = coder
        self.theory = theory
        self.consts = tuple(sorted(set(consts)))
        self.model = model
        self._model_fits = model is not None and _model_satisfies(model, theory)
        self._proved: dict[Expr, _Node] = {}
        self._failed: dict[Expr, int] = {}
        self._cands: dict[Expr, list] = {}
        self._rel: dict[Expr, tuple[list, frozenset]] = {}
        self._table: dict[Expr, tuple[int, tuple]] | None = None
        self._pool_cache: list[Expr] | None = None
        self._budget = 0
        axw = [coder.token_length(ax) for ax in theory.axioms]
        self._cap_base = max(axw, default=2) + SIZE_SLACK
        self._top_cap = self._cap_base

    # pools --------------------------------------------------------------

    def _axiom_relevant(self) -> list[Expr]:
        if self._pool_cache is None:
            seen: list[Expr] = []
            for ax in self.theory.axioms:
                for sub in subexpressions(ax):
                    if is_formula(sub) and sub not in seen:
                        seen.append(sub)
            seen.sort(key=self.coder.encode)
            self._pool_cache = seen[:32]
        return self._pool_cache

    def _relevant(self, goal: Expr) -> list[Expr]:
        """Small pool of formulas worth trying as unknown premises: the
        subformulas of the goal and of the theory axioms."""
        got = self._rel.get(goal)
        if got is None:
            out = [BOT, TOP]
            for sub in subexpressions(goal):
                if is_formula(sub) and sub not in out:
                    out.append(sub)
            for f in self._axiom_relevant():
                if f not in out:
                    out.append(f)
            out.sort(key=self.coder.encode)
            out = out[:48]
            got = (out, frozenset(out))
            self._rel[goal] = got
        return got[0]

    def _relevant_set(self, goal: Expr) -> frozenset:
        self._relevant(goal)
        return self._rel[goal][1]

    def _pool_terms(self, goal: Expr) -> list[Expr]:
        seen = []
        for sub in subexpressions(goal):
            if is_term(sub) and is_closed_term(sub) and sub not in seen:
                seen.append(sub)
        for c in self.consts:
            t = Const(c)
            if t not in seen:
                seen.append(t)
        seen.sort(key=self.coder.encode)
        return seen

    # search -------------------------------------------------------------

    def prove(self, goal: Expr) -> _Node | None:
        got = self._proved.get(goal)
        if got is not None:
            return got
        self._budget = SEARCH_BUDGET
        cap = max(self._cap_base, self.coder.token_length(goal) + SIZE_SLACK)
        if cap > self._top_cap:
            self._failed.clear()  # a larger premise allowance voids old failures
            self._top_cap = cap
        return self._search(goal, DEPTH_MAX, frozenset())

    def _search(self, goal: Expr, depth: int, stack: frozenset) -> _Node | None:
        got = self._proved.get(goal)
        if got is not None:
            return got
        if self._failed.get(goal, -1) >= depth:
            return None
        if depth <= 0 or goal in stack or self._budget <= 0:
            return None
        self._budget -= 1
        if self._model_fits:
            try:
                if evaluate(self.model, goal) == 0:
                    return None  # sound theory, false sentence: no derivation
            except (ModelDomainError, ValueError):
                pass

        if self.theory.is_axiom(self.coder, self.consts, goal):
            return self._won(goal, _Node(goal, "axt"))
        sid = matching_schema(goal)
        if sid is not None:
            return self._won(goal, _Node(goal, "axl", sid=sid))

        stack2 = stack | {goal}
        if goal.kind == "all":
            child = self._search(goal.parts[0], depth - 1, stack2)
            if child is not None:
                return self._won(goal, _Node(goal, "gen", children=(child,)))
        for chi, how in self._mp_candidates(goal):
            # oversized premises are junk unless shaped like known material
            if self.coder.token_length(chi) > self._top_cap and chi not in self._relevant_set(goal):
                continue
            ante = self._search(chi, depth - 1, stack2)
            if ante is None:
                continue
            if how[0] == "leaf":
                imp_node = _Node(Imp(chi, goal), "axl", sid=how[1])
            elif how[0] == "axiom":
                imp_node = _Node(Imp(chi, goal), "axt")
            else:
                imp_node = self._search(Imp(chi, goal), depth - 1, stack2)
                if imp_node is None:
                    continue
            return self._won(goal, _Node(goal, "mp", children=(ante, imp_node)))
        if goal == BOT:
            # refutation scan: a sentence provable alongside its negation,
            # trying theory axioms before derived material
            scan = list(self.theory.axioms)
            scan += [f for f in self._relevant(goal) if f not in scan]
            for chi in scan:
                if chi == BOT or free_vars(chi):
                    continue
                pos = chi.parts[0] if chi.kind == "not" else chi
                neg = chi if chi.kind == "not" else Not(chi)
                ante = self._search(pos, depth - 1, stack2)
                if ante is None:
                    continue
                negated = self._search(neg, depth - 1, stack2)
                if negated is None:
                    continue
                frame = _Node(Imp(neg, Imp(pos, BOT)), "axl", sid=6)
                imp_node = _Node(Imp(pos, BOT), "mp", children=(negated, frame))
                return self._won(goal, _Node(goal, "mp", children=(ante, imp_node)))
        if self._budget > 0:
            self._failed[goal] = depth
        return None

    def _won(self, goal: Expr, node: _Node) -> _Node:
        self._proved[goal] = node
        self._failed.pop(goal, None)
        return node

    def _mp_candidates(self, goal: Expr):
        cached = self._cands.get(goal)
        if cached is not None:
            return cached
        out: list[tuple[Expr, tuple]] = []
        seen: set = set()

        def add(chi: Expr, how: tuple):
            # an antecedent of bottom only helps in inconsistent theories,
            # where the dedicated refutation scan already applies
            key = (chi,) + how
            if chi != goal and chi != BOT and key not in seen:
                seen.add(key)
                out.append((chi, how))

        for ax in self.theory.axioms:
            if ax.kind == "imp" and ax.parts[1] == goal:
                add(ax.parts[0], ("axiom",))
        for sc in SCHEMAS:
            if sc.pattern is None or sc.pattern[0] != "imp":
                continue
            hyp, con = sc.pattern[1], sc.pattern[2]
            b = match_pattern(con, goal, {})
            if b is None:
                continue
            for b2 in self._fill(hyp, b, goal):
                if not _absent_ok(sc, b2):
                    continue
                add(instantiate(hyp, b2), ("leaf", sc.sid))
        if goal.kind == "ex":
            for t in self._pool_terms(goal):
                add(substitute(goal.parts[0], goal.index, t), ("leaf", 17))
        for chi in self._universal_sources(goal):
            add(chi, ("leaf", 16))
        if goal.kind == "and":
            add(goal.parts[1], ("search",))
            add(goal.parts[0], ("search",))
        if goal.kind == "all":
            # a universal axiom may imply the goal pointwise (distribute)
            for ax in self.theory.axioms:
                if ax.kind == "all" and ax != goal:
                    add(ax, ("search",))
        if goal.kind == "imp" and self.coder.sig.has_equality:
            a, b_ = goal.parts
            for ax in self.theory.axioms:
                if ax.kind == "eq" and _replace_diffs(a, b_, ax.parts[0], ax.parts[1]):
                    add(ax, ("leaf", 27))
        prio = {"axiom": 0, "leaf": 1, "search": 2}
        out.sort(key=lambda p: (prio[p[1][0]], self.coder.token_length(p[0]), self.coder.encode(p[0])))
        out = out[:48]
        self._cands[goal] = out
        return out

    def _fill(self, hyp: tuple, b: dict, goal: Expr) -> list[dict]:
        """Bindings extending b over the metavariables of hyp.  Open metas are
        bound by matching the hypothesis against the relevant pool, so only
        premises already shaped like goal or axiom material are proposed."""
        missing = sorted(m for m in pattern_metas(hyp) if m not in b)
        if not missing:
            return [b]
        outs = []
        for s in self._relevant(goal):
            b2 = match_pattern(hyp, s, dict(b))
            if b2 is not None and all(m in b2 for m in missing):
                outs.append(b2)
        return outs

    def _universal_sources(self, goal: Expr):
        """Candidate premises (all x phi) with phi[x/t] == goal."""
        used = free_vars(goal) | {e.index for e in subexpressions(goal) if e.kind in ("all", "ex")}
        fresh = 0
        while fresh in used:
            fresh += 1
        cands = []
        for v in (0, 1, fresh):
            if v not in free_vars(goal):
                cands.append(All(v, goal))  # vacuous instantiation
        for t in self._pool_terms(goal):
            abstracted = _abstract(goal, t, fresh)
            if abstracted != goal:
                cands.append(All(fresh, abstracted))
        uniq = []
        for c in cands:
            if c not in uniq:
                uniq.append(c)
        return uniq

    # assembly -------------------------------------------------------------

    def _assemble(self, root: _Node) -> tuple[tuple, int]:
        nodes = _collect_nodes(root)
        if len(nodes) <= 7:
            orders = []
            for p in permutations(nodes):
                if p[-1] is not root:
                    continue
                pos = {id(n): k for k, n in enumerate(p)}
                if all(pos[id(c)] < pos[id(n)] for n in p for c in n.children):
                    orders.append(p)
        else:
            orders = [tuple(nodes)]
        best_steps, best_code = None, None
        for order in orders:
            pos = {id(n): k for k, n in enumerate(order)}
            steps = []
            for n in order:
                if n.rule == "axt":
                    just: tuple = ("axt",)
                elif n.rule == "axl":
                    just = ("axl", n.sid)
                elif n.rule == "gen":
                    just = ("gen", pos[id(n.children[0])])
                else:
                    just = ("mp", pos[id(n.children[0])], pos[id(n.children[1])])
                steps.append((n.formula, just))
            code = self.coder.encode_derivation(steps)
            if best_code is None or code < best_code:
                best_steps, best_code = tuple(steps), code
        return best_steps, best_code

    # exhaustive short-derivation table --------------------------------------

    def least_table(self) -> dict[Expr, tuple[int, tuple]]:
        if self._table is None:
            self._table = _build_least_table(self)
        return self._table

    # public entry points ----------------------------------------------------

    def least_derivation(self, goal: Expr):
        """(steps, code) of the best known derivation, independent of bounds."""
        if self._model_fits:
            try:
                if evaluate(self.model, goal) == 0:
                    return None  # sound theory, false sentence: no derivation
            except (ModelDomainError, ValueError):
                pass
        best: tuple[tuple, int] | None = None
        node = self.prove(goal)
        if node is not None:
            best = self._assemble(node)
        hit = self.least_table().get(goal)
        if hit is not None and (best is None or hit[0] < best[1]):
            best = (hit[1], hit[0])
        return best

    def prove_bounded(self, goal: Expr, code_bound: int) -> Derivation | None:
        if free_vars(goal):
            raise ValueError("prove_bounded needs a closed goal")
        best = self.least_derivation(goal)
        if best is not None and best[1] < code_bound:
            return Derivation(steps=best[0])
        return None


def _abstract(e: Expr, t: Expr, v: int) -> Expr:
    if e == t:
        return Var(v)
    if not e.parts:
        return e
    return Expr(kind=e.kind, parts=tuple(_abstract(p, t, v) for p in e.parts), index=e.index, name=e.name)


def _model_satisfies(model: FiniteModel, theory: Theory) -> bool:
    try:
        return satisfies(model, theory.axioms)
    except (ModelDomainError, ValueError):
        return False


# -- exhaustive enumeration of short derivations -------------------------------


def _free_occurrences(e: Expr, x: int) -> int:
    if e.kind == "var":
        return 1 if e.index == x else 0
    if e.kind in ("all", "ex") and e.index == x:
        return 0
    return sum(_free_occurrences(p, x) for p in e.parts)


def schema_instances_upto(sig: Signature, consts: tuple[int, ...], sid: int, budget: int):
    """All instances of one schema with at most `budget` tokens."""
    sc = SCHEMAS[sid]
    if budget < 1 or (sid in (26, 27) and not sig.has_equality):
        return []
    terms, forms = expressions_by_tokens(sig, tuple(sorted(consts)), budget)
    coder = Coder(sig)
    tl = coder.token_length
    out: list[Expr] = []

    if sc.pattern is not None:
        frame = pattern_frame_tokens(sc.pattern)
        metas = sorted(pattern_metas(sc.pattern).items())
        vgroups = var_index_groups(budget)

        def assign(i: int, left: int, b: dict):
            if i == len(metas):
                if _absent_ok(sc, b):
                    out.append(instantiate(sc.pattern, b))
                return
            meta, occ = metas[i]
            if meta[0] == "V":
                for d, idxs in vgroups:
                    if occ * d > left:
                        break
                    for v in idxs:
                        assign(i + 1, left - occ * d, {**b, meta: v})
            else:
                for ln in sorted(forms):
                    if occ * ln > left:
                        break
                    for f in forms[ln]:
                        assign(i + 1, left - occ * ln, {**b, meta: f})

        assign(0, budget - frame, {})
        return out

    flat_terms = [t for ln in sorted(terms) for t in terms[ln]]
    closed = [t for t in flat_terms if is_closed_term(t)]
    flat_forms = [f for ln in sorted(forms) for f in forms[ln]]
    if sid == 26:
        for t in flat_terms:
            if 1 + 2 * tl(t) <= budget:
                out.append(Eq(t, t))
        return out
    if sid in (16, 17):
        vgroups = var_index_groups(budget)
        by_tl = sorted(closed, key=tl)
        for phi in flat_forms:
            base = tl(phi)
            for d, idxs in vgroups:
                head = 2 + d + base
                if head + 1 > budget:
                    break
                for x in idxs:
                    occ = _free_occurrences(phi, x)
                    if occ == 0:
                        # only the vacuous case: an open instance term never matches
                        if head + base <= budget:
                            out.append(Imp(All(x, phi), phi) if sid == 16 else Imp(phi, Ex(x, phi)))
                        continue
                    for t in by_tl:
                        ln = base + occ * (tl(t) - 1 - d)
                        if head + ln > budget:
                            break  # ln grows with tl(t)
                        inst_body = substitute(phi, x, t)
                        if sid == 16:
                            out.append(Imp(All(x, phi), inst_body))
                        else:
                            out.append(Imp(inst_body, Ex(x, phi)))
        return out
    if sid == 27:
        seen: set[Expr] = set()
        by_tl = sorted(closed, key=tl)
        occs = {(phi, x): _free_occurrences(phi, x) for ln in forms for phi in forms[ln] for x in (0, 1, 2)}
        for t in by_tl:
            lt = tl(t)
            if 3 + lt + 1 + 2 > budget:
                break
            for s in by_tl:
                ls = tl(s)
                room = budget - 3 - lt - ls
                if room < 2:
                    break
                for ln in sorted(forms):
                    if ln > room:  # branch lengths sum to at least tl(phi)
                        break
                    for phi in forms[ln]:
                        for x in (0, 1, 2):
                            occ = occs[phi, x]
                            d = index_length(x)
                            la = ln + occ * (lt - 1 - d)
                            lb = ln + occ * (ls - 1 - d)
                            if la + lb > room:
                                continue
                            inst = Imp(Eq(t, s), Imp(substitute(phi, x, t), substitute(phi, x, s)))
                            if inst not in seen:
                                seen.add(inst)
                                out.append(inst)
        return out
    raise ValueError(f"no instance enumerator for schema {sid}")


def _build_least_table(env: ProofEnv) -> dict[Expr, tuple[int, tuple]]:
    """Least derivation code per conclusion over every valid derivation of at
    most TABLE_CAP letters.  Exhaustive, so exact within its range."""
    cap = TABLE_CAP
    coder = env.coder
    tl = coder.token_length

    leaf_blocks: list[tuple[list[int], Expr, tuple]] = []
    for _, f in env.theory.axioms_below(coder, env.consts, BASE ** max(1, cap - 3)):
        if tl(f) + 3 <= cap:
            leaf_blocks.append(([20, 22] + coder.tokens(f), f, ("axt",)))
    for sc in SCHEMAS:
        id_len = index_length(sc.sid)
        for inst in schema_instances_upto(coder.sig, env.consts, sc.sid, cap - 3 - id_len):
            leaf_blocks.append(
                ([20, 21] + index_letters(sc.sid) + coder.tokens(inst), inst, ("axl", sc.sid))
            )
    by_len: dict[int, list] = {}
    for blk in leaf_blocks:
        by_len.setdefault(len(blk[0]), []).append(blk)

    best: dict[Expr, tuple[int, tuple]] = {}

    def record(letters: list[int], steps: list):
        code = string_value(letters)
        concl = steps[-1][0]
        old = best.get(concl)
        if old is None or code < old[0]:
            best[concl] = (code, tuple(steps))

    def extend(letters: list[int], steps: list):
        used = len(letters)
        for ln in by_len:
            if used + ln > cap:
                continue
            for block, f, just in by_len[ln]:
                nl = letters + block
                ns = steps + [(f, just)]
                record(nl, ns)
                extend(nl, ns)
        k = len(steps)
        for j in range(k):
            fj = steps[j][0]
            if fj.kind != "imp":
                continue
            for i in range(k):
                if steps[i][0] != fj.parts[0]:
                    continue
                block = [20, 23] + index_letters(i) + [18] + index_letters(j) + coder.tokens(fj.parts[1])
                if used + len(block) <= cap:
                    nl = letters + block
                    ns = steps + [(fj.parts[1], ("mp", i, j))]
                    record(nl, ns)
                    extend(nl, ns)
        for i in range(k):
            fi = steps[i][0]
            room = cap - used - 3 - index_length(i) - tl(fi)
            if room < 0:
                continue
            for d, idxs in var_index_groups(room):
                if d > room:
                    break
                for v in idxs:
                    concl = All(v, fi)
                    block = [20, 24] + index_letters(i) + coder.tokens(concl)
                    record(letters + block, steps + [(concl, ("gen", i))])
                    extend(letters + block, steps + [(concl, ("gen", i))])

    extend([19], [])
    return best


# -- consistency ---------------------------------------------------------------


def _skeleton(f: Expr, atoms: dict) -> tuple:
    if f.kind == "bot":
        return ("k", 0)
    if f.kind == "top":
        return ("k", 1)
    if f.kind == "not":
        return ("!", _skeleton(f.parts[0], atoms))
    if f.kind == "and":
        return ("&", _skeleton(f.parts[0], atoms), _skeleton(f.parts[1], atoms))
    if f.kind == "or":
        return ("|", _skeleton(f.parts[0], atoms), _skeleton(f.parts[1], atoms))
    if f.kind == "imp":
        return (">", _skeleton(f.parts[0], atoms), _skeleton(f.parts[1], atoms))
    if f not in atoms:
        atoms[f] = len(atoms)
    return ("a", atoms[f])


def _skel_eval(s: tuple, bits: int) -> int:
    tag = s[0]
    if tag == "k":
        return s[1]
    if tag == "a":
        return (bits >> s[1]) & 1
    if tag == "!":
        return 1 - _skel_eval(s[1], bits)
    a = _skel_eval(s[1], bits)
    b = _skel_eval(s[2], bits)
    if tag == "&":
        return min(a, b)
    if tag == "|":
        return max(a, b)
    return max(1 - a, b)


def skeleton_satisfiable(sentences, max_atoms: int = 20) -> bool | None:
    """SAT of the propositional skeletons; None when inconclusive."""
    atoms: dict = {}
    skels = [_skeleton(f, atoms) for f in sentences]
    if len(atoms) > max_atoms:
        return None
    for bits in range(1 << len(atoms)):
        if all(_skel_eval(s, bits) == 1 for s in skels):
            return True
    return False


def is_consistent_bounded(
    sentences,
    coder: Coder,
    code_bound: int,
    consts: tuple[int, ...] = (),
    model: FiniteModel | None = None,
) -> bool:
    """False iff the propositional skeleton is unsatisfiable or a refutation
    with code below the bound is found."""
    sent = tuple(sentences)
    sat = skeleton_satisfiable(sent)
    if sat is False:
        return False
    if sat is True and all(_quantifier_free(f) for f in sent):
        return True  # the calculus is propositionally complete
    probe = Theory(name="probe", axioms=sent)
    env = ProofEnv(coder, probe, consts=consts, model=model)
    return env.prove_bounded(BOT, code_bound) is None


def _quantifier_free(f: Expr) -> bool:
    return all(e.kind not in ("all", "ex") for e in subexpressions(f))


def prove_bounded(
    goal: Expr,
    theory: Theory,
    coder: Coder,
    code_bound: int,
    consts: tuple[int, ...] = (),
    model: FiniteModel | None = None,
) -> Derivation | None:
    env = ProofEnv(coder, theory, consts=consts, model=model)
    return env.prove_bounded(goal, code_bound)
