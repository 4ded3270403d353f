"""Finite first-order models: evaluation, atomic truth, and type saturation.

Carrier elements are naturals, and the constant c_u names the element u, so a
closed term always evaluates inside the carrier or raises a domain error.
Finite carriers make every recursive type saturated by pigeonhole, which is
what the downstream construction needs from its models.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .syntax import Const, Expr, Signature, free_vars, is_formula, substitute, validate


class ModelDomainError(ValueError):
    """A constant index outside the carrier reached the evaluator."""


@dataclass(frozen=True)
class FiniteModel:
    sig: Signature
    carrier: tuple[int, ...]
    predicates: tuple[tuple[str, tuple[tuple[int, ...], ...]], ...]
    functions: tuple[tuple[str, tuple[tuple[tuple[int, ...], int], ...]], ...] = ()

    def __post_init__(self):
        if not self.carrier:
            raise ValueError("empty carrier")
        if list(self.carrier) != sorted(set(self.carrier)):
            raise ValueError("carrier must be sorted and duplicate-free")
        if any(a < 0 for a in self.carrier):
            raise ValueError("carrier elements must be naturals")
        dom = set(self.carrier)
        ptab: dict[str, frozenset[tuple[int, ...]]] = {}
        for name, rows in self.predicates:
            arity = self.sig.pred_arity(name)
            for row in rows:
                if len(row) != arity or not set(row) <= dom:
                    raise ValueError(f"bad row {row} in table for {name!r}")
            ptab[name] = frozenset(rows)
        for name, _ in self.sig.predicates:
            if name not in ptab:
                raise ValueError(f"missing table for predicate {name!r}")
        ftab: dict[str, dict[tuple[int, ...], int]] = {}
        for name, graph in self.functions:
            arity = self.sig.fun_arity(name)
            table = {}
            for args, val in graph:
                if len(args) != arity or not set(args) <= dom or val not in dom:
                    raise ValueError(f"bad entry {args}->{val} in table for {name!r}")
                table[tuple(args)] = val
            if len(table) != len(self.carrier) ** arity:
                raise ValueError(f"table for {name!r} is not total over the carrier")
            ftab[name] = table
        for name, _ in self.sig.functions:
            if name not in ftab:
                raise ValueError(f"missing table for function {name!r}")
        object.__setattr__(self, "_ptab", ptab)
        object.__setattr__(self, "_ftab", ftab)
        object.__setattr__(self, "_memo", {})

    def pred_table(self, name: str) -> frozenset:
        return self._ptab[name]

    def fun_table(self, name: str) -> dict:
        return self._ftab[name]


def make_model(sig: Signature, carrier, predicates=None, functions=None) -> FiniteModel:
    """Build a FiniteModel from dict/set style tables."""
    preds = predicates or {}
    funs = functions or {}
    ptab = tuple(
        (name, tuple(sorted(tuple(r) for r in preds.get(name, ()))))
        for name, _ in sig.predicates
    )
    ftab = tuple(
        (name, tuple(sorted((tuple(k), v) for k, v in funs.get(name, {}).items())))
        for name, _ in sig.functions
    )
    return FiniteModel(sig=sig, carrier=tuple(sorted(set(carrier))), predicates=ptab, functions=ftab)


def _eval_term(m: FiniteModel, t: Expr) -> int:
    if t.kind == "const":
        if t.index not in set(m.carrier):
            raise ModelDomainError(f"constant c{t.index} does not denote in the carrier")
        return t.index
    if t.kind == "fun":
        args = tuple(_eval_term(m, a) for a in t.parts)
        return m.fun_table(t.name)[args]
    raise ValueError(f"open term reached the evaluator: {t!r}")


def evaluate(m: FiniteModel, sigma: Expr) -> int:
    """Compositional 0/1 value of a closed formula over L(C restricted to M)."""
    got = m._memo.get(sigma)
    if got is not None:
        return got
    if not is_formula(sigma) or free_vars(sigma):
        raise ValueError(f"evaluate needs a closed formula, got {sigma!r}")
    validate(m.sig, sigma)
    val = _eval(m, sigma)
    m._memo[sigma] = val
    return val


def _eval(m: FiniteModel, s: Expr) -> int:
    k = s.kind
    if k == "bot":
        return 0
    if k == "top":
        return 1
    if k == "pred":
        row = tuple(_eval_term(m, a) for a in s.parts)
        return 1 if row in m.pred_table(s.name) else 0
    if k == "eq":
        return 1 if _eval_term(m, s.parts[0]) == _eval_term(m, s.parts[1]) else 0
    if k == "not":
        return 1 - _eval(m, s.parts[0])
    if k == "and":
        return min(_eval(m, s.parts[0]), _eval(m, s.parts[1]))
    if k == "or":
        return max(_eval(m, s.parts[0]), _eval(m, s.parts[1]))
    if k == "imp":
        return max(1 - _eval(m, s.parts[0]), _eval(m, s.parts[1]))
    if k == "all":
        return min(_eval(m, substitute(s.parts[0], s.index, Const(a))) for a in m.carrier)
    if k == "ex":
        return max(_eval(m, substitute(s.parts[0], s.index, Const(a))) for a in m.carrier)
    raise ValueError(f"not a formula: {s!r}")


def atomic_truth(m: FiniteModel, sigma: Expr) -> int:
    """Base-level truth of a variable-free atomic sentence."""
    if sigma.kind not in ("pred", "eq", "bot", "top"):
        raise ValueError(f"atomic_truth needs an atomic sentence, got {sigma.kind!r}")
    if free_vars(sigma):
        raise ValueError("atomic_truth needs a variable-free atom")
    return evaluate(m, sigma)


def satisfies(m: FiniteModel, axioms) -> bool:
    return all(evaluate(m, a) == 1 for a in axioms)


@dataclass(frozen=True)
class RecursiveType:
    """A uniformly generated family phi_n(x, params) with one free variable."""

    generator: Callable[[int, tuple[int, ...]], Expr]
    parameters: tuple[int, ...] = ()
    var_index: int = 0

    def formula_at(self, n: int) -> Expr:
        f = self.generator(n, self.parameters)
        if free_vars(f) != frozenset({self.var_index}):
            raise ValueError(f"type formula {n} must have exactly v{self.var_index} free")
        return f


def saturation_witness(m: FiniteModel, t: RecursiveType, n_max: int) -> int | None:
    """Least carrier element realizing the whole prefix phi_0..phi_{n_max}.

    Prefixes are nested, so per-prefix satisfiability up to n_max is the same
    as satisfiability of the longest prefix; on a finite carrier that is a
    direct sweep."""
    prefix = [t.formula_at(n) for n in range(n_max + 1)]
    for a in m.carrier:
        if all(evaluate(m, substitute(f, t.var_index, Const(a))) == 1 for f in prefix):
            return a
    return None
