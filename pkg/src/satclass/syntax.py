"""First-order abstract syntax over a finite signature, with Henkin constants.

Expressions are immutable and compared structurally.  Terms and formulas share
one node type; ``kind`` discriminates.  Variables and Henkin constants carry a
numeric index, predicate and function applications carry the symbol name.
"""

from __future__ import annotations

from dataclasses import dataclass, field


TERM_KINDS = ("var", "const", "fun")
FORMULA_KINDS = ("pred", "eq", "bot", "top", "not", "and", "or", "imp", "all", "ex")

_RESERVED_NAMES = frozenset(
    ["not", "and", "or", "imp", "all", "ex", "bot", "top", "eq", "theory",
     "pred", "fun", "carrier", "table", "scheme", "equality"]
)


@dataclass(frozen=True)
class Signature:
    """Predicate and function symbols with arities, plus an equality flag."""

    predicates: tuple[tuple[str, int], ...]
    functions: tuple[tuple[str, int], ...] = ()
    has_equality: bool = False

    def __post_init__(self) -> None:
        if not self.predicates:
            raise ValueError("signature needs at least one predicate symbol")
        seen: set[str] = set()
        for name, arity in self.predicates + self.functions:
            if not name or not name.replace("_", "").isalnum() or name[0].isdigit():
                raise ValueError(f"bad symbol name {name!r}")
            if name in _RESERVED_NAMES or _is_indexed_name(name):
                raise ValueError(f"symbol name {name!r} collides with a keyword")
            if name in seen:
                raise ValueError(f"duplicate symbol {name!r}")
            if arity < 0:
                raise ValueError(f"negative arity for {name!r}")
            seen.add(name)

    def pred_slot(self, name: str) -> int:
        for i, (n, _) in enumerate(self.predicates):
            if n == name:
                return i
        raise KeyError(f"unknown predicate {name!r}")

    def fun_slot(self, name: str) -> int:
        for i, (n, _) in enumerate(self.functions):
            if n == name:
                return i
        raise KeyError(f"unknown function {name!r}")

    def pred_arity(self, name: str) -> int:
        return self.predicates[self.pred_slot(name)][1]

    def fun_arity(self, name: str) -> int:
        return self.functions[self.fun_slot(name)][1]

    def is_pred(self, name: str) -> bool:
        return any(n == name for n, _ in self.predicates)

    def is_fun(self, name: str) -> bool:
        return any(n == name for n, _ in self.functions)


def _is_indexed_name(name: str) -> bool:
    # v17 / c3 style tokens are claimed by variables and constants
    return len(name) > 1 and name[0] in "vc" and name[1:].isdigit()


@dataclass(frozen=True)
class Expr:
    kind: str
    parts: tuple["Expr", ...] = ()
    index: int = -1
    name: str = ""

    def __repr__(self) -> str:  # compact, debugging only; text format lives in formats.py
        if self.kind == "var":
            return f"v{self.index}"
        if self.kind == "const":
            return f"c{self.index}"
        if self.kind in ("bot", "top"):
            return self.kind
        head = self.name if self.kind in ("pred", "fun") else self.kind
        if self.kind in ("all", "ex"):
            head = f"{self.kind} v{self.index}"
        inner = " ".join(repr(p) for p in self.parts)
        return f"({head} {inner})" if inner else f"({head})"


def Var(i: int) -> Expr:
    if i < 0:
        raise ValueError("variable index must be >= 0")
    return Expr("var", index=i)


def Const(n: int) -> Expr:
    if n < 0:
        raise ValueError("constant index must be >= 0")
    return Expr("const", index=n)


def Fun(name: str, *args: Expr) -> Expr:
    return Expr("fun", parts=tuple(args), name=name)


def Pred(name: str, *args: Expr) -> Expr:
    return Expr("pred", parts=tuple(args), name=name)


def Eq(left: Expr, right: Expr) -> Expr:
    return Expr("eq", parts=(left, right))


BOT = Expr("bot")
TOP = Expr("top")


def Not(a: Expr) -> Expr:
    return Expr("not", parts=(a,))


def And(a: Expr, b: Expr) -> Expr:
    return Expr("and", parts=(a, b))


def Or(a: Expr, b: Expr) -> Expr:
    return Expr("or", parts=(a, b))


def Imp(a: Expr, b: Expr) -> Expr:
    return Expr("imp", parts=(a, b))


def All(i: int, body: Expr) -> Expr:
    if i < 0:
        raise ValueError("variable index must be >= 0")
    return Expr("all", parts=(body,), index=i)


def Ex(i: int, body: Expr) -> Expr:
    if i < 0:
        raise ValueError("variable index must be >= 0")
    return Expr("ex", parts=(body,), index=i)


def disjunction(parts: list[Expr]) -> Expr:
    """Right-associated chain a0 or (a1 or (...)); empty chains are not a thing here."""
    if not parts:
        raise ValueError("empty disjunction")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def is_term(e: Expr) -> bool:
    return e.kind in TERM_KINDS


def is_formula(e: Expr) -> bool:
    return e.kind in FORMULA_KINDS


def free_vars(e: Expr) -> frozenset[int]:
    if e.kind == "var":
        return frozenset((e.index,))
    if e.kind in ("all", "ex"):
        return free_vars(e.parts[0]) - {e.index}
    out: frozenset[int] = frozenset()
    for p in e.parts:
        out |= free_vars(p)
    return out


def bound_vars(e: Expr) -> frozenset[int]:
    out: frozenset[int] = frozenset()
    if e.kind in ("all", "ex"):
        out |= {e.index}
    for p in e.parts:
        out |= bound_vars(p)
    return out


def constants(e: Expr) -> frozenset[int]:
    if e.kind == "const":
        return frozenset((e.index,))
    out: frozenset[int] = frozenset()
    for p in e.parts:
        out |= constants(p)
    return out


def is_closed_term(e: Expr) -> bool:
    return is_term(e) and not free_vars(e)


def is_sentence(e: Expr) -> bool:
    return is_formula(e) and not free_vars(e)


def validate(sig: Signature, e: Expr) -> None:
    """Raise ValueError unless e is well-formed over sig."""
    if e.kind == "var" or e.kind == "const":
        if e.index < 0:
            raise ValueError(f"negative index in {e!r}")
        return
    if e.kind == "fun":
        try:
            arity = sig.fun_arity(e.name)
        except KeyError as exc:
            raise ValueError(str(exc)) from None
        if len(e.parts) != arity:
            raise ValueError(f"arity mismatch in {e!r}")
        for p in e.parts:
            if not is_term(p):
                raise ValueError(f"non-term argument in {e!r}")
            validate(sig, p)
        return
    if e.kind == "pred":
        try:
            arity = sig.pred_arity(e.name)
        except KeyError as exc:
            raise ValueError(str(exc)) from None
        if len(e.parts) != arity:
            raise ValueError(f"arity mismatch in {e!r}")
        for p in e.parts:
            if not is_term(p):
                raise ValueError(f"non-term argument in {e!r}")
            validate(sig, p)
        return
    if e.kind == "eq":
        if not sig.has_equality:
            raise ValueError("equality atom over a signature without equality")
        for p in e.parts:
            if not is_term(p):
                raise ValueError(f"non-term side in {e!r}")
            validate(sig, p)
        return
    if e.kind in ("bot", "top"):
        if e.parts:
            raise ValueError(f"{e.kind} takes no arguments")
        return
    if e.kind == "not":
        (a,) = e.parts
        if not is_formula(a):
            raise ValueError(f"non-formula under not: {e!r}")
        validate(sig, a)
        return
    if e.kind in ("and", "or", "imp"):
        a, b = e.parts
        for p in (a, b):
            if not is_formula(p):
                raise ValueError(f"non-formula under {e.kind}: {e!r}")
            validate(sig, p)
        return
    if e.kind in ("all", "ex"):
        if e.index < 0:
            raise ValueError(f"negative binder index in {e!r}")
        (body,) = e.parts
        if not is_formula(body):
            raise ValueError(f"non-formula body in {e!r}")
        validate(sig, body)
        return
    raise ValueError(f"unknown kind {e.kind!r}")


def substitute(formula: Expr, var_index: int, term: Expr) -> Expr:
    """Replace free occurrences of v_{var_index} by a closed term.

    The closed-term precondition is what makes the operation capture-free.
    """
    if not is_term(term) or free_vars(term):
        raise ValueError("substitute requires a closed term")
    return _subst(formula, var_index, term)


def _subst(e: Expr, i: int, t: Expr) -> Expr:
    if e.kind == "var":
        return t if e.index == i else e
    if e.kind in ("all", "ex") and e.index == i:
        return e  # occurrences below are bound
    if not e.parts:
        return e
    parts = tuple(_subst(p, i, t) for p in e.parts)
    if parts == e.parts:
        return e
    return Expr(e.kind, parts=parts, index=e.index, name=e.name)


def rename_free_var(e: Expr, old: int, new: int) -> Expr:
    """Rename free occurrences of v_old to v_new, alpha-renaming v_new binders out
    of the way first so nothing gets captured."""
    if old == new:
        return e
    cleared = _alpha_clear(e, new)
    return _rename(cleared, old, new)


def _alpha_clear(e: Expr, v: int) -> Expr:
    if e.kind in ("all", "ex") and e.index == v:
        fresh = max(free_vars(e.parts[0]) | bound_vars(e.parts[0]) | {v}) + 1
        body = _rename(_alpha_clear(e.parts[0], v), v, fresh)
        return Expr(e.kind, parts=(body,), index=fresh)
    if not e.parts:
        return e
    parts = tuple(_alpha_clear(p, v) for p in e.parts)
    if parts == e.parts:
        return e
    return Expr(e.kind, parts=parts, index=e.index, name=e.name)


def _rename(e: Expr, old: int, new: int) -> Expr:
    if e.kind == "var":
        return Var(new) if e.index == old else e
    if e.kind in ("all", "ex") and e.index == old:
        return e
    if not e.parts:
        return e
    parts = tuple(_rename(p, old, new) for p in e.parts)
    if parts == e.parts:
        return e
    return Expr(e.kind, parts=parts, index=e.index, name=e.name)


def subexpressions(e: Expr):
    """Yield e and every proper subexpression, preorder."""
    yield e
    for p in e.parts:
        yield from subexpressions(p)
