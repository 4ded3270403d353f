"""Monotone numeric coding of expressions and derivations.

An expression serializes to a prefix (Polish) letter string over a fixed
24-letter alphabet; its code is the bijective base-24 value of that string.
Variable, constant, symbol-slot and citation indices are written in bijective
base 4 (letters D1..D4) and parsed by maximal munch, which keeps the grammar
self-delimiting without terminators; only the two citation indices of an MP
justification need an END letter between them.

Bijective numeration orders strings by length first, then lexicographically,
so a proper subexpression (a strict substring of the serialization) always
has a strictly smaller code, and the steps of a coded derivation sit strictly
below the derivation's own code.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .syntax import (
    BOT,
    TOP,
    All,
    And,
    Const,
    Eq,
    Ex,
    Expr,
    Fun,
    Imp,
    Not,
    Or,
    Pred,
    Signature,
    Var,
    free_vars,
    is_formula,
    is_sentence,
    validate,
)

BASE = 24

L_BOT, L_TOP, L_NEG, L_AND, L_OR, L_IMP, L_ALL, L_EX = 1, 2, 3, 4, 5, 6, 7, 8
L_VAR, L_CONST, L_PRED, L_FUN, L_EQ = 9, 10, 11, 12, 13
L_D1 = 14  # digits D1..D4 occupy letters 14..17
L_END = 18
L_DRV, L_STEP, L_AXL, L_AXT, L_MP, L_GEN = 19, 20, 21, 22, 23, 24

_DIGIT_RANGE = range(L_D1, L_D1 + 4)


class CodingError(ValueError):
    pass


def index_letters(n: int) -> list[int]:
    """Bijective base-4 digit letters for an index, empty for 0."""
    if n < 0:
        raise CodingError("negative index")
    out: list[int] = []
    while n:
        r = n % 4
        if r == 0:
            r = 4
        out.append(L_D1 + r - 1)
        n = (n - r) // 4
    out.reverse()
    return out


def index_length(n: int) -> int:
    return len(index_letters(n))


def string_value(letters: list[int]) -> int:
    v = 0
    for a in letters:
        if not 1 <= a <= BASE:
            raise CodingError(f"letter {a} out of range")
        v = v * BASE + a
    return v


def value_string(v: int) -> list[int]:
    if v < 0:
        raise CodingError("negative code")
    out: list[int] = []
    while v:
        r = v % BASE
        if r == 0:
            r = BASE
        out.append(r)
        v = (v - r) // BASE
    out.reverse()
    return out


def max_token_length(bound: int) -> int:
    """Letters available to any string with code < bound."""
    if bound <= 1:
        return 0
    return len(value_string(bound - 1))


Justification = tuple  # ("axl", id) | ("axt",) | ("mp", i, j) | ("gen", i)
Step = tuple  # (Expr, Justification)


class Coder:
    """Signature-bound encoder/decoder.  Codes are plain ints."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self._enc: dict[Expr, int] = {}

    # -- expressions ---------------------------------------------------

    def tokens(self, e: Expr) -> list[int]:
        out: list[int] = []
        self._emit(e, out)
        return out

    def _emit(self, e: Expr, out: list[int]) -> None:
        k = e.kind
        if k == "bot":
            out.append(L_BOT)
        elif k == "top":
            out.append(L_TOP)
        elif k == "not":
            out.append(L_NEG)
            self._emit(e.parts[0], out)
        elif k == "and" or k == "or" or k == "imp":
            out.append({"and": L_AND, "or": L_OR, "imp": L_IMP}[k])
            self._emit(e.parts[0], out)
            self._emit(e.parts[1], out)
        elif k == "all" or k == "ex":
            out.append(L_ALL if k == "all" else L_EX)
            out.extend(index_letters(e.index))
            self._emit(e.parts[0], out)
        elif k == "var":
            out.append(L_VAR)
            out.extend(index_letters(e.index))
        elif k == "const":
            out.append(L_CONST)
            out.extend(index_letters(e.index))
        elif k == "pred":
            out.append(L_PRED)
            out.extend(index_letters(self.sig.pred_slot(e.name)))
            for p in e.parts:
                self._emit(p, out)
        elif k == "fun":
            out.append(L_FUN)
            out.extend(index_letters(self.sig.fun_slot(e.name)))
            for p in e.parts:
                self._emit(p, out)
        elif k == "eq":
            if not self.sig.has_equality:
                raise CodingError("equality atom over a signature without equality")
            out.append(L_EQ)
            self._emit(e.parts[0], out)
            self._emit(e.parts[1], out)
        else:
            raise CodingError(f"unknown kind {k!r}")

    def encode(self, e: Expr) -> int:
        got = self._enc.get(e)
        if got is None:
            validate(self.sig, e)
            got = string_value(self.tokens(e))
            self._enc.setdefault(e, got)
        return got

    def token_length(self, e: Expr) -> int:
        return len(self.tokens(e))

    def decode(self, code: int):
        """('expr', Expr) or ('derivation', steps) for a well-formed code."""
        letters = value_string(code)
        if not letters:
            raise CodingError("0 codes the empty string")
        if letters[0] == L_DRV:
            return ("derivation", self._parse_derivation(letters))
        p = _Parser(self, letters)
        e = p.parse_formula_or_term()
        p.expect_end()
        return ("expr", e)

    def decode_expression(self, code: int) -> Expr:
        tag, val = self.decode(code)
        if tag != "expr":
            raise CodingError("code is a derivation, not an expression")
        return val

    def try_decode_formula(self, code: int) -> Expr | None:
        try:
            tag, val = self.decode(code)
        except CodingError:
            return None
        if tag == "expr" and is_formula(val):
            return val
        return None

    def try_decode_sentence(self, code: int) -> Expr | None:
        got = self.try_decode_formula(code)
        if got is not None and is_sentence(got):
            return got
        return None

    # -- derivations ---------------------------------------------------

    def derivation_tokens(self, steps: list[Step]) -> list[int]:
        out = [L_DRV]
        for formula, just in steps:
            out.append(L_STEP)
            tag = just[0]
            if tag == "axl":
                out.append(L_AXL)
                out.extend(index_letters(just[1]))
            elif tag == "axt":
                out.append(L_AXT)
            elif tag == "mp":
                out.append(L_MP)
                out.extend(index_letters(just[1]))
                out.append(L_END)
                out.extend(index_letters(just[2]))
            elif tag == "gen":
                out.append(L_GEN)
                out.extend(index_letters(just[1]))
            else:
                raise CodingError(f"unknown justification {tag!r}")
            self._emit(formula, out)
        return out

    def encode_derivation(self, steps: list[Step]) -> int:
        if not steps:
            raise CodingError("empty derivation")
        return string_value(self.derivation_tokens(steps))

    def decode_derivation(self, code: int) -> list[Step]:
        letters = value_string(code)
        if not letters or letters[0] != L_DRV:
            raise CodingError("not a derivation code")
        return self._parse_derivation(letters)

    def _parse_derivation(self, letters: list[int]) -> list[Step]:
        p = _Parser(self, letters)
        p.take(L_DRV)
        steps: list[Step] = []
        while not p.done():
            p.take(L_STEP)
            head = p.peek()
            if head == L_AXL:
                p.take(L_AXL)
                just: Justification = ("axl", p.munch_index())
            elif head == L_AXT:
                p.take(L_AXT)
                just = ("axt",)
            elif head == L_MP:
                p.take(L_MP)
                i = p.munch_index()
                p.take(L_END)
                j = p.munch_index()
                just = ("mp", i, j)
            elif head == L_GEN:
                p.take(L_GEN)
                just = ("gen", p.munch_index())
            else:
                raise CodingError(f"bad justification letter {head}")
            formula = p.parse_formula()
            steps.append((formula, just))
        if not steps:
            raise CodingError("empty derivation")
        return steps

    def step_codes(self, steps: list[Step]) -> list[int]:
        """(d)_i for each step: the codes of the step formulas."""
        return [self.encode(f) for f, _ in steps]


class _Parser:
    def __init__(self, coder: Coder, letters: list[int]):
        self.coder = coder
        self.letters = letters
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.letters)

    def peek(self) -> int:
        if self.done():
            raise CodingError("truncated string")
        return self.letters[self.pos]

    def take(self, letter: int) -> None:
        if self.done() or self.letters[self.pos] != letter:
            raise CodingError(f"expected letter {letter} at {self.pos}")
        self.pos += 1

    def expect_end(self) -> None:
        if not self.done():
            raise CodingError("trailing letters")

    def munch_index(self) -> int:
        v = 0
        while not self.done() and self.letters[self.pos] in _DIGIT_RANGE:
            v = v * 4 + (self.letters[self.pos] - L_D1 + 1)
            self.pos += 1
        return v

    def parse_formula_or_term(self) -> Expr:
        if self.peek() in (L_VAR, L_CONST, L_FUN):
            return self.parse_term()
        return self.parse_formula()

    def parse_term(self) -> Expr:
        head = self.peek()
        if head == L_VAR:
            self.take(L_VAR)
            return Var(self.munch_index())
        if head == L_CONST:
            self.take(L_CONST)
            return Const(self.munch_index())
        if head == L_FUN:
            self.take(L_FUN)
            slot = self.munch_index()
            if slot >= len(self.coder.sig.functions):
                raise CodingError(f"function slot {slot} out of range")
            name, arity = self.coder.sig.functions[slot]
            args = tuple(self.parse_term() for _ in range(arity))
            return Fun(name, *args)
        raise CodingError(f"letter {head} does not start a term")

    def parse_formula(self) -> Expr:
        head = self.peek()
        if head == L_BOT:
            self.take(L_BOT)
            return BOT
        if head == L_TOP:
            self.take(L_TOP)
            return TOP
        if head == L_NEG:
            self.take(L_NEG)
            return Not(self.parse_formula())
        if head in (L_AND, L_OR, L_IMP):
            self.pos += 1
            a = self.parse_formula()
            b = self.parse_formula()
            return {L_AND: And, L_OR: Or, L_IMP: Imp}[head](a, b)
        if head in (L_ALL, L_EX):
            self.pos += 1
            idx = self.munch_index()
            body = self.parse_formula()
            return All(idx, body) if head == L_ALL else Ex(idx, body)
        if head == L_PRED:
            self.take(L_PRED)
            slot = self.munch_index()
            if slot >= len(self.coder.sig.predicates):
                raise CodingError(f"predicate slot {slot} out of range")
            name, arity = self.coder.sig.predicates[slot]
            args = tuple(self.parse_term() for _ in range(arity))
            return Pred(name, *args)
        if head == L_EQ:
            if not self.coder.sig.has_equality:
                raise CodingError("equality letter over a signature without equality")
            self.take(L_EQ)
            a = self.parse_term()
            b = self.parse_term()
            return Eq(a, b)
        raise CodingError(f"letter {head} does not start a formula")


# -- exact enumeration by token length --------------------------------------


def var_index_groups(max_digits: int) -> list[tuple[int, list[int]]]:
    """(digit-length, indices) pairs: all variable indices, grouped."""
    groups: list[tuple[int, list[int]]] = [(0, [0])]
    lo = 1
    for d in range(1, max_digits + 1):
        n = 4**d
        groups.append((d, list(range(lo, lo + n))))
        lo += n
    return groups


@lru_cache(maxsize=64)
def _expr_pool(sig: Signature, consts: tuple[int, ...], max_tokens: int):
    """All terms and formulas over sig with constants from `consts`, keyed by
    exact token length.  Variable indices are exhaustive for the budget, so a
    filtered scan of this pool is an exact code-bounded enumeration."""
    terms: dict[int, list[Expr]] = {n: [] for n in range(1, max_tokens + 1)}
    forms: dict[int, list[Expr]] = {n: [] for n in range(1, max_tokens + 1)}
    vgroups = [(d, idxs) for d, idxs in var_index_groups(max(0, max_tokens - 1))]

    for d, idxs in vgroups:
        if 1 + d <= max_tokens:
            for i in idxs:
                terms[1 + d].append(Var(i))
    for c in sorted(consts):
        ln = 1 + index_length(c)
        if ln <= max_tokens:
            terms[ln].append(Const(c))

    def compositions(total: int, k: int):
        if k == 1:
            if total >= 1:
                yield (total,)
            return
        for first in range(1, total - k + 2):
            for rest in compositions(total - first, k - 1):
                yield (first,) + rest

    # terms with function heads, by increasing total length
    for ln in range(1, max_tokens + 1):
        for slot, (name, arity) in enumerate(sig.functions):
            head = 1 + index_length(slot)
            if arity == 0:
                if ln == head:
                    terms[ln].append(Fun(name))
                continue
            body = ln - head
            if body < arity:
                continue
            for combo in compositions(body, arity):
                for args in _product([terms[c] for c in combo]):
                    terms[ln].append(Fun(name, *args))

    for ln in range(1, max_tokens + 1):
        if ln == 1:
            forms[1].extend([BOT, TOP])
        for slot, (name, arity) in enumerate(sig.predicates):
            head = 1 + index_length(slot)
            if arity == 0:
                if ln == head:
                    forms[ln].append(Pred(name))
                continue
            body = ln - head
            if body < arity:
                continue
            for combo in compositions(body, arity):
                for args in _product([terms[c] for c in combo]):
                    forms[ln].append(Pred(name, *args))
        if sig.has_equality and ln >= 3:
            for la in range(1, ln - 1):
                for a in terms[la]:
                    for b in terms[ln - 1 - la]:
                        forms[ln].append(Eq(a, b))
        if ln >= 2:
            for a in forms[ln - 1]:
                forms[ln].append(Not(a))
        if ln >= 3:
            for la in range(1, ln - 1):
                for a in forms[la]:
                    for b in forms[ln - 1 - la]:
                        forms[ln].append(And(a, b))
                        forms[ln].append(Or(a, b))
                        forms[ln].append(Imp(a, b))
        for d, idxs in vgroups:
            body = ln - 1 - d
            if body < 1:
                continue
            for i in idxs:
                for a in forms[body]:
                    forms[ln].append(All(i, a))
                    forms[ln].append(Ex(i, a))

    return terms, forms


def _product(pools: list[list[Expr]]):
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for rest in _product(pools[1:]):
            yield (head,) + rest


def expressions_by_tokens(sig: Signature, consts: tuple[int, ...], max_tokens: int):
    """(terms, formulas) keyed by exact token length; exact for variables."""
    return _expr_pool(sig, tuple(sorted(consts)), max_tokens)


def formulas_below(coder: Coder, consts: tuple[int, ...], bound: int) -> list[tuple[int, Expr]]:
    """(code, formula) for every formula with code < bound, ascending by code."""
    budget = max_token_length(bound)
    _, forms = _expr_pool(coder.sig, tuple(sorted(consts)), budget)
    out = []
    for ln in range(1, budget + 1):
        for f in forms[ln]:
            c = coder.encode(f)
            if c < bound:
                out.append((c, f))
    out.sort(key=lambda p: p[0])
    return out


def one_free_variable_formulas(coder: Coder, consts: tuple[int, ...], bound: int) -> list[Expr]:
    """Formulas with exactly one free variable and code < bound, by code."""
    return [f for _, f in formulas_below(coder, consts, bound) if len(free_vars(f)) == 1]


def sentences_below(coder: Coder, consts: tuple[int, ...], bound: int) -> list[tuple[int, Expr]]:
    """(code, sentence) pairs with code < bound, ascending by code."""
    return [(c, f) for c, f in formulas_below(coder, consts, bound) if is_sentence(f)]
